// Simulation designs M1-M6 (AR-correlated Gaussian predictors, contaminated
// errors, nonlinear transformations, censoring), CSV ingestion, splitting,
// and train-statistics standardization.
#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "deepmrc/core.hpp"
#include "deepmrc/rng.hpp"

namespace deepmrc {

struct TruthInfo {
    std::vector<int> important;  // 0-based input indices
    Vec fstar;                   // noiseless index / systematic component per row
    std::string model;
};

struct Dataset {
    Matrix X;
    Vec y;
    std::optional<std::vector<int>> delta;  // event indicator, 1 = observed
    std::vector<std::string> names;
    std::optional<TruthInfo> truth;

    std::size_t n() const { return X.rows(); }
    std::size_t p() const { return X.cols(); }

    void validate() const {
        if (y.size() != X.rows()) throw DataError("y length does not match X");
        if (delta && delta->size() != X.rows()) throw DataError("delta length does not match X");
        for (double v : X.data())
            if (!std::isfinite(v)) throw DataError("non-finite entry in X");
        for (double v : y)
            if (!std::isfinite(v)) throw DataError("non-finite entry in y");
    }
};

enum class SimModel { M1, M2, M3, M4, M5, M6 };
enum class ErrorKind { Normal, Contaminated };

struct SimSpec {
    SimModel model = SimModel::M1;
    int n = 1000;
    int p = 15;
    double rho = 0.3;
    ErrorKind error = ErrorKind::Normal;
    std::uint64_t seed = 0;

    void validate() const {
        if (n < 1) throw ConfigError("n must be positive");
        if (p < 15) throw ConfigError("simulation models use X1..X15; p must be >= 15");
        if (!(rho > -1.0 && rho < 1.0)) throw ConfigError("rho must lie in (-1, 1)");
    }
};

inline SimModel parse_sim_model(const std::string& name) {
    if (name == "M1" || name == "m1") return SimModel::M1;
    if (name == "M2" || name == "m2") return SimModel::M2;
    if (name == "M3" || name == "m3") return SimModel::M3;
    if (name == "M4" || name == "m4") return SimModel::M4;
    if (name == "M5" || name == "m5") return SimModel::M5;
    if (name == "M6" || name == "m6") return SimModel::M6;
    throw ConfigError("unknown simulation model: " + name);
}

inline std::string sim_model_name(SimModel m) {
    switch (m) {
        case SimModel::M1: return "M1";
        case SimModel::M2: return "M2";
        case SimModel::M3: return "M3";
        case SimModel::M4: return "M4";
        case SimModel::M5: return "M5";
        case SimModel::M6: return "M6";
    }
    return "?";
}

inline bool sim_model_censored(SimModel m) { return m == SimModel::M5 || m == SimModel::M6; }

// M3, M4 and M6 pair with contaminated errors in the reference design.
inline ErrorKind default_error_kind(SimModel m) {
    return (m == SimModel::M3 || m == SimModel::M4 || m == SimModel::M6) ? ErrorKind::Contaminated
                                                                         : ErrorKind::Normal;
}

// Rows i.i.d. N(0, Sigma) with Sigma_{ij} = rho^{|i-j|}, via the AR(1)
// recursion x_j = rho*x_{j-1} + sqrt(1-rho^2)*z_j.
inline Matrix gen_ar_gaussian(int n, int p, double rho, std::uint64_t seed) {
    if (!(rho > -1.0 && rho < 1.0)) throw ConfigError("rho must lie in (-1, 1)");
    Rng rng(seed);
    Matrix X(static_cast<std::size_t>(n), static_cast<std::size_t>(p));
    const double scale = std::sqrt(1.0 - rho * rho);
    for (int i = 0; i < n; ++i) {
        double prev = rng.normal();
        X(i, 0) = prev;
        for (int j = 1; j < p; ++j) {
            prev = rho * prev + scale * rng.normal();
            X(i, j) = prev;
        }
    }
    return X;
}

// Standard normal, or the 0.9 N(0,1) + 0.1 Cauchy(0,1) contamination mixture.
inline Vec gen_error(ErrorKind kind, int n, std::uint64_t seed) {
    Rng rng(seed);
    Vec e(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        if (kind == ErrorKind::Normal) {
            e[i] = rng.normal();
        } else {
            const double mix = rng.uniform01();
            e[i] = mix < 0.9 ? rng.normal() : rng.cauchy();
        }
    }
    return e;
}

namespace detail {

inline Vec model_b(SimModel m, int p) {
    Vec b(static_cast<std::size_t>(p), 0.0);
    if (m == SimModel::M1 || m == SimModel::M2) {
        for (int i = 0; i < 8; ++i) b[i] = 0.5;
        for (int i = 8; i < 15; ++i) b[i] = -0.5;
    } else if (m == SimModel::M5) {
        const double vals[15] = {-0.9, 0.8, -0.7, 0.6, -0.5, 0.4, -0.3, 0.2,
                                 -0.3, 0.4, 0.5,  -0.6, 0.7, -0.8, 0.9};
        for (int i = 0; i < 15; ++i) b[i] = vals[i];
    }
    return b;
}

// The printed sqrt(X'b) argument can be negative; |u|^(1/2) keeps the
// generator total and reproduces the reference censoring rate.
inline double sqrt_abs(double u) { return std::sqrt(std::abs(u)); }

// Noiseless systematic component of each model: the quantity the error is
// added to (for M2 before the outer transform; for M5 on the log-time scale).
inline double model_systematic(SimModel m, std::span<const double> x, const Vec& b) {
    switch (m) {
        case SimModel::M1: {
            const double u = dot(std::span<const double>(b), x.subspan(0, b.size()));
            return u + std::sin(u * u);
        }
        case SimModel::M2: {
            const double u = dot(std::span<const double>(b), x.subspan(0, b.size()));
            return 1.0 + u + std::cos(u * u) + std::exp(1.0 - u * u);
        }
        case SimModel::M3:
            return 0.5 * x[0] * x[0] + x[1] * x[2] + (x[3] - x[4]) * (x[3] - x[4]) / 3.0 -
                   1.0 / (x[5] * x[5] + 1.0) - 1.0 / (x[6] * x[6] + 1.0) - std::sin(x[7]) +
                   std::sin(x[8] * x[9]) + std::exp(1.0 / (x[10] * x[10] + 1.0)) +
                   std::exp(0.5 * std::abs(x[11])) - std::exp(0.5 * x[12]) + std::tanh(x[13]) -
                   std::tanh(1.0 / x[14]);
        case SimModel::M4:
            return 0.5 * (x[0] * x[0] + x[1] * x[1]) + x[2] * x[2] / (2.0 + x[3] * x[3]) -
                   1.0 / (0.5 + x[4]) + std::sin(x[5] + x[6]) - std::sin(x[7] * x[7]) +
                   (x[8] * x[8] + x[9] * x[9]) / 3.0 + std::exp(0.5 * x[10]) -
                   std::exp(1.0 / (1.0 + x[11] * x[11])) + std::tanh(x[12]) +
                   std::abs(x[13] * x[14]);
        case SimModel::M5: {
            const double u = dot(std::span<const double>(b), x.subspan(0, b.size()));
            return sqrt_abs(u) + std::sin(u) - 1.0;
        }
        case SimModel::M6:
            return 0.5 * (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) + std::sin(x[3] + x[4]) -
                   std::exp((x[5] * x[6] + x[7]) / 3.0) + std::exp(1.0 / (x[8] * x[8] + 1.0)) +
                   std::exp(0.5 * x[9]) + std::tanh(x[10] * x[11]) -
                   x[12] / (0.5 + x[13] * x[13] + x[14] * x[14]);
    }
    return 0.0;
}

// Transformation D of M2: u for u > 0, 3u for u < 0.
inline double m2_transform(double u) { return u > 0.0 ? u : 3.0 * u; }

// Substream tags used by gen_model; exposed so tests can regenerate the
// error/censoring draws independently of the full generator.
inline constexpr std::uint64_t kDesignSalt = 1;
inline constexpr std::uint64_t kErrorSalt = 2;
inline constexpr std::uint64_t kCensorSalt = 3;

}  // namespace detail

inline Dataset gen_model(const SimSpec& spec) {
    spec.validate();
    Dataset ds;
    ds.X = gen_ar_gaussian(spec.n, spec.p, spec.rho, derive_seed(spec.seed, detail::kDesignSalt));
    const Vec eps = gen_error(spec.error, spec.n, derive_seed(spec.seed, detail::kErrorSalt));
    const Vec b = detail::model_b(spec.model, spec.p);
    const auto n = static_cast<std::size_t>(spec.n);

    ds.y.resize(n);
    TruthInfo truth;
    truth.model = sim_model_name(spec.model);
    for (int q = 0; q < 15; ++q) truth.important.push_back(q);
    truth.fstar.resize(n);

    const bool single_index =
        spec.model == SimModel::M1 || spec.model == SimModel::M2 || spec.model == SimModel::M5;

    for (std::size_t i = 0; i < n; ++i) {
        const auto x = ds.X.row(i);
        const double sys = detail::model_systematic(spec.model, x, b);
        truth.fstar[i] = single_index ? dot(std::span<const double>(b), x.subspan(0, b.size())) : sys;
        switch (spec.model) {
            case SimModel::M1:
            case SimModel::M3:
            case SimModel::M4:
                ds.y[i] = sys + eps[i];
                break;
            case SimModel::M2:
                ds.y[i] = detail::m2_transform(sys + eps[i]);
                break;
            case SimModel::M5:
                ds.y[i] = sys + eps[i] / std::sqrt(2.0);  // log event time; censored below
                break;
            case SimModel::M6:
                ds.y[i] = sys + eps[i];  // event time; censored below
                break;
        }
    }

    if (sim_model_censored(spec.model)) {
        Rng crng(derive_seed(spec.seed, detail::kCensorSalt));
        const int dof = spec.model == SimModel::M5 ? 2 : 6;
        std::vector<int> delta(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double c = crng.chisq(dof);
            delta[i] = ds.y[i] <= c ? 1 : 0;
            ds.y[i] = std::min(ds.y[i], c);
        }
        ds.delta = std::move(delta);
    }

    ds.names.resize(static_cast<std::size_t>(spec.p));
    for (int j = 0; j < spec.p; ++j) ds.names[static_cast<std::size_t>(j)] = "x" + std::to_string(j + 1);
    ds.truth = std::move(truth);
    ds.validate();
    return ds;
}

namespace detail {

inline std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline double parse_number(const std::string& cell, std::size_t line_no) {
    double v = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last)
        throw DataError("non-numeric cell '" + cell + "' at line " + std::to_string(line_no));
    return v;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    std::stringstream ss(line);
    while (std::getline(ss, cur, ',')) cells.push_back(cur);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

}  // namespace detail

// Column layout: feature columns, then `y`, then an optional `delta` in {0,1}.
inline void save_csv(const Dataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open for writing: " + path);
    for (std::size_t j = 0; j < ds.p(); ++j) {
        const std::string name = j < ds.names.size() ? ds.names[j] : "x" + std::to_string(j + 1);
        out << name << ',';
    }
    out << 'y';
    if (ds.delta) out << ",delta";
    out << '\n';
    for (std::size_t i = 0; i < ds.n(); ++i) {
        for (std::size_t j = 0; j < ds.p(); ++j) out << detail::format_g17(ds.X(i, j)) << ',';
        out << detail::format_g17(ds.y[i]);
        if (ds.delta) out << ',' << (*ds.delta)[i];
        out << '\n';
    }
    if (!out) throw DataError("write failed: " + path);
}

inline Dataset load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty file: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = detail::split_csv_line(line);

    std::ptrdiff_t y_col = -1, delta_col = -1;
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (header[j] == "y") y_col = static_cast<std::ptrdiff_t>(j);
        if (header[j] == "delta") delta_col = static_cast<std::ptrdiff_t>(j);
    }
    if (y_col < 0) throw DataError("missing 'y' column in " + path);

    std::vector<std::string> names;
    std::vector<std::size_t> feat_cols;
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (static_cast<std::ptrdiff_t>(j) == y_col || static_cast<std::ptrdiff_t>(j) == delta_col)
            continue;
        names.push_back(header[j]);
        feat_cols.push_back(j);
    }
    if (feat_cols.empty()) throw DataError("no feature columns in " + path);

    std::vector<Vec> rows;
    Vec y;
    std::vector<int> delta;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = detail::split_csv_line(line);
        if (cells.size() != header.size())
            throw DataError("malformed row at line " + std::to_string(line_no));
        Vec row(feat_cols.size());
        for (std::size_t k = 0; k < feat_cols.size(); ++k)
            row[k] = detail::parse_number(cells[feat_cols[k]], line_no);
        y.push_back(detail::parse_number(cells[static_cast<std::size_t>(y_col)], line_no));
        if (delta_col >= 0) {
            const double d = detail::parse_number(cells[static_cast<std::size_t>(delta_col)], line_no);
            if (d != 0.0 && d != 1.0)
                throw DataError("delta must be 0 or 1 at line " + std::to_string(line_no));
            delta.push_back(static_cast<int>(d));
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw DataError("no data rows in " + path);

    Dataset ds;
    ds.X = Matrix(rows.size(), feat_cols.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < feat_cols.size(); ++j) ds.X(i, j) = rows[i][j];
    ds.y = std::move(y);
    if (delta_col >= 0) ds.delta = std::move(delta);
    ds.names = std::move(names);
    ds.validate();
    return ds;
}

inline Dataset take_rows(const Dataset& ds, const std::vector<int>& idx) {
    Dataset out;
    out.X = Matrix(idx.size(), ds.p());
    out.y.resize(idx.size());
    if (ds.delta) out.delta = std::vector<int>(idx.size());
    out.names = ds.names;
    for (std::size_t k = 0; k < idx.size(); ++k) {
        const auto i = static_cast<std::size_t>(idx[k]);
        for (std::size_t j = 0; j < ds.p(); ++j) out.X(k, j) = ds.X(i, j);
        out.y[k] = ds.y[i];
        if (ds.delta) (*out.delta)[k] = (*ds.delta)[i];
    }
    if (ds.truth) {
        TruthInfo t;
        t.important = ds.truth->important;
        t.model = ds.truth->model;
        if (!ds.truth->fstar.empty()) {
            t.fstar.resize(idx.size());
            for (std::size_t k = 0; k < idx.size(); ++k)
                t.fstar[k] = ds.truth->fstar[static_cast<std::size_t>(idx[k])];
        }
        out.truth = std::move(t);
    }
    return out;
}

struct SplitResult {
    Dataset train, valid, test;
};

// Seeded permutation split with floor sizes; the remainder goes to train.
inline SplitResult split(const Dataset& ds, double train_frac, double valid_frac, double test_frac,
                         std::uint64_t seed) {
    if (!(train_frac > 0.0 && valid_frac > 0.0 && test_frac > 0.0))
        throw ConfigError("split fractions must be positive");
    if (std::abs(train_frac + valid_frac + test_frac - 1.0) > 1e-9)
        throw ConfigError("split fractions must sum to 1");
    const auto n = static_cast<int>(ds.n());
    const int n_valid = static_cast<int>(std::floor(n * valid_frac));
    const int n_test = static_cast<int>(std::floor(n * test_frac));
    const int n_train = n - n_valid - n_test;
    if (n_train <= 0 || n_valid <= 0 || n_test <= 0) throw DataError("split produced an empty part");

    std::vector<int> perm(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
    Rng rng(seed);
    rng.shuffle(perm);

    SplitResult out;
    out.train = take_rows(ds, {perm.begin(), perm.begin() + n_train});
    out.valid = take_rows(ds, {perm.begin() + n_train, perm.begin() + n_train + n_valid});
    out.test = take_rows(ds, {perm.begin() + n_train + n_valid, perm.end()});
    return out;
}

// Column transform fitted on the training split only. Constant columns are
// centered and left at scale 1.
struct Standardizer {
    Vec mean;
    Vec scale;

    static Standardizer fit(const Dataset& train) {
        if (train.n() == 0) throw DataError("cannot standardize an empty dataset");
        const std::size_t n = train.n(), p = train.p();
        Standardizer s;
        s.mean.assign(p, 0.0);
        s.scale.assign(p, 1.0);
        for (std::size_t j = 0; j < p; ++j) {
            double m = 0.0;
            for (std::size_t i = 0; i < n; ++i) m += train.X(i, j);
            m /= static_cast<double>(n);
            double v = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double d = train.X(i, j) - m;
                v += d * d;
            }
            const double sd = std::sqrt(v / static_cast<double>(n));
            s.mean[j] = m;
            s.scale[j] = sd > 0.0 ? sd : 1.0;
        }
        return s;
    }

    void apply(Dataset& ds) const {
        if (ds.p() != mean.size()) throw DataError("standardizer dimension mismatch");
        for (std::size_t i = 0; i < ds.n(); ++i)
            for (std::size_t j = 0; j < ds.p(); ++j)
                ds.X(i, j) = (ds.X(i, j) - mean[j]) / scale[j];
    }

    void apply(Matrix& X) const {
        if (X.cols() != mean.size()) throw DataError("standardizer dimension mismatch");
        for (std::size_t i = 0; i < X.rows(); ++i)
            for (std::size_t j = 0; j < X.cols(); ++j) X(i, j) = (X(i, j) - mean[j]) / scale[j];
    }
};

}  // namespace deepmrc
