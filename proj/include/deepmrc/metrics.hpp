// Evaluation quantities: calibrated prediction losses, Spearman correlation,
// concordance index for censored data, TOP-k selection counts, classification
// error, and mean/sd aggregation across replicates.
#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "deepmrc/core.hpp"
#include "deepmrc/loss.hpp"

namespace deepmrc {

struct PredictionLosses {
    double mse = 0.0;
    double lad = 0.0;
    double cauchy = 0.0;
    double huber = 0.0;
};

inline constexpr double kCauchyIota = 1.0;
inline constexpr double kHuberIota = 1.345;

inline PredictionLosses prediction_losses(const Vec& y, const Vec& yhat) {
    if (y.size() != yhat.size()) throw DataError("y/yhat length mismatch");
    PredictionLosses out;
    out.mse = baseline_loss({BaselineKind::LSE, 1.0}, y, yhat).value;
    out.lad = baseline_loss({BaselineKind::LAD, 1.0}, y, yhat).value;
    out.cauchy = baseline_loss({BaselineKind::Cauchy, kCauchyIota}, y, yhat).value;
    out.huber = baseline_loss({BaselineKind::Huber, kHuberIota}, y, yhat).value;
    return out;
}

// Average ranks (ties share the mean rank), 1-based.
inline Vec average_ranks(const Vec& v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    Vec ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && v[order[j]] == v[order[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + 1 + j);  // mean of ranks i+1..j
        for (std::size_t k = i; k < j; ++k) ranks[order[k]] = avg;
        i = j;
    }
    return ranks;
}

inline double pearson(const Vec& a, const Vec& b) {
    const std::size_t n = a.size();
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= static_cast<double>(n);
    mb /= static_cast<double>(n);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (saa == 0.0 || sbb == 0.0) throw DataError("zero variance in correlation");
    return sab / std::sqrt(saa * sbb);
}

inline double spearman(const Vec& y, const Vec& f) {
    if (y.size() != f.size()) throw DataError("y/f length mismatch");
    if (y.size() < 2) throw DataError("spearman needs at least two samples");
    return pearson(average_ranks(y), average_ranks(f));
}

// Harrell's concordance index. A pair is comparable when the smaller-y member
// is uncensored; tied scores receive half credit.
inline double c_index(const Vec& y, const std::vector<int>& delta, const Vec& f) {
    const std::size_t n = y.size();
    if (delta.size() != n || f.size() != n) throw DataError("length mismatch");
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        if (delta[j] != 1) continue;
        for (std::size_t i = 0; i < n; ++i) {
            if (!(y[i] > y[j])) continue;
            den += 1.0;
            if (f[i] > f[j])
                num += 1.0;
            else if (f[i] == f[j])
                num += 0.5;
        }
    }
    if (den == 0.0) throw DataError("no comparable pairs for the concordance index");
    return num / den;
}

// Count of true positives among the k indices with the largest norms; ties are
// broken toward the smaller index. `truth` holds 0-based indices.
inline int top_k(const Vec& norms, const std::vector<int>& truth, int k) {
    if (k < 0 || static_cast<std::size_t>(k) > norms.size()) throw ConfigError("invalid k for top_k");
    std::vector<int> order(norms.size());
    for (std::size_t i = 0; i < norms.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (norms[static_cast<std::size_t>(a)] != norms[static_cast<std::size_t>(b)])
            return norms[static_cast<std::size_t>(a)] > norms[static_cast<std::size_t>(b)];
        return a < b;
    });
    int hits = 0;
    for (int i = 0; i < k; ++i)
        if (std::find(truth.begin(), truth.end(), order[static_cast<std::size_t>(i)]) != truth.end())
            ++hits;
    return hits;
}

inline double classification_error(const Vec& y_binary, const Vec& scores, double threshold) {
    if (y_binary.size() != scores.size()) throw DataError("length mismatch");
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < y_binary.size(); ++i) {
        const double pred = scores[i] > threshold ? 1.0 : 0.0;
        if (pred != y_binary[i]) ++wrong;
    }
    return static_cast<double>(wrong) / static_cast<double>(y_binary.size());
}

struct MetricsReport {
    double mse = 0.0;
    double lad = 0.0;
    double cauchy = 0.0;
    double huber = 0.0;
    double rank = 0.0;  // Spearman, or C-index for censored scenarios
    bool rank_is_cindex = false;
    std::optional<int> top10;
    std::optional<int> top20;
    std::optional<double> classification_err;
    std::optional<double> censoring_fraction;
    int n_test = 0;

    std::map<std::string, double> as_values() const {
        std::map<std::string, double> v{{"mse", mse},       {"lad", lad},   {"cauchy", cauchy},
                                        {"huber", huber},   {"rank", rank}};
        if (top10) v["top10"] = *top10;
        if (top20) v["top20"] = *top20;
        if (classification_err) v["classification_error"] = *classification_err;
        if (censoring_fraction) v["censoring_fraction"] = *censoring_fraction;
        return v;
    }
};

struct MeanSd {
    double mean = 0.0;
    double sd = 0.0;
};

// Sample mean and (n-1)-denominator standard deviation per metric, over the
// metrics present in every report. A single replicate reports sd = 0.
inline std::map<std::string, MeanSd> aggregate(const std::vector<MetricsReport>& reports) {
    if (reports.empty()) throw DataError("aggregate needs at least one report");
    auto common = reports.front().as_values();
    for (const auto& r : reports) {
        const auto vals = r.as_values();
        for (auto it = common.begin(); it != common.end();)
            it = vals.count(it->first) ? std::next(it) : common.erase(it);
    }
    std::map<std::string, MeanSd> out;
    const double R = static_cast<double>(reports.size());
    for (const auto& [name, unused] : common) {
        double mean = 0.0;
        for (const auto& r : reports) mean += r.as_values().at(name);
        mean /= R;
        double ss = 0.0;
        for (const auto& r : reports) {
            const double d = r.as_values().at(name) - mean;
            ss += d * d;
        }
        out[name] = {mean, reports.size() > 1 ? std::sqrt(ss / (R - 1.0)) : 0.0};
    }
    return out;
}

}  // namespace deepmrc
