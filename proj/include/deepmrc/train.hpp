// The training loop: epoch iteration over without-replacement batches, the
// previous-epoch prediction cache, validation-based early stopping and model
// selection, proximal variable selection, linear calibration, and grid tuning.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "deepmrc/core.hpp"
#include "deepmrc/data.hpp"
#include "deepmrc/loss.hpp"
#include "deepmrc/metrics.hpp"
#include "deepmrc/network.hpp"
#include "deepmrc/optim.hpp"
#include "deepmrc/surrogate.hpp"

namespace deepmrc {

enum class LossKind { Rank, Baseline };

struct TrainConfig {
    Surrogate surrogate{SurrogateKind::DReLU, 0.5};
    double lambda = 0.0;
    int batch_size = 100;
    int max_epochs = 200;
    OptimizerConfig optimizer;
    std::uint64_t seed = 0;
    LossKind loss_kind = LossKind::Rank;
    BaselineLossSpec baseline;
    bool censored = false;

    void validate() const {
        surrogate.validate();
        optimizer.validate();
        if (lambda < 0.0) throw ConfigError("lambda must be nonnegative");
        if (batch_size <= 0) throw ConfigError("batch_size must be positive");
        if (max_epochs <= 0) throw ConfigError("max_epochs must be positive");
    }
};

struct EpochRecord {
    int epoch = 0;
    double train_objective = 0.0;
    double validation_objective = 0.0;
    double learning_rate = 0.0;
    int nonzero_columns = 0;
};

struct FitResult {
    NetworkArchitecture arch;
    NetworkParams best_params;
    int best_epoch = 0;
    std::vector<EpochRecord> history;
    double calibration_slope = 0.0;
    double calibration_intercept = 0.0;
    std::vector<std::pair<int, double>> selected;  // (0-based index, column norm), norm descending
    std::optional<double> threshold;               // set when the training response is binary
};

namespace detail {

// Seed substreams of one fit; fixed tags keep runs reproducible and let tests
// replay the exact batch order the loop used.
inline constexpr std::uint64_t kInitSalt = 101;
inline constexpr std::uint64_t kShuffleSalt = 102;
inline constexpr std::uint64_t kDropoutSalt = 103;

inline std::vector<int> epoch_permutation(std::uint64_t seed, int epoch, int n) {
    std::vector<int> perm(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
    Rng rng(derive_seed(derive_seed(seed, kShuffleSalt), static_cast<std::uint64_t>(epoch)));
    rng.shuffle(perm);
    return perm;
}

inline std::uint64_t dropout_seed(std::uint64_t seed, int epoch, int batch) {
    return derive_seed(derive_seed(seed, kDropoutSalt),
                       static_cast<std::uint64_t>(epoch) * 1000003ULL + static_cast<std::uint64_t>(batch));
}

inline bool has_informative_pair(const Vec& y, const std::vector<int>* delta) {
    for (std::size_t j = 0; j < y.size(); ++j) {
        if (delta != nullptr && (*delta)[j] == 0) continue;
        for (std::size_t i = 0; i < y.size(); ++i)
            if (y[i] > y[j]) return true;
    }
    return false;
}

inline Matrix gather_rows(const Matrix& X, const std::vector<int>& idx) {
    Matrix out(idx.size(), X.cols());
    for (std::size_t k = 0; k < idx.size(); ++k) {
        const auto src = X.row(static_cast<std::size_t>(idx[k]));
        std::copy(src.begin(), src.end(), out.row(k).begin());
    }
    return out;
}

inline int count_nonzero_columns(const NetworkParams& params) {
    int count = 0;
    for (double v : first_layer_norms(params))
        if (v > 0.0) ++count;
    return count;
}

}  // namespace detail

inline Vec predict_scores(const NetworkParams& params, const Matrix& X) {
    Vec scores(X.rows());
    for (std::size_t i = 0; i < X.rows(); ++i) scores[i] = forward(params, X.row(i));
    return scores;
}

inline Vec predict_scores(const FitResult& result, const Matrix& X) {
    return predict_scores(result.best_params, X);
}

// Ordinary least squares of y on the scores: yhat = a*score + b. Degenerate
// score variance falls back to (0, mean y).
inline std::pair<double, double> calibrate_linear(const Vec& scores, const Vec& y) {
    if (scores.size() != y.size()) throw DataError("length mismatch");
    const std::size_t n = scores.size();
    if (n == 0) return {0.0, 0.0};
    double ms = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        ms += scores[i];
        my += y[i];
    }
    ms /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (scores[i] - ms) * (scores[i] - ms);
        sxy += (scores[i] - ms) * (y[i] - my);
    }
    if (sxx == 0.0) return {0.0, my};
    const double a = sxy / sxx;
    return {a, my - a * ms};
}

// Input indices with a nonzero first-layer column, sorted by descending norm
// (ties toward the smaller index).
inline std::vector<std::pair<int, double>> select_variables(const NetworkParams& params) {
    const Vec norms = first_layer_norms(params);
    std::vector<std::pair<int, double>> sel;
    for (std::size_t q = 0; q < norms.size(); ++q)
        if (norms[q] > 0.0) sel.emplace_back(static_cast<int>(q), norms[q]);
    std::sort(sel.begin(), sel.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    return sel;
}

// Threshold minimizing the training classification error, searched over the
// sorted unique score values; prediction is I(score > threshold).
inline double choose_threshold(const Vec& scores, const Vec& y_binary) {
    if (scores.size() != y_binary.size() || scores.empty()) throw DataError("bad threshold inputs");
    Vec cand = scores;
    std::sort(cand.begin(), cand.end());
    cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
    double best_t = cand.front();
    double best_err = 2.0;
    for (double t : cand) {
        const double err = classification_error(y_binary, scores, t);
        if (err < best_err) {
            best_err = err;
            best_t = t;
        }
    }
    return best_t;
}

inline bool is_binary(const Vec& y) {
    for (double v : y)
        if (v != 0.0 && v != 1.0) return false;
    return true;
}

inline FitResult fit(const Dataset& train, const Dataset& valid, const NetworkArchitecture& arch,
                     const TrainConfig& cfg) {
    cfg.validate();
    arch.validate();
    train.validate();
    valid.validate();
    const auto n = static_cast<int>(train.n());
    if (n < 2) throw DataError("need at least two training samples");
    if (valid.n() == 0) throw DataError("validation set is empty");
    if (cfg.batch_size > n) throw ConfigError("batch_size exceeds the training size");
    if (train.p() != static_cast<std::size_t>(arch.input_dim)) throw DataError("architecture/input mismatch");
    if (cfg.censored && (!train.delta || !valid.delta))
        throw DataError("censored training requires delta");

    const std::vector<int>* train_delta = cfg.censored ? &*train.delta : nullptr;
    if (cfg.loss_kind == LossKind::Rank && !detail::has_informative_pair(train.y, train_delta))
        throw DataError("no informative pairs");

    NetworkParams params = init_params(arch, derive_seed(cfg.seed, detail::kInitSalt));
    OptimizerState opt_state = OptimizerState::create(params, cfg.optimizer);

    // Algorithm step 2: prediction cache from the freshly initialized network.
    Vec cache = predict_scores(params, train.X);

    EarlyStopper stopper(cfg.optimizer.patience);
    FitResult result;
    result.arch = arch;
    NetworkParams best = params;

    const int batches = (n + cfg.batch_size - 1) / cfg.batch_size;
    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        opt_state.current_lr = cfg.optimizer.lr_after_epochs(epoch - 1);
        const auto perm = detail::epoch_permutation(cfg.seed, epoch, n);

        double epoch_objective = 0.0;
        for (int l = 0; l < batches; ++l) {
            const int lo = l * cfg.batch_size;
            const int hi = std::min(n, lo + cfg.batch_size);
            const std::vector<int> batch_idx(perm.begin() + lo, perm.begin() + hi);
            const Matrix bx = detail::gather_rows(train.X, batch_idx);

            const auto mode = arch.dropout_rate > 0.0
                                  ? ForwardMode::training(detail::dropout_seed(cfg.seed, epoch, l))
                                  : ForwardMode::eval();
            ForwardTrace trace = forward_batch(params, arch, bx, mode);

            double batch_value = 0.0;
            Vec dloss;
            if (cfg.loss_kind == LossKind::Rank) {
                auto g = minibatch_rank_gradient(batch_idx, train.y, trace.outputs, cache,
                                                 cfg.surrogate, train_delta);
                batch_value = g.value;
                dloss = std::move(g.dloss_dbatch);
                for (double& v : dloss) v = -v;  // ascend the rank objective
            } else {
                Vec by(batch_idx.size());
                for (std::size_t k = 0; k < batch_idx.size(); ++k)
                    by[k] = train.y[static_cast<std::size_t>(batch_idx[k])];
                auto g = baseline_loss(cfg.baseline, by, trace.outputs);
                batch_value = g.value;
                dloss = std::move(g.dloss_df);
            }
            if (!std::isfinite(batch_value)) throw NumericError("non-finite training objective");

            const NetworkGradients grads = backward(params, trace, dloss);
            adam_step(params, grads, opt_state, cfg.optimizer, cfg.lambda > 0.0);
            if (cfg.lambda > 0.0) group_prox(params, cfg.lambda, opt_state.current_lr);
            epoch_objective += batch_value;
        }
        epoch_objective /= static_cast<double>(batches);

        // Epoch boundary: refresh the cache, then score the validation split.
        cache = predict_scores(params, train.X);
        const Vec valid_scores = predict_scores(params, valid.X);
        const double valid_objective =
            cfg.censored ? censored_rank_objective(valid.y, *valid.delta, valid_scores)
                         : exact_rank_objective(valid.y, valid_scores);
        if (!std::isfinite(valid_objective)) throw NumericError("non-finite validation objective");

        result.history.push_back({epoch, epoch_objective, valid_objective, opt_state.current_lr,
                                  detail::count_nonzero_columns(params)});
        const bool stop = stopper.update(valid_objective, epoch);
        if (stopper.improved(epoch)) best = params;
        if (stop) break;
    }

    result.best_params = std::move(best);
    result.best_epoch = stopper.best_epoch;
    result.selected = select_variables(result.best_params);

    Vec train_scores = predict_scores(result.best_params, train.X);
    if (cfg.censored) {
        Vec s, yy;
        for (std::size_t i = 0; i < train.n(); ++i)
            if ((*train.delta)[i] == 1) {
                s.push_back(train_scores[i]);
                yy.push_back(train.y[i]);
            }
        auto [a, b] = calibrate_linear(s, yy);
        result.calibration_slope = a;
        result.calibration_intercept = b;
    } else {
        auto [a, b] = calibrate_linear(train_scores, train.y);
        result.calibration_slope = a;
        result.calibration_intercept = b;
    }
    if (is_binary(train.y)) result.threshold = choose_threshold(train_scores, train.y);
    return result;
}

struct TuneGrid {
    Vec omegas;   // empty means keep the config surrogate bandwidth
    Vec lambdas;  // empty means keep the config lambda
};

// Bandwidth grid scaled to the score spread of the initialized network, and
// the lambda grid {0} + logspace(1e-4, 1e-1, 4).
inline TuneGrid default_tune_grid(double initial_score_sd) {
    const double s = initial_score_sd > 0.0 ? initial_score_sd : 1.0;
    TuneGrid g;
    g.omegas = {1.0 * s, 0.5 * s, 0.25 * s, 0.1 * s};
    g.lambdas = {0.0, 1e-4, 1e-3, 1e-2, 1e-1};
    return g;
}

struct TuneResult {
    TrainConfig config;
    FitResult fit;
    double validation_score = 0.0;
};

// Fits every (omega, lambda) grid point and keeps the best validation score.
// Exact ties prefer the larger lambda, then the larger omega.
inline TuneResult tune(const Dataset& train, const Dataset& valid, const NetworkArchitecture& arch,
                       const TuneGrid& grid, const TrainConfig& base) {
    Vec omegas = grid.omegas.empty() ? Vec{base.surrogate.omega} : grid.omegas;
    Vec lambdas = grid.lambdas.empty() ? Vec{base.lambda} : grid.lambdas;
    if (omegas.empty() || lambdas.empty()) throw ConfigError("empty tuning grid");

    std::optional<TuneResult> best;
    for (double omega : omegas)
        for (double lambda : lambdas) {
            TrainConfig cfg = base;
            cfg.surrogate.omega = omega;
            cfg.lambda = lambda;
            FitResult fr = fit(train, valid, arch, cfg);
            double score = -std::numeric_limits<double>::infinity();
            for (const auto& rec : fr.history)
                if (rec.epoch == fr.best_epoch) score = rec.validation_objective;
            const bool better =
                !best || score > best->validation_score ||
                (score == best->validation_score &&
                 (lambda > best->config.lambda ||
                  (lambda == best->config.lambda && omega > best->config.surrogate.omega)));
            if (better) best = TuneResult{std::move(cfg), std::move(fr), score};
        }
    return std::move(*best);
}

}  // namespace deepmrc
