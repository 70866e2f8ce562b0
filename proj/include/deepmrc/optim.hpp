// Adam with decoupled weight decay, the stepped learning-rate schedule,
// early-stopping bookkeeping, and the group-lasso proximal map that produces
// exact zero first-layer columns.
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

#include "deepmrc/core.hpp"
#include "deepmrc/network.hpp"

namespace deepmrc {

struct OptimizerConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double weight_decay = 1e-4;
    double lr_decay_factor = 0.5;
    int lr_decay_every = 50;  // epochs
    int patience = 20;        // early-stopping epochs

    void validate() const {
        if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
        if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0))
            throw ConfigError("beta1/beta2 must lie in (0, 1)");
        if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
        if (weight_decay < 0.0) throw ConfigError("weight_decay must be nonnegative");
        if (!(lr_decay_factor > 0.0 && lr_decay_factor <= 1.0))
            throw ConfigError("lr_decay_factor must lie in (0, 1]");
        if (lr_decay_every <= 0) throw ConfigError("lr_decay_every must be positive");
        if (patience <= 0) throw ConfigError("patience must be positive");
    }

    // Learning rate in effect after `completed` full epochs.
    double lr_after_epochs(int completed) const {
        return learning_rate * std::pow(lr_decay_factor, completed / lr_decay_every);
    }
};

struct OptimizerState {
    NetworkGradients first_moment;
    NetworkGradients second_moment;
    long step_count = 0;
    double current_lr = 0.0;

    static OptimizerState create(const NetworkParams& params, const OptimizerConfig& cfg) {
        OptimizerState st;
        st.first_moment = zeros_like(params);
        st.second_moment = zeros_like(params);
        st.current_lr = cfg.learning_rate;
        return st;
    }
};

namespace detail {

inline void adam_update_span(std::span<double> p, std::span<const double> g, std::span<double> m,
                             std::span<double> v, const OptimizerConfig& cfg, double lr, double corr1,
                             double corr2, bool decay) {
    const double wd = decay ? 1.0 - lr * cfg.weight_decay : 1.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        p[k] *= wd;
        m[k] = cfg.beta1 * m[k] + (1.0 - cfg.beta1) * g[k];
        v[k] = cfg.beta2 * v[k] + (1.0 - cfg.beta2) * g[k] * g[k];
        const double mhat = m[k] / corr1;
        const double vhat = v[k] / corr2;
        p[k] -= lr * mhat / (std::sqrt(vhat) + cfg.epsilon);
    }
}

}  // namespace detail

// One descent step: decoupled weight decay, then the bias-corrected Adam
// update. Rank objectives are maximized by negating their gradient before the
// call. When `skip_decay_first_layer` is set (a group penalty is active) the
// first-layer weights are exempt from weight decay so selection columns are
// not penalized twice.
inline void adam_step(NetworkParams& params, const NetworkGradients& grads, OptimizerState& state,
                      const OptimizerConfig& cfg, bool skip_decay_first_layer = false) {
    if (!same_shape(params, grads)) throw DataError("gradient shape mismatch");
    ++state.step_count;
    const double corr1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step_count));
    const double corr2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step_count));
    const double lr = state.current_lr;
    for (std::size_t l = 0; l < params.weights.size(); ++l) {
        const bool decay_weights = !(skip_decay_first_layer && l == 0);
        detail::adam_update_span(std::span<double>(params.weights[l].data()),
                                 std::span<const double>(grads.weights[l].data()),
                                 std::span<double>(state.first_moment.weights[l].data()),
                                 std::span<double>(state.second_moment.weights[l].data()), cfg, lr,
                                 corr1, corr2, decay_weights);
        detail::adam_update_span(std::span<double>(params.biases[l]),
                                 std::span<const double>(grads.biases[l]),
                                 std::span<double>(state.first_moment.biases[l]),
                                 std::span<double>(state.second_moment.biases[l]), cfg, lr, corr1,
                                 corr2, false);
    }
}

// Block soft-thresholding of first-layer columns:
//   W_{0,q} <- max(0, 1 - step*lambda/||W_{0,q}||) * W_{0,q}.
// The exact minimizer of (1/2)||w - w0||^2 + step*lambda*||w|| per column, so
// a thresholded column is exactly the zero vector.
inline void group_prox(NetworkParams& params, double lambda, double step) {
    if (lambda == 0.0) return;
    if (lambda < 0.0 || step <= 0.0) throw ConfigError("group_prox needs lambda >= 0 and step > 0");
    Matrix& w0 = params.weights.front();
    const double threshold = step * lambda;
    for (std::size_t q = 0; q < w0.cols(); ++q) {
        double norm2 = 0.0;
        for (std::size_t r = 0; r < w0.rows(); ++r) norm2 += w0(r, q) * w0(r, q);
        const double norm = std::sqrt(norm2);
        const double factor = norm <= threshold ? 0.0 : 1.0 - threshold / norm;
        for (std::size_t r = 0; r < w0.rows(); ++r) w0(r, q) *= factor;
    }
}

// Validation scores are "higher is better"; an equal score counts as
// non-improvement.
struct EarlyStopper {
    int patience;
    double best_score = -std::numeric_limits<double>::infinity();
    int best_epoch = 0;
    int epochs_since_best = 0;

    explicit EarlyStopper(int patience_epochs) : patience(patience_epochs) {}

    // Returns true when training should stop after this epoch.
    bool update(double score, int epoch) {
        if (score > best_score) {
            best_score = score;
            best_epoch = epoch;
            epochs_since_best = 0;
        } else {
            ++epochs_since_best;
        }
        return epochs_since_best >= patience;
    }

    bool improved(int epoch) const { return best_epoch == epoch; }
};

}  // namespace deepmrc
