// Dense feedforward ReLU network with a scalar output: deterministic forward
// evaluation, inverted-dropout training forward, and reverse-mode gradients.
#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "deepmrc/core.hpp"
#include "deepmrc/rng.hpp"

namespace deepmrc {

struct NetworkArchitecture {
    int input_dim = 0;
    std::vector<int> hidden_widths;  // empty means a plain linear model
    double dropout_rate = 0.0;

    int depth() const { return static_cast<int>(hidden_widths.size()); }

    // Layer widths including input and the scalar output.
    std::vector<int> layer_dims() const {
        std::vector<int> dims;
        dims.push_back(input_dim);
        for (int w : hidden_widths) dims.push_back(w);
        dims.push_back(1);
        return dims;
    }

    void validate() const {
        if (input_dim <= 0) throw ConfigError("input_dim must be positive");
        for (int w : hidden_widths)
            if (w <= 0) throw ConfigError("hidden widths must be positive");
        if (dropout_rate < 0.0 || dropout_rate >= 1.0)
            throw ConfigError("dropout_rate must lie in [0, 1)");
    }
};

struct NetworkParams {
    std::vector<Matrix> weights;  // weights[i] has shape dims[i+1] x dims[i]
    std::vector<Vec> biases;      // biases[i] has length dims[i+1]

    friend bool operator==(const NetworkParams&, const NetworkParams&) = default;
};

using NetworkGradients = NetworkParams;

inline bool same_shape(const NetworkParams& a, const NetworkParams& b) {
    if (a.weights.size() != b.weights.size()) return false;
    for (std::size_t i = 0; i < a.weights.size(); ++i) {
        if (a.weights[i].rows() != b.weights[i].rows()) return false;
        if (a.weights[i].cols() != b.weights[i].cols()) return false;
        if (a.biases[i].size() != b.biases[i].size()) return false;
    }
    return true;
}

inline NetworkParams zeros_like(const NetworkParams& p) {
    NetworkParams z;
    z.weights.reserve(p.weights.size());
    z.biases.reserve(p.biases.size());
    for (const auto& w : p.weights) z.weights.emplace_back(w.rows(), w.cols(), 0.0);
    for (const auto& b : p.biases) z.biases.emplace_back(b.size(), 0.0);
    return z;
}

// Weights uniform on +-sqrt(6/fan_in), biases zero.
inline NetworkParams init_params(const NetworkArchitecture& arch, std::uint64_t seed) {
    arch.validate();
    const auto dims = arch.layer_dims();
    Rng rng(seed);
    NetworkParams params;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        const auto rows = static_cast<std::size_t>(dims[l + 1]);
        const auto cols = static_cast<std::size_t>(dims[l]);
        Matrix w(rows, cols);
        const double bound = std::sqrt(6.0 / static_cast<double>(cols));
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < cols; ++c) w(r, c) = rng.uniform(-bound, bound);
        params.weights.push_back(std::move(w));
        params.biases.emplace_back(rows, 0.0);
    }
    return params;
}

// Single-sample evaluation-mode forward pass.
inline double forward(const NetworkParams& params, std::span<const double> x) {
    if (params.weights.empty()) throw DataError("uninitialized network");
    if (x.size() != params.weights.front().cols()) throw DataError("input dimension mismatch");
    Vec cur(x.begin(), x.end());
    const std::size_t nlayers = params.weights.size();
    for (std::size_t l = 0; l < nlayers; ++l) {
        const Matrix& w = params.weights[l];
        Vec next(w.rows());
        for (std::size_t r = 0; r < w.rows(); ++r) {
            double s = params.biases[l][r] + dot(w.row(r), cur);
            if (l + 1 < nlayers) s = s > 0.0 ? s : 0.0;
            next[r] = s;
        }
        cur = std::move(next);
    }
    return cur[0];
}

struct ForwardMode {
    bool train = false;
    std::uint64_t dropout_seed = 0;

    static ForwardMode eval() { return {}; }
    static ForwardMode training(std::uint64_t dropout_seed) { return {true, dropout_seed}; }
};

// Activations retained by forward_batch for the matching backward call.
struct ForwardTrace {
    Matrix input;                    // n x p
    std::vector<Matrix> pre;         // pre-activation per hidden layer, n x width
    std::vector<Matrix> act;         // post ReLU (and dropout) per hidden layer
    std::vector<Matrix> mask_scale;  // inverted-dropout factors; empty in eval mode
    Vec outputs;                     // n
};

// Row-wise forward over a batch. Train mode applies inverted dropout to hidden
// activations only: surviving units are scaled by 1/(1-rate) so that the mask
// expectation matches the eval-mode activation.
inline ForwardTrace forward_batch(const NetworkParams& params, const NetworkArchitecture& arch,
                                  const Matrix& X, const ForwardMode& mode) {
    if (X.cols() != static_cast<std::size_t>(arch.input_dim)) throw DataError("input dimension mismatch");
    if (params.weights.size() != arch.hidden_widths.size() + 1) throw DataError("params do not match architecture");

    const std::size_t n = X.rows();
    const std::size_t nhidden = arch.hidden_widths.size();
    const bool dropping = mode.train && arch.dropout_rate > 0.0;
    Rng drop_rng(mode.dropout_seed);

    ForwardTrace trace;
    trace.input = X;
    trace.pre.reserve(nhidden);
    trace.act.reserve(nhidden);

    const Matrix* cur = &X;
    for (std::size_t l = 0; l < nhidden; ++l) {
        const Matrix& w = params.weights[l];
        Matrix z(n, w.rows());
        for (std::size_t i = 0; i < n; ++i) {
            auto xin = cur->row(i);
            for (std::size_t r = 0; r < w.rows(); ++r)
                z(i, r) = params.biases[l][r] + dot(w.row(r), xin);
        }
        Matrix a(n, w.rows());
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t r = 0; r < w.rows(); ++r) a(i, r) = z(i, r) > 0.0 ? z(i, r) : 0.0;
        if (dropping) {
            const double keep = 1.0 - arch.dropout_rate;
            Matrix scale(n, w.rows());
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t r = 0; r < w.rows(); ++r)
                    scale(i, r) = drop_rng.uniform01() < keep ? 1.0 / keep : 0.0;
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t r = 0; r < w.rows(); ++r) a(i, r) *= scale(i, r);
            trace.mask_scale.push_back(std::move(scale));
        }
        trace.pre.push_back(std::move(z));
        trace.act.push_back(std::move(a));
        cur = &trace.act.back();
    }

    const Matrix& wout = params.weights.back();
    trace.outputs.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        trace.outputs[i] = params.biases.back()[0] + dot(wout.row(0), cur->row(i));
    return trace;
}

// Reverse accumulation of dL/dW_i, dL/db_i given dL/df per batch row.
// The ReLU derivative is taken as 0 at exactly 0.
inline NetworkGradients backward(const NetworkParams& params, const ForwardTrace& trace,
                                 const Vec& dloss_dout) {
    const std::size_t n = trace.outputs.size();
    if (dloss_dout.size() != n) throw DataError("gradient length does not match trace");
    const std::size_t nhidden = trace.pre.size();
    if (params.weights.size() != nhidden + 1) throw DataError("stale activation trace for these params");
    for (std::size_t l = 0; l < nhidden; ++l)
        if (trace.pre[l].cols() != params.weights[l].rows())
            throw DataError("stale activation trace for these params");
    if (trace.input.cols() != params.weights.front().cols())
        throw DataError("stale activation trace for these params");

    NetworkGradients grads = zeros_like(params);

    // Output layer.
    const Matrix& last_act = nhidden == 0 ? trace.input : trace.act.back();
    Matrix& gw_out = grads.weights.back();
    double gb_out = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double g = dloss_dout[i];
        gb_out += g;
        auto a = last_act.row(i);
        for (std::size_t c = 0; c < gw_out.cols(); ++c) gw_out(0, c) += g * a[c];
    }
    grads.biases.back()[0] = gb_out;
    if (nhidden == 0) return grads;

    // delta starts as dL/d(act of last hidden layer).
    Matrix delta(n, params.weights.back().cols());
    for (std::size_t i = 0; i < n; ++i) {
        const double g = dloss_dout[i];
        for (std::size_t c = 0; c < delta.cols(); ++c) delta(i, c) = g * params.weights.back()(0, c);
    }

    for (std::size_t l = nhidden; l-- > 0;) {
        // Through dropout and ReLU to dL/d(pre-activation).
        const bool dropped = !trace.mask_scale.empty();
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t c = 0; c < delta.cols(); ++c) {
                double d = delta(i, c);
                if (dropped) d *= trace.mask_scale[l](i, c);
                delta(i, c) = trace.pre[l](i, c) > 0.0 ? d : 0.0;
            }

        const Matrix& below = l == 0 ? trace.input : trace.act[l - 1];
        Matrix& gw = grads.weights[l];
        Vec& gb = grads.biases[l];
        for (std::size_t i = 0; i < n; ++i) {
            auto a = below.row(i);
            for (std::size_t r = 0; r < gw.rows(); ++r) {
                const double d = delta(i, r);
                if (d == 0.0) continue;
                gb[r] += d;
                for (std::size_t c = 0; c < gw.cols(); ++c) gw(r, c) += d * a[c];
            }
        }

        if (l > 0) {
            const Matrix& w = params.weights[l];
            Matrix next(n, w.cols());
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t c = 0; c < w.cols(); ++c) {
                    double s = 0.0;
                    for (std::size_t r = 0; r < w.rows(); ++r) s += delta(i, r) * w(r, c);
                    next(i, c) = s;
                }
            delta = std::move(next);
        }
    }
    return grads;
}

// Euclidean norm of the first-layer column feeding each input. For a depth-0
// network the columns are the single weight entries, so the norm is |w_q|.
inline Vec first_layer_norms(const NetworkParams& params) {
    const Matrix& w0 = params.weights.front();
    Vec norms(w0.cols());
    for (std::size_t q = 0; q < w0.cols(); ++q) {
        double s = 0.0;
        for (std::size_t r = 0; r < w0.rows(); ++r) s += w0(r, q) * w0(r, q);
        norms[q] = std::sqrt(s);
    }
    return norms;
}

}  // namespace deepmrc
