// Rank-correlation objectives (exact, smoothed, censored), the minibatch
// training gradient built on a frozen prediction cache, pointwise baseline
// losses, and the group penalty on first-layer columns.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "deepmrc/core.hpp"
#include "deepmrc/network.hpp"
#include "deepmrc/surrogate.hpp"

namespace deepmrc {

namespace detail {

class Fenwick {
  public:
    explicit Fenwick(std::size_t n) : tree_(n + 1, 0) {}
    void add(std::size_t pos) {  // pos is 1-based
        for (; pos < tree_.size(); pos += pos & (~pos + 1)) ++tree_[pos];
    }
    std::uint64_t prefix(std::size_t pos) const {  // count of inserted ranks <= pos
        std::uint64_t s = 0;
        for (; pos > 0; pos -= pos & (~pos + 1)) s += tree_[pos];
        return s;
    }

  private:
    std::vector<std::uint64_t> tree_;
};

inline std::vector<std::size_t> dense_ranks(const Vec& v) {
    std::vector<std::size_t> order(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<std::size_t> rank(v.size());
    std::size_t r = 0;
    for (std::size_t k = 0; k < order.size(); ++k) {
        if (k == 0 || v[order[k]] != v[order[k - 1]]) ++r;
        rank[order[k]] = r;
    }
    return rank;
}

}  // namespace detail

// Number of ordered pairs (i, j) with y_i > y_j and f_i > f_j, both strict.
// Counted in O(n log n): samples are swept in ascending-y groups and a Fenwick
// tree counts previously inserted (strictly smaller y) entries with smaller f.
// `insertable` restricts which samples may act as the smaller-y comparator j.
inline std::uint64_t concordant_pair_count(const Vec& y, const Vec& f,
                                           const std::vector<int>* insertable = nullptr) {
    const std::size_t n = y.size();
    if (f.size() != n) throw DataError("y/f length mismatch");
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return y[a] < y[b]; });
    const auto frank = detail::dense_ranks(f);

    detail::Fenwick tree(n);
    std::uint64_t total = 0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && y[order[j]] == y[order[i]]) ++j;
        for (std::size_t k = i; k < j; ++k) total += tree.prefix(frank[order[k]] - 1);
        for (std::size_t k = i; k < j; ++k)
            if (insertable == nullptr || (*insertable)[order[k]] != 0) tree.add(frank[order[k]]);
        i = j;
    }
    return total;
}

// U_n of the exact rank objective; lies in [0, 1/2].
inline double exact_rank_objective(const Vec& y, const Vec& f) {
    const std::size_t n = y.size();
    if (n < 2) throw DataError("rank objective needs at least two samples");
    const auto count = concordant_pair_count(y, f);
    return static_cast<double>(count) / (static_cast<double>(n) * static_cast<double>(n - 1));
}

// Censored variant: only pairs whose smaller-y member is uncensored count.
inline double censored_rank_objective(const Vec& y, const std::vector<int>& delta, const Vec& f) {
    const std::size_t n = y.size();
    if (delta.size() != n) throw DataError("delta length mismatch");
    if (n < 2) throw DataError("rank objective needs at least two samples");
    const auto count = concordant_pair_count(y, f, &delta);
    return static_cast<double>(count) / (static_cast<double>(n) * static_cast<double>(n - 1));
}

// Smoothed objective of the full sample; O(n^2), intended for evaluation and
// small-n testing rather than the training loop.
inline double smoothed_rank_objective(const Vec& y, const Vec& f, const Surrogate& s,
                                      const std::vector<int>* delta = nullptr) {
    const std::size_t n = y.size();
    if (f.size() != n) throw DataError("y/f length mismatch");
    if (delta != nullptr && delta->size() != n) throw DataError("delta length mismatch");
    if (n < 2) throw DataError("rank objective needs at least two samples");
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j || !(y[i] > y[j])) continue;
            if (delta != nullptr && (*delta)[j] == 0) continue;
            total += s.eval(f[i] - f[j]);
        }
    return total / (static_cast<double>(n) * static_cast<double>(n - 1));
}

struct MinibatchGradient {
    double value = 0.0;
    Vec dloss_dbatch;
};

// Batch objective of the training loop and its gradient with respect to the
// batch scores. Comparator scores come from the frozen previous-epoch cache
// and are treated as constants. Pairs with tied y contribute the constant
// S(0) = 1/2 to the value and nothing to the gradient. Under censoring a pair
// counts only if its smaller-y member is uncensored.
inline MinibatchGradient minibatch_rank_gradient(const std::vector<int>& batch_idx, const Vec& y_all,
                                                 const Vec& f_batch, const Vec& f_cache,
                                                 const Surrogate& s,
                                                 const std::vector<int>* delta = nullptr) {
    const std::size_t n = y_all.size();
    const std::size_t m = batch_idx.size();
    if (f_batch.size() != m) throw DataError("batch score length mismatch");
    if (f_cache.size() != n) throw DataError("prediction cache length mismatch");
    if (delta != nullptr && delta->size() != n) throw DataError("delta length mismatch");
    if (s.kind == SurrogateKind::Exact) throw NumericError("non-differentiable surrogate");

    const double norm = 1.0 / (2.0 * static_cast<double>(m) * static_cast<double>(n - 1));
    MinibatchGradient out;
    out.dloss_dbatch.assign(m, 0.0);
    for (std::size_t bi = 0; bi < m; ++bi) {
        const int i = batch_idx[bi];
        if (i < 0 || static_cast<std::size_t>(i) >= n) throw DataError("batch index out of range");
        const double yi = y_all[static_cast<std::size_t>(i)];
        const double fi = f_batch[bi];
        double value = 0.0;
        double grad = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double yj = y_all[j];
            if (yi == yj) {
                if (delta == nullptr) value += 0.5;  // S(0), constant in f
                continue;
            }
            const double sgn = yi > yj ? 1.0 : -1.0;
            if (delta != nullptr) {
                const int d = sgn > 0.0 ? (*delta)[j] : (*delta)[static_cast<std::size_t>(i)];
                if (d == 0) continue;
            }
            const double u = sgn * (fi - f_cache[j]);
            value += s.eval(u);
            grad += sgn * s.grad(u);
        }
        out.value += value;
        out.dloss_dbatch[bi] = grad * norm;
    }
    out.value *= norm;
    return out;
}

enum class BaselineKind { LSE, LAD, Huber, Cauchy };

struct BaselineLossSpec {
    BaselineKind kind = BaselineKind::LSE;
    double iota = 1.0;  // Huber/Cauchy scale

    static double default_iota(BaselineKind k) { return k == BaselineKind::Huber ? 1.345 : 1.0; }
};

struct BaselineLoss {
    double value = 0.0;
    Vec dloss_df;
};

// Mean pointwise loss and its gradient in f. LAD and Huber use subgradient 0
// at a zero residual.
inline BaselineLoss baseline_loss(const BaselineLossSpec& spec, const Vec& y, const Vec& f) {
    const std::size_t n = y.size();
    if (f.size() != n) throw DataError("y/f length mismatch");
    BaselineLoss out;
    out.dloss_df.assign(n, 0.0);
    const double inv_n = 1.0 / static_cast<double>(n);
    const double iota = spec.iota;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = f[i] - y[i];
        switch (spec.kind) {
            case BaselineKind::LSE:
                out.value += r * r;
                out.dloss_df[i] = 2.0 * r * inv_n;
                break;
            case BaselineKind::LAD:
                out.value += std::abs(r);
                out.dloss_df[i] = (r > 0.0 ? 1.0 : (r < 0.0 ? -1.0 : 0.0)) * inv_n;
                break;
            case BaselineKind::Cauchy: {
                const double q = iota * iota * r * r;
                out.value += std::log1p(q);
                out.dloss_df[i] = 2.0 * iota * iota * r / (1.0 + q) * inv_n;
                break;
            }
            case BaselineKind::Huber:
                if (std::abs(r) < iota) {
                    out.value += 0.5 * r * r;
                    out.dloss_df[i] = r * inv_n;
                } else {
                    out.value += iota * std::abs(r) - 0.5 * iota * iota;
                    out.dloss_df[i] = iota * (r > 0.0 ? 1.0 : -1.0) * inv_n;
                }
                break;
        }
    }
    out.value *= inv_n;
    return out;
}

inline BaselineKind parse_baseline_kind(const std::string& name) {
    if (name == "lse") return BaselineKind::LSE;
    if (name == "lad") return BaselineKind::LAD;
    if (name == "huber") return BaselineKind::Huber;
    if (name == "cauchy") return BaselineKind::Cauchy;
    throw ConfigError("unknown baseline loss: " + name);
}

// lambda * sum_q ||W_{0,q}||_2.
inline double group_penalty_value(const NetworkParams& params, double lambda) {
    if (lambda == 0.0) return 0.0;
    double s = 0.0;
    for (double v : first_layer_norms(params)) s += v;
    return lambda * s;
}

}  // namespace deepmrc
