// Test-only oracles, independent of the library implementation paths they
// check: O(n^2) pair enumeration for the rank objectives, central finite
// differences, and a 1-D numerical minimizer for the proximal objective.
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "deepmrc/core.hpp"

namespace oracle {

using deepmrc::Vec;

// U_n by literal enumeration of all ordered pairs.
inline double brute_rank_objective(const Vec& y, const Vec& f) {
    const std::size_t n = y.size();
    double count = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j && y[i] > y[j] && f[i] > f[j]) count += 1.0;
    return count / (static_cast<double>(n) * static_cast<double>(n - 1));
}

inline std::uint64_t brute_concordant_count(const Vec& y, const Vec& f,
                                            const std::vector<int>* delta = nullptr) {
    const std::size_t n = y.size();
    std::uint64_t count = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j || !(y[i] > y[j]) || !(f[i] > f[j])) continue;
            if (delta != nullptr && (*delta)[j] == 0) continue;
            ++count;
        }
    return count;
}

// Central finite difference d/dx of a scalar functional.
inline double central_diff(const std::function<double(double)>& f, double x, double h = 1e-5) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

inline double rel_err(double a, double b, double floor = 1e-6) {
    return std::abs(a - b) / std::max({floor, std::abs(a), std::abs(b)});
}

// Numerically minimize g(t) = (1/2)(t - r)^2 + tau * t over t >= 0 by ternary
// search (g is convex). For a column of norm r this is the radial reduction of
// the proximal objective: off-radial moves increase the quadratic term without
// decreasing the norm term, so the vector minimizer is (t*/r) * w0. Extended
// precision keeps the search accurate past the 1e-8 comparison tolerance.
inline double prox_radial_minimizer(double r, double tau) {
    long double lo = 0.0L, hi = static_cast<long double>(r) + static_cast<long double>(tau) + 1.0L;
    const auto g = [&](long double t) {
        return 0.5L * (t - r) * (t - r) + static_cast<long double>(tau) * t;
    };
    for (int it = 0; it < 400; ++it) {
        const long double m1 = lo + (hi - lo) / 3.0L;
        const long double m2 = hi - (hi - lo) / 3.0L;
        if (g(m1) < g(m2))
            hi = m2;
        else
            lo = m1;
    }
    return static_cast<double>(0.5L * (lo + hi));
}

}  // namespace oracle
