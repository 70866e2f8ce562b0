// Seeded random draws with fully specified transforms, so that every
// generated dataset and every training run is reproducible bit for bit.
#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "deepmrc/core.hpp"

namespace deepmrc {

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Uniform on [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Uniform on (0, 1]; safe as a log argument.
    double uniform_pos() { return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Box-Muller; two uniforms consumed per draw.
    double normal() {
        const double u1 = uniform_pos();
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    // Inverse CDF of the standard Cauchy.
    double cauchy() { return std::tan(std::numbers::pi * (uniform01() - 0.5)); }

    // Chi-squared via -2 sum(log u) for the even part plus a squared normal if odd.
    double chisq(int dof) {
        double v = 0.0;
        for (int i = 0; i < dof / 2; ++i) v += -2.0 * std::log(uniform_pos());
        if (dof % 2 == 1) {
            const double z = normal();
            v += z * z;
        }
        return v;
    }

    // Integer in [0, n); used by shuffles. n must be positive.
    std::uint64_t below(std::uint64_t n) { return engine_() % n; }

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

  private:
    std::mt19937_64 engine_;
};

}  // namespace deepmrc
