// Smooth approximations of the step indicator I(u > 0) used inside the
// pairwise rank objectives, plus their derivatives.
#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include "deepmrc/core.hpp"

namespace deepmrc {

enum class SurrogateKind { DReLU, Sigmoid, GaussCDF, Exact };

struct Surrogate {
    SurrogateKind kind = SurrogateKind::DReLU;
    double omega = 0.5;  // bandwidth; ignored by Exact

    void validate() const {
        if (kind != SurrogateKind::Exact && !(omega > 0.0))
            throw ConfigError("surrogate bandwidth must be positive");
    }

    // Value in [0, 1].
    double eval(double u) const {
        switch (kind) {
            case SurrogateKind::DReLU: {
                // relu(u/w + 1/2) - relu(u/w - 1/2): a ramp from 0 to 1 over [-w/2, w/2].
                const double t = u / omega + 0.5;
                return t <= 0.0 ? 0.0 : (t >= 1.0 ? 1.0 : t);
            }
            case SurrogateKind::Sigmoid:
                return 1.0 / (1.0 + std::exp(-u / omega));
            case SurrogateKind::GaussCDF:
                return 0.5 * std::erfc(-(u / omega) / std::numbers::sqrt2);
            case SurrogateKind::Exact:
                return u > 0.0 ? 1.0 : 0.0;
        }
        return 0.0;
    }

    // d eval / du; zero exactly on the flat pieces of the DReLU ramp.
    double grad(double u) const {
        switch (kind) {
            case SurrogateKind::DReLU:
                return std::abs(u) < 0.5 * omega ? 1.0 / omega : 0.0;
            case SurrogateKind::Sigmoid: {
                const double e = eval(u);
                return e * (1.0 - e) / omega;
            }
            case SurrogateKind::GaussCDF: {
                const double t = u / omega;
                return std::exp(-0.5 * t * t) / (omega * std::sqrt(2.0 * std::numbers::pi));
            }
            case SurrogateKind::Exact:
                throw NumericError("non-differentiable surrogate");
        }
        return 0.0;
    }
};

inline SurrogateKind parse_surrogate_kind(const std::string& name) {
    if (name == "drelu") return SurrogateKind::DReLU;
    if (name == "sigmoid") return SurrogateKind::Sigmoid;
    if (name == "gausscdf") return SurrogateKind::GaussCDF;
    if (name == "exact") return SurrogateKind::Exact;
    throw ConfigError("unknown surrogate kind: " + name);
}

inline std::string surrogate_kind_name(SurrogateKind k) {
    switch (k) {
        case SurrogateKind::DReLU: return "drelu";
        case SurrogateKind::Sigmoid: return "sigmoid";
        case SurrogateKind::GaussCDF: return "gausscdf";
        case SurrogateKind::Exact: return "exact";
    }
    return "?";
}

}  // namespace deepmrc
