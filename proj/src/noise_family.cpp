// Copyright (C) 2026 scalereg developers
// SPDX-License-Identifier: Apache-2.0

#include "scalereg/noise_family.hpp"

#include <cmath>
#include <string>

#include "scalereg/errors.hpp"
#include "scalereg/special_math.hpp"

namespace scalereg {

NoiseFamily NoiseFamily::make(int family, double gamma) {
    NoiseFamily fam{family, gamma};
    fam.validate();
    return fam;
}

void NoiseFamily::validate() const {
    if (family < 1 || family > 3)
        throw DomainError("NoiseFamily: family index must be 1, 2 or 3, got " +
                          std::to_string(family));
    if (!std::isfinite(gamma))
        throw DomainError("NoiseFamily: gamma must be finite");
    if (family == 1) {
        if (!(gamma > 0.0))
            throw DomainError("NoiseFamily: family 1 requires gamma > 0");
    } else if (!(gamma >= 1.0)) {
        throw DomainError("NoiseFamily: families 2 and 3 require gamma >= 1");
    }
}

NoiseFamily::Constants NoiseFamily::constants() const {
    validate();
    switch (family) {
        case 1: {
            const double lg3 = log_gamma(3.0 / gamma);
            const double lg1 = log_gamma(1.0 / gamma);
            return {std::exp(0.5 * gamma * (lg3 - lg1)),
                    0.5 * gamma * std::exp(0.5 * (lg3 - 3.0 * lg1))};
        }
        case 2: {
            const double diff = log_gamma(gamma + 2.0) - log_gamma(gamma);
            return {std::exp(0.5 * diff),
                    std::exp(0.5 * gamma * diff - std::log(2.0) - log_gamma(gamma))};
        }
        default: {
            const double lg = log_gamma(2.0 / gamma + 1.0);
            const double c = std::exp(0.5 * gamma * lg);
            return {c, 0.5 * gamma * c};
        }
    }
}

double NoiseFamily::density(double t) const {
    const Constants k = constants();
    const double u = std::abs(t);
    switch (family) {
        case 1:
            return k.d * std::exp(-k.c * std::pow(u, gamma));
        case 2:
            return k.d * std::pow(u, gamma - 1.0) * std::exp(-k.c * u);
        default:
            return k.d * std::pow(u, gamma - 1.0) * std::exp(-k.c * std::pow(u, gamma));
    }
}

std::pair<double, double> NoiseFamily::log_density_and_score(double t) const {
    const Constants k = constants();
    const double u = std::abs(t);
    const double sgn = std::copysign(1.0, t);
    switch (family) {
        case 1: {
            const double pw = std::pow(u, gamma);
            return {std::log(k.d) - k.c * pw,
                    -k.c * gamma * sgn * (u == 0.0 ? std::pow(u, gamma - 1.0) : pw / u)};
        }
        case 2:
            if (t == 0.0)
                throw DomainError("log_density_and_score: family 2 is singular at t = 0");
            return {std::log(k.d) + (gamma - 1.0) * std::log(u) - k.c * u,
                    (gamma - 1.0) / t - k.c * sgn};
        default: {
            if (t == 0.0)
                throw DomainError("log_density_and_score: family 3 is singular at t = 0");
            const double pw = std::pow(u, gamma);
            return {std::log(k.d) + (gamma - 1.0) * std::log(u) - k.c * pw,
                    (gamma - 1.0) / t - k.c * gamma * sgn * (pw / u)};
        }
    }
}

double NoiseFamily::efficiency_gamma_min() const { return family == 1 ? 0.5 : 2.0; }

kernels::FamilyParams NoiseFamily::kernel_params() const {
    const Constants k = constants();
    return kernels::make_params(family, gamma, k.c, std::log(k.d));
}

ScaledNoise ScaledNoise::make(NoiseFamily base, double scale) {
    base.validate();
    if (!(scale > 0.0) || !std::isfinite(scale))
        throw DomainError("ScaledNoise: scale must be positive and finite");
    return ScaledNoise{base, scale};
}

double ScaledNoise::density(double t) const { return base.density(t / scale) / scale; }

std::pair<double, double> ScaledNoise::log_density_and_score(double t) const {
    auto [logf, score] = base.log_density_and_score(t / scale);
    return {logf - std::log(scale), score / scale};
}

double ScaledNoise::sample_one(Rng& rng) const {
    const NoiseFamily::Constants k = base.constants();
    const double g = base.gamma;
    double magnitude;
    switch (base.family) {
        case 1:
            magnitude = std::pow(k.c, -1.0 / g) * std::pow(rng.gamma(1.0 / g), 1.0 / g);
            break;
        case 2:
            magnitude = rng.gamma(g) / k.c;
            break;
        default:
            magnitude = rng.weibull(g, std::pow(k.c, -1.0 / g));
            break;
    }
    return rng.coin_flip() ? scale * magnitude : -scale * magnitude;
}

std::vector<double> ScaledNoise::sample(Rng& rng, std::size_t count) const {
    std::vector<double> out(count);
    for (double& x : out) x = sample_one(rng);
    return out;
}

}  // namespace scalereg
