// Copyright (C) 2026 scalereg developers
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <utility>
#include <vector>

#include "scalereg/kernels/likelihood.hpp"
#include "scalereg/rng.hpp"

namespace scalereg {

/// One of the three standardized symmetric noise families, indexed by a
/// shape parameter gamma. All three satisfy  ∫ t^2 f(t) dt = 1, so the
/// scale parameter of ScaledNoise is the noise standard deviation.
///
///   family 1:  f(t) = d exp(-c |t|^gamma),              gamma > 0
///   family 2:  f(t) = d |t|^(gamma-1) exp(-c |t|),      gamma >= 1
///   family 3:  f(t) = d |t|^(gamma-1) exp(-c |t|^gamma), gamma >= 1
struct NoiseFamily {
    int family = 1;
    double gamma = 2.0;

    struct Constants {
        double c;
        double d;
    };

    /// Validating factory; throws DomainError on a bad (family, gamma) pair.
    static NoiseFamily make(int family, double gamma);

    void validate() const;

    /// (c_gamma, d_gamma), evaluated in log space through log_gamma.
    Constants constants() const;

    /// Standardized density at unit scale. Returns 0 where the density
    /// vanishes (t = 0 for families 2 and 3 with gamma > 1).
    double density(double t) const;

    /// (log f(t), d/dt log f(t)) at unit scale, in closed form.
    /// Throws DomainError at t = 0 for families 2 and 3 where the log
    /// density is -inf; clamping is the caller's decision.
    std::pair<double, double> log_density_and_score(double t) const;

    /// Lower gamma bound of the efficiency/Fisher domain (exclusive):
    /// 1/2 for family 1, 2 for families 2 and 3.
    double efficiency_gamma_min() const;

    /// Precomputed constants for the likelihood kernels.
    kernels::FamilyParams kernel_params() const;

    bool operator==(const NoiseFamily&) const = default;
};

/// A noise family together with its scale s: density s^-1 f(./s).
struct ScaledNoise {
    NoiseFamily base;
    double scale = 1.0;

    static ScaledNoise make(NoiseFamily base, double scale);

    double density(double t) const;
    std::pair<double, double> log_density_and_score(double t) const;

    /// Exact i.i.d. sampling:
    ///   family 1: |X| = G^(1/gamma) with G ~ Gamma(1/gamma), random sign,
    ///             then s c^(-1/gamma) X (generalized normal);
    ///   family 2: X ~ Gamma(gamma, rate c), symmetrized, scaled by s;
    ///   family 3: X ~ Weibull(gamma, scale c^(-1/gamma)), symmetrized,
    ///             scaled by s.
    std::vector<double> sample(Rng& rng, std::size_t count) const;

    double sample_one(Rng& rng) const;
};

}  // namespace scalereg
