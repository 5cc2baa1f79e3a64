// Copyright (C) 2026 scalereg developers
// SPDX-License-Identifier: Apache-2.0

// Per-element term math shared by the scalar kernels and the tail loops of
// the SIMD kernels, so that remainders are bit-identical to the scalar path.

#pragma once

#include <cmath>

#include "scalereg/kernels/likelihood.hpp"

namespace scalereg::kernels::detail {

struct Term {
    double neg_logf;
    double psi;
};

inline double clamp_t(const FamilyParams& p, double t) {
    if (p.min_abs_t > 0.0 && std::abs(t) < p.min_abs_t)
        return std::copysign(p.min_abs_t, t);
    return t;
}

// -log f(t) for the standardized density; t already clamped.
inline double term_value(const FamilyParams& p, double t) {
    const double u = std::abs(t);
    switch (p.family) {
        case 1:
            if (p.gamma == 2.0) return 0.5 * t * t - p.log_d;
            return p.c * std::pow(u, p.gamma) - p.log_d;
        case 2:
            return p.c * u - (p.gamma - 1.0) * std::log(u) - p.log_d;
        default:
            return p.c * std::pow(u, p.gamma) - (p.gamma - 1.0) * std::log(u) - p.log_d;
    }
}

// (-log f(t), (f'/f)(t)); t already clamped.
inline Term term_score(const FamilyParams& p, double t) {
    const double u = std::abs(t);
    switch (p.family) {
        case 1: {
            if (p.gamma == 2.0) return {0.5 * t * t - p.log_d, -t};
            const double pw = std::pow(u, p.gamma);
            // u^(gamma-1): the u = 0 limit is 0 for gamma > 1 and 1 for gamma = 1
            // (gamma < 1 never reaches 0 because of the clamp).
            double pw1;
            if (u == 0.0)
                pw1 = p.gamma > 1.0 ? 0.0 : 1.0;
            else
                pw1 = pw / u;
            return {p.c * pw - p.log_d, -p.c * p.gamma * std::copysign(pw1, t)};
        }
        case 2:
            return {p.c * u - (p.gamma - 1.0) * std::log(u) - p.log_d,
                    (p.gamma - 1.0) / t - p.c * std::copysign(1.0, t)};
        default: {
            const double pw = std::pow(u, p.gamma);
            return {p.c * pw - (p.gamma - 1.0) * std::log(u) - p.log_d,
                    (p.gamma - 1.0) / t - p.c * p.gamma * std::copysign(pw / u, t)};
        }
    }
}

}  // namespace scalereg::kernels::detail
