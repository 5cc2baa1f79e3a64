// Copyright (C) 2026 scalereg developers
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>

namespace scalereg {

/// Tolerances for the adaptive quadrature routines.
struct QuadratureSpec {
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    int max_subdivisions = 2000;

    void validate() const;
};

struct QuadratureResult {
    double value = 0.0;
    double error_bound = 0.0;
    int subdivisions = 0;
};

/// ln Gamma(z) for z > 0. Relative error below 1e-13 over the positive axis.
double log_gamma(double z);

/// Adaptive Gauss-Kronrod integral of f over (lower, infinity).
///
/// The half line is mapped onto (0, 1) with t = u / (1 - u) before
/// subdividing, so both slowly decaying tails and integrable endpoint
/// singularities are resolved by ordinary bisection. Nodes are interior,
/// hence f is never evaluated at `lower` itself; integrands singular at 0
/// can be integrated on [eps, inf) by passing `lower = eps`.
///
/// Throws QuadratureError (carrying the best estimate and its error bound)
/// when the requested tolerance is not reached within max_subdivisions.
QuadratureResult integrate_half_line(const std::function<double(double)>& f,
                                     const QuadratureSpec& spec = {},
                                     double lower = 0.0);

/// Adaptive Gauss-Kronrod integral of f over the finite interval [a, b].
QuadratureResult integrate_finite(const std::function<double(double)>& f,
                                  double a, double b,
                                  const QuadratureSpec& spec = {});

/// Non-adaptive 15-point Gauss-Kronrod rule on [a, b]. Cheap building block
/// for cumulative integrals over many short panels (e.g. CDF tabulation).
double gauss_kronrod_panel(const std::function<double(double)>& f, double a, double b);

}  // namespace scalereg
