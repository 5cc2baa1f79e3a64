// Copyright (C) 2026 scalereg developers
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "scalereg/dataset.hpp"
#include "scalereg/noise_family.hpp"

namespace scalereg {

struct FitResult {
    Eigen::VectorXd beta_hat;
    /// Joint scale MLE; empty for the OLSE (which carries residual_sd instead).
    std::optional<double> s_hat;
    /// OLSE scale proxy: residual standard deviation with divisor n - d.
    std::optional<double> residual_sd;
    /// Maximized conditional log-likelihood (MLE only; NaN for OLSE).
    double loglik = 0.0;
    bool converged = false;
    /// Total BFGS iterations; for families with a singular score this spans
    /// the clamp-continuation stages plus the exact polish.
    int iterations = 0;
    double gradient_norm = 0.0;
    /// (d+1)x(d+1) for the MLE (beta block then scale), d x d for the OLSE.
    /// Empty when gamma lies outside the Fisher-information domain.
    Eigen::MatrixXd asymptotic_cov;
};

struct OptimizerSettings {
    /// Converged when ||grad||_inf <= gradient_tolerance * (1 + |objective|).
    double gradient_tolerance = 1e-8;
    /// Iteration cap per optimization stage.
    int max_iterations = 500;
    int max_step_halvings = 40;
    double armijo_c1 = 1e-4;
    /// When set, receives the objective value at every accepted iterate
    /// (starting point included).
    std::vector<double>* objective_trace = nullptr;
};

/// Least squares through a QR factorization (never an explicit inverse).
FitResult ols_fit(const Dataset& data);

/// Negative conditional log-likelihood  n log s - sum_i log f((y_i - b'x_i)/s),
/// parameterized in log s so the domain is all of R^(d+1).
double negative_loglik(const Dataset& data, const NoiseFamily& fam,
                       const Eigen::VectorXd& beta, double log_s);

/// Analytic gradient of negative_loglik in (beta, log s); length d + 1.
Eigen::VectorXd negative_loglik_gradient(const Dataset& data, const NoiseFamily& fam,
                                         const Eigen::VectorXd& beta, double log_s);

/// Joint MLE of (beta, s) by BFGS with Armijo backtracking, initialized at
/// the OLSE and its residual standard deviation. Non-convergence is reported
/// through the result, not an exception; degenerate data (an exact linear
/// fit, where the likelihood is unbounded) throws DegenerateDataError.
FitResult mle_fit(const Dataset& data, const NoiseFamily& fam,
                  const OptimizerSettings& options = {});

/// Data-dependent compact region that contains at least one likelihood
/// maximizer: ||beta|| <= r0 and s between sigma0 and sigma1. A diagnostic,
/// never an optimizer constraint.
struct FeasibleRegion {
    double r0 = 0.0;
    double sigma0 = 0.0;
    double sigma1 = 0.0;
    double alpha = 0.0;   // tail exponent used
    double tail_c = 0.0;  // f(t) <= tail_C * exp(-tail_c |t|^alpha)
    double tail_C = 0.0;

    double s_lo() const { return std::min(sigma0, sigma1); }
    double s_hi() const { return std::max(sigma0, sigma1); }
    bool contains(const Eigen::VectorXd& beta, double s) const {
        return beta.norm() <= r0 && s >= s_lo() && s <= s_hi();
    }
};

/// Tail exponent required by the family: gamma for families 1 and 3, 1 for
/// family 2.
double default_tail_exponent(const NoiseFamily& fam);

FeasibleRegion feasible_region(const Dataset& data, const NoiseFamily& fam, double alpha,
                               const Eigen::VectorXd& reference_beta, double reference_s);

/// Convenience overload: default tail exponent and the OLSE initialization
/// as the reference point.
FeasibleRegion feasible_region(const Dataset& data, const NoiseFamily& fam);

}  // namespace scalereg
