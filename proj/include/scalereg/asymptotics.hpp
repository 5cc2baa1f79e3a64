// Copyright (C) 2026 scalereg developers
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "scalereg/noise_family.hpp"

namespace scalereg {

/// Blocks of the Fisher information I0 = diag(c1 E[XX'], c2).
struct FisherBlocks {
    double c1 = 0.0;  // (1/s^2) int (f')^2/f
    double c2 = 0.0;  // (1/s^2) (int t^2 (f')^2/f - 1)
    Eigen::MatrixXd xxT;
};

/// Score integrals of the standardized density, computed by adaptive
/// quadrature (cached per (family, gamma)).
struct ScoreIntegrals {
    double score = 0.0;     // int (f')^2 / f
    double t2_score = 0.0;  // int t^2 (f')^2 / f
    /// Estimated mass dropped below the epsilon cutoff when the score
    /// integrand is singular at 0 (local power fit; 0 when integrated
    /// from 0).
    double truncation_bound = 0.0;
};

/// Throws EfficiencyUndefinedError outside the family's Fisher domain
/// (gamma > 1/2 for family 1, gamma > 2 for families 2-3, with a 1e-3
/// exclusion margin at the open endpoint).
ScoreIntegrals score_integrals(const NoiseFamily& fam);

/// Quadrature of the density over R (oracle; equals 1 by normalization).
double quad_density_mass(const NoiseFamily& fam);

/// Quadrature of t^2 f(t) over R (oracle; equals 1 by standardization).
double quad_second_moment(const NoiseFamily& fam);

/// Quadrature of t f'(t) over R (equals -1; Cauchy-Schwarz ingredient).
double quad_t_fprime(const NoiseFamily& fam);

FisherBlocks fisher_blocks(const NoiseFamily& fam, double s, Eigen::MatrixXd xxT);

/// Closed-form asymptotic relative efficiency of the MLE versus the OLSE,
/// evaluated in log space.
double eta_closed_form(const NoiseFamily& fam);

/// Independent efficiency value: computes both the second moment and the
/// score integral by quadrature and combines them, re-verifying
/// standardization on the way.
double eta_quadrature_oracle(const NoiseFamily& fam);

/// Efficiency by quadrature for any even standardized density supplied
/// programmatically: log_density_and_score(t) -> (log f(t), f'(t)/f(t)) for
/// t > 0. `singular` requests the epsilon cutoff used when (f')^2/f is
/// integrable-singular at 0. There is no registry behind this; it exists so
/// densities outside the three families can be analyzed ad hoc.
double eta_quadrature_generic(
    const std::function<std::pair<double, double>(double)>& log_density_and_score,
    bool singular);

struct EtaPoint {
    double gamma = 0.0;
    std::optional<double> eta_closed;
    std::optional<double> eta_quadrature;
};

struct EtaCurve {
    int family = 1;
    std::vector<EtaPoint> points;
    /// Grid point where eta is smallest, i.e. the MLE advantage largest.
    std::optional<double> argmin_gamma;
};

/// Tabulates eta over a gamma grid. Out-of-domain grid points yield rows
/// with undefined values rather than errors.
EtaCurve eta_curve(int family, const std::vector<double>& gamma_grid);

/// CSV with columns gamma,eta_closed,eta_quadrature ("nan" marks undefined).
void write_eta_curve_csv(const EtaCurve& curve, std::ostream& os);

/// I0^-1 / n in the block form of the asymptotic covariance.
Eigen::MatrixXd mle_asymptotic_cov(const FisherBlocks& blocks, std::size_t n);

struct EfficiencyReport {
    NoiseFamily family;
    double eta_closed = 0.0;
    double eta_quadrature = 0.0;
    std::optional<double> eta_empirical;
    std::size_t replications = 0;  // per-batch M behind eta_empirical
};

}  // namespace scalereg
