// Copyright (C) 2026 scalereg developers
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "scalereg/asymptotics.hpp"
#include "scalereg/dataset.hpp"
#include "scalereg/estimators.hpp"
#include "scalereg/noise_family.hpp"
#include "scalereg/rng.hpp"

namespace scalereg {

/// One Monte-Carlo batch: M replications at fixed (n, d, family, gamma) with
/// regression parameters drawn once per batch.
struct ExperimentConfig {
    std::size_t n = 1000;
    int d = 5;
    int family = 1;
    double gamma = 3.0;
    std::size_t replications = 100;  // M
    std::uint64_t seed = 0;
    std::array<double, 2> beta_range{-5.0, 5.0};
    std::array<double, 2> mu_x_range{-3.0, 3.0};
    std::array<double, 2> sigma_x_range{0.0, 2.0};
    std::array<double, 2> s0_range{1.0, 3.0};
    /// Draws of sigma_x below this floor are clamped: the nominal U[0, 2]
    /// range includes degenerate designs. Set to 0 to disable.
    double sigma_x_floor = 0.05;
    int threads = 0;  // 0 = available parallelism

    NoiseFamily noise() const { return NoiseFamily::make(family, gamma); }
    void validate() const;
    nlohmann::json to_json() const;
    static ExperimentConfig from_json(const nlohmann::json& j);
};

struct DrawnParams {
    Eigen::VectorXd beta0;
    Eigen::VectorXd mu_x;
    Eigen::VectorXd sigma_x;
    double s0 = 1.0;
    nlohmann::json to_json() const;
};

/// Draw order is fixed (beta0, mu_x, sigma_x coordinates, then s0) so a seed
/// pins the batch parameters exactly.
DrawnParams draw_parameters(const ExperimentConfig& config, Rng& rng);

/// X rows i.i.d. N(mu_x, diag(sigma_x^2)); y = X beta0 + eps with eps from
/// the scaled noise family. Degenerate designs are generated as requested;
/// the rank check happens downstream in the estimators.
Dataset generate_dataset(const ExperimentConfig& config, const DrawnParams& params,
                         Rng& rng);

struct ReplicationRecord {
    std::size_t rep_index = 0;
    Eigen::VectorXd beta_ols;
    Eigen::VectorXd beta_mle;
    double s_mle = 0.0;
    double dist_ols = 0.0;
    double dist_mle = 0.0;
    bool converged = false;
    bool failed = false;
    std::string error;
};

struct EstimatorSummary {
    double mean_dist = 0.0;
    double median_dist = 0.0;
    double q25_dist = 0.0;
    double q75_dist = 0.0;
    double mean_sq_dist = 0.0;
};

struct BatchResult {
    ExperimentConfig config;
    DrawnParams params;
    std::vector<ReplicationRecord> records;
    EstimatorSummary ols;
    EstimatorSummary mle;
    double convergence_rate = 0.0;
    std::size_t failures = 0;

    nlohmann::json summary_json() const;
};

/// Runs the M replications (in parallel when configured), with one RNG
/// stream per replication so results do not depend on scheduling. Throws
/// when more than 20% of replications fail.
BatchResult run_batch(const ExperimentConfig& config);

struct AreReport {
    EfficiencyReport efficiency;
    std::vector<double> batch_estimates;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    std::size_t batches_requested = 0;
    std::size_t batches_used = 0;
    std::vector<std::string> warnings;
};

/// B independent batches; per batch the ARE estimate
/// (det Cov(beta_mle) / det Cov(beta_ols))^(1/d) over that batch's
/// replications, then a t-interval across batches.
AreReport estimate_are(const ExperimentConfig& config, std::size_t batches);

struct SweepRow {
    int d = 0;
    double mean_sq_dist_ols = 0.0;
    double mean_sq_dist_mle = 0.0;
};

std::vector<SweepRow> dimension_sweep(const ExperimentConfig& base,
                                      const std::vector<int>& d_list);

/// Elementwise standard deviations of the MLE (beta, s) over `subsets`
/// random subsets of the data, each of size subset_size. Subsets are drawn
/// without replacement by default; with_replacement switches to bootstrap
/// resampling. Deterministic under a fixed seed.
Eigen::VectorXd resample_stddev(const Dataset& data, const NoiseFamily& fam,
                                std::size_t subsets, std::size_t subset_size,
                                std::uint64_t seed, bool with_replacement = false);

void write_replications_csv(const BatchResult& batch, std::ostream& os);

/// Long-format rows for external plotting: one (estimator, family, gamma,
/// d, n, metric, value) tuple per line.
struct FigureRow {
    std::string estimator;
    int family = 0;
    double gamma = 0.0;
    int d = 0;
    std::size_t n = 0;
    std::string metric;
    double value = 0.0;
};

void append_batch_figure_rows(std::vector<FigureRow>& rows, const BatchResult& batch);
void write_figure_csv(const std::vector<FigureRow>& rows, std::ostream& os);

}  // namespace scalereg
