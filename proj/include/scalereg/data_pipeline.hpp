// Copyright (C) 2026 scalereg developers
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "scalereg/dataset.hpp"
#include "scalereg/estimators.hpp"
#include "scalereg/noise_family.hpp"
#include "scalereg/rng.hpp"

namespace scalereg {

struct TabularSource {
    std::string path;
    std::string response;
    std::vector<std::string> predictors;
    std::vector<std::string> excluded;  // must exist, never used
    /// Optional power transform applied to the response before centering,
    /// as the sign-preserving map y -> sign(y) |y|^e.
    std::optional<double> transform_exponent;
};

/// Everything needed to reuse the fitted model on raw (uncentered) rows.
struct CenteringRecord {
    double response_mean = 0.0;  // mean of the (transformed) response
    Eigen::VectorXd predictor_means;
    std::optional<double> transform_exponent;
    std::size_t rows_dropped = 0;  // rows with missing values in used columns
    std::size_t rows_used = 0;

    Eigen::VectorXd center_predictors(const Eigen::VectorXd& raw) const;
    /// Prediction on the transformed-response scale for a raw predictor row.
    double predict(const Eigen::VectorXd& beta, const Eigen::VectorXd& raw) const;
};

struct LoadedData {
    Dataset dataset;
    CenteringRecord centering;
    std::vector<std::string> predictor_names;
};

/// CSV -> transformed, centered Dataset. Rows with missing values in the
/// selected columns are dropped (and counted); non-numeric cells are parse
/// errors carrying their location.
LoadedData load_and_center(const TabularSource& source);

/// Predictors whose centered column is identically zero (constant in the
/// raw file). Rank-check failures get enriched with these names.
std::vector<std::string> constant_predictor_columns(const LoadedData& loaded);

struct TrainTestResult {
    double mean_mse_ols = 0.0;
    double mean_mse_mle = 0.0;
    std::optional<double> eta_hat;  // empty when degenerate (zero covariances)
    std::size_t replications = 0;
};

/// Random train/test splits, both estimators fitted on the train part and
/// scored by test MSE; eta_hat from the determinants of the estimate
/// covariances across replications (exponent 1/d).
TrainTestResult train_test_evaluate(const Dataset& data, const NoiseFamily& fam,
                                    std::size_t train_size, std::size_t replications,
                                    Rng& rng);

/// CSV with columns raw,standardized (residual / s_hat). Requires a
/// converged fit.
void export_residuals(const Dataset& data, const FitResult& fit, const std::string& path);
void write_residuals(const Dataset& data, const FitResult& fit, std::ostream& os);

/// Dataset -> CSV with 17 significant digits (round-trips exactly).
void write_dataset_csv(const Dataset& data, std::ostream& os,
                       const std::vector<std::string>& predictor_names = {},
                       const std::string& response_name = "y");

double signed_power(double y, double exponent);

}  // namespace scalereg
