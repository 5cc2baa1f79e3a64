// Copyright (C) 2026 scalereg developers
// SPDX-License-Identifier: Apache-2.0

#include "scalereg/data_pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include "scalereg/csv.hpp"
#include "scalereg/errors.hpp"

namespace scalereg {

double signed_power(double y, double exponent) {
    if (y == 0.0) return 0.0;
    return std::copysign(std::pow(std::abs(y), exponent), y);
}

Eigen::VectorXd CenteringRecord::center_predictors(const Eigen::VectorXd& raw) const {
    if (raw.size() != predictor_means.size())
        throw DomainError("center_predictors: wrong predictor count");
    return raw - predictor_means;
}

double CenteringRecord::predict(const Eigen::VectorXd& beta, const Eigen::VectorXd& raw) const {
    return center_predictors(raw).dot(beta) + response_mean;
}

LoadedData load_and_center(const TabularSource& source) {
    if (source.response.empty()) throw DomainError("load_and_center: no response column");
    if (source.predictors.empty())
        throw DomainError("load_and_center: no predictor columns");
    for (const std::string& p : source.predictors)
        if (p == source.response)
            throw DomainError("load_and_center: column '" + p +
                              "' used as both response and predictor");
    {
        std::set<std::string> unique(source.predictors.begin(), source.predictors.end());
        if (unique.size() != source.predictors.size())
            throw DomainError("load_and_center: duplicate predictor column");
    }

    const CsvTable table = read_csv(source.path);
    const std::size_t response_col = table.column_index(source.response);
    std::vector<std::size_t> predictor_cols;
    predictor_cols.reserve(source.predictors.size());
    for (const std::string& p : source.predictors)
        predictor_cols.push_back(table.column_index(p));
    for (const std::string& e : source.excluded) table.column_index(e);  // must exist

    const auto d = static_cast<Eigen::Index>(predictor_cols.size());
    std::vector<Eigen::VectorXd> kept_rows;
    std::vector<double> kept_response;
    std::size_t dropped = 0;
    for (const auto& row : table.rows) {
        bool missing = std::isnan(row[response_col]);
        for (const std::size_t c : predictor_cols) missing = missing || std::isnan(row[c]);
        if (missing) {
            ++dropped;
            continue;
        }
        Eigen::VectorXd x(d);
        for (Eigen::Index j = 0; j < d; ++j) x(j) = row[predictor_cols[j]];
        kept_rows.push_back(std::move(x));
        kept_response.push_back(row[response_col]);
    }
    if (kept_rows.empty())
        throw DomainError("load_and_center: no usable rows in " + source.path);

    const auto n = static_cast<Eigen::Index>(kept_rows.size());
    Eigen::MatrixXd design(n, d);
    Eigen::VectorXd response(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        design.row(i) = kept_rows[i].transpose();
        response(i) = source.transform_exponent
                          ? signed_power(kept_response[i], *source.transform_exponent)
                          : kept_response[i];
    }

    CenteringRecord centering;
    centering.transform_exponent = source.transform_exponent;
    centering.rows_dropped = dropped;
    centering.rows_used = static_cast<std::size_t>(n);
    centering.response_mean = response.mean();
    centering.predictor_means = design.colwise().mean();
    response.array() -= centering.response_mean;
    design.rowwise() -= centering.predictor_means.transpose();

    LoadedData out{Dataset::make(std::move(design), std::move(response), true), centering,
                   source.predictors};
    return out;
}

std::vector<std::string> constant_predictor_columns(const LoadedData& loaded) {
    std::vector<std::string> names;
    const Eigen::MatrixXd& x = loaded.dataset.design;
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        const double scale = std::max(1.0, std::abs(loaded.centering.predictor_means(j)));
        if (x.col(j).cwiseAbs().maxCoeff() <= 1e-12 * scale)
            names.push_back(loaded.predictor_names[static_cast<std::size_t>(j)]);
    }
    return names;
}

TrainTestResult train_test_evaluate(const Dataset& data, const NoiseFamily& fam,
                                    std::size_t train_size, std::size_t replications,
                                    Rng& rng) {
    const auto n = static_cast<std::size_t>(data.n());
    const auto d = static_cast<std::size_t>(data.dim());
    if (train_size < d + 2)
        throw DomainError("train_test_evaluate: train size must be at least d + 2");
    if (train_size >= n)
        throw DomainError("train_test_evaluate: train size must be below n");
    if (replications == 0)
        throw DomainError("train_test_evaluate: need at least one replication");

    const std::size_t test_size = n - train_size;
    Eigen::MatrixXd est_ols(replications, d), est_mle(replications, d);
    double sum_mse_ols = 0.0, sum_mse_mle = 0.0;
    std::vector<std::size_t> indices(n);

    for (std::size_t rep = 0; rep < replications; ++rep) {
        bool done = false;
        for (int attempt = 0; attempt < 100 && !done; ++attempt) {
            std::iota(indices.begin(), indices.end(), 0);
            for (std::size_t i = 0; i < train_size; ++i)
                std::swap(indices[i], indices[i + rng.below(n - i)]);
            Eigen::MatrixXd xtr(train_size, d), xte(test_size, d);
            Eigen::VectorXd ytr(train_size), yte(test_size);
            for (std::size_t i = 0; i < train_size; ++i) {
                xtr.row(i) = data.design.row(static_cast<Eigen::Index>(indices[i]));
                ytr(i) = data.response(static_cast<Eigen::Index>(indices[i]));
            }
            for (std::size_t i = 0; i < test_size; ++i) {
                const std::size_t idx = indices[train_size + i];
                xte.row(i) = data.design.row(static_cast<Eigen::Index>(idx));
                yte(i) = data.response(static_cast<Eigen::Index>(idx));
            }
            try {
                const Dataset train = Dataset::make(std::move(xtr), std::move(ytr),
                                                    data.centered);
                const FitResult ols = ols_fit(train);
                Eigen::VectorXd beta_mle;
                try {
                    beta_mle = mle_fit(train, fam).beta_hat;
                } catch (const DegenerateDataError&) {
                    // exact linear fit: beta is identified (and equals the
                    // OLSE) even though the scale likelihood is unbounded
                    beta_mle = ols.beta_hat;
                }
                sum_mse_ols += (yte - xte * ols.beta_hat).squaredNorm() /
                               static_cast<double>(test_size);
                sum_mse_mle += (yte - xte * beta_mle).squaredNorm() /
                               static_cast<double>(test_size);
                est_ols.row(rep) = ols.beta_hat.transpose();
                est_mle.row(rep) = beta_mle.transpose();
                done = true;
            } catch (const SingularDesignError&) {
                // rank-deficient train split: redraw
            }
        }
        if (!done)
            throw SingularDesignError(
                "train_test_evaluate: no full-rank train split in 100 redraws");
    }

    TrainTestResult result;
    result.replications = replications;
    result.mean_mse_ols = sum_mse_ols / static_cast<double>(replications);
    result.mean_mse_mle = sum_mse_mle / static_cast<double>(replications);

    const auto cov_of = [](const Eigen::MatrixXd& est) {
        const Eigen::MatrixXd centered = est.rowwise() - est.colwise().mean();
        return Eigen::MatrixXd(centered.transpose() * centered /
                               static_cast<double>(est.rows() - 1));
    };
    if (replications >= d + 2) {
        const Eigen::MatrixXd cov_mle = cov_of(est_mle);
        const Eigen::MatrixXd cov_ols = cov_of(est_ols);
        // numerically-zero covariances (degenerate, e.g. noiseless data)
        // leave the ratio meaningless
        const double scale = std::max(1.0, est_ols.cwiseAbs().maxCoeff());
        const double floor = 1e-20 * scale * scale;
        const double det_mle = cov_mle.determinant();
        const double det_ols = cov_ols.determinant();
        if (cov_mle.cwiseAbs().maxCoeff() > floor && cov_ols.cwiseAbs().maxCoeff() > floor &&
            det_mle > 0.0 && det_ols > 0.0)
            result.eta_hat = std::pow(det_mle / det_ols, 1.0 / static_cast<double>(d));
    }
    return result;
}

void write_residuals(const Dataset& data, const FitResult& fit, std::ostream& os) {
    if (!fit.converged)
        throw DomainError("export_residuals: fit did not converge");
    const Eigen::VectorXd resid = data.response - data.design * fit.beta_hat;
    const double scale = fit.s_hat ? *fit.s_hat : fit.residual_sd.value();
    std::vector<std::vector<double>> rows;
    rows.reserve(resid.size());
    for (Eigen::Index i = 0; i < resid.size(); ++i)
        rows.push_back({resid(i), resid(i) / scale});
    write_csv(os, {"raw", "standardized"}, rows);
}

void export_residuals(const Dataset& data, const FitResult& fit, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open for writing: " + path);
    write_residuals(data, fit, out);
}

void write_dataset_csv(const Dataset& data, std::ostream& os,
                       const std::vector<std::string>& predictor_names,
                       const std::string& response_name) {
    const auto d = data.dim();
    std::vector<std::string> columns;
    columns.push_back(response_name);
    for (Eigen::Index j = 0; j < d; ++j)
        columns.push_back(predictor_names.size() == static_cast<std::size_t>(d)
                              ? predictor_names[static_cast<std::size_t>(j)]
                              : "x" + std::to_string(j));
    std::vector<std::vector<double>> rows;
    rows.reserve(data.n());
    for (Eigen::Index i = 0; i < data.n(); ++i) {
        std::vector<double> row;
        row.reserve(d + 1);
        row.push_back(data.response(i));
        for (Eigen::Index j = 0; j < d; ++j) row.push_back(data.design(i, j));
        rows.push_back(std::move(row));
    }
    write_csv(os, columns, rows);
}

}  // namespace scalereg
