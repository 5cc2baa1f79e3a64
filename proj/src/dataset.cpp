// Copyright (C) 2026 scalereg developers
// SPDX-License-Identifier: Apache-2.0

#include "scalereg/dataset.hpp"

#include <string>

#include "scalereg/errors.hpp"

namespace scalereg {

Dataset Dataset::make(Eigen::MatrixXd design, Eigen::VectorXd response, bool centered) {
    if (design.rows() != response.size())
        throw DomainError("Dataset: design has " + std::to_string(design.rows()) +
                          " rows but response has " + std::to_string(response.size()));
    if (design.cols() < 1) throw DomainError("Dataset: need at least one predictor");
    if (design.rows() < design.cols() + 1)
        throw DomainError("Dataset: need n >= d + 1 observations, got n = " +
                          std::to_string(design.rows()) + ", d = " +
                          std::to_string(design.cols()));
    if (!design.allFinite() || !response.allFinite())
        throw DomainError("Dataset: non-finite entries");
    return Dataset{std::move(design), std::move(response), centered};
}

void Dataset::require_full_rank() const {
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(design);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || !(sv(sv.size() - 1) > 1e-10 * sv(0)))
        throw SingularDesignError(
            "design matrix is rank deficient (singular value ratio below 1e-10)");
}

}  // namespace scalereg
