// Copyright (C) 2026 scalereg developers
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

namespace scalereg {

/// Design matrix (rows = observations) plus response vector.
///
/// Construction enforces the cheap invariants (shapes, n >= d + 1, finite
/// entries). The full-column-rank requirement is checked by the estimators
/// through require_full_rank(), so degenerate designs can be constructed,
/// carried around and diagnosed, but never silently fitted.
struct Dataset {
    Eigen::MatrixXd design;
    Eigen::VectorXd response;
    bool centered = false;

    static Dataset make(Eigen::MatrixXd design, Eigen::VectorXd response,
                        bool centered = false);

    Eigen::Index n() const { return design.rows(); }
    Eigen::Index dim() const { return design.cols(); }

    /// Throws SingularDesignError unless the smallest singular value exceeds
    /// 1e-10 times the largest.
    void require_full_rank() const;
};

}  // namespace scalereg
