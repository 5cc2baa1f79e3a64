// Copyright (C) 2026 scalereg developers
// SPDX-License-Identifier: Apache-2.0

#include "likelihood_terms.hpp"
#include "scalereg/kernels/likelihood.hpp"

namespace scalereg::kernels::detail {

double neg_logf_sum_scalar(const FamilyParams& p, const double* r, std::size_t n,
                           double inv_s) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = clamp_t(p, r[i] * inv_s);
        sum += term_value(p, t);
    }
    return sum;
}

ScoreSums score_sums_scalar(const FamilyParams& p, const double* r, std::size_t n,
                            double inv_s, double* psi) {
    ScoreSums sums;
    for (std::size_t i = 0; i < n; ++i) {
        const double raw = r[i] * inv_s;
        const double t = clamp_t(p, raw);
        Term term = term_score(p, t);
        // the clamped objective is constant in t on the plateau, so its
        // gradient contribution there is zero
        if (t != raw) term.psi = 0.0;
        psi[i] = term.psi;
        sums.neg_logf += term.neg_logf;
        sums.psi_dot_t += term.psi * t;
    }
    return sums;
}

}  // namespace scalereg::kernels::detail
