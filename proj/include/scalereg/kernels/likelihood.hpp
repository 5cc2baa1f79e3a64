// Copyright (C) 2026 scalereg developers
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>

namespace scalereg::kernels {

/// Per-family constants, precomputed once per fit. `min_abs_t` is the clamp
/// applied to |t| before logs are taken: densities with a |t|^(gamma-1)
/// factor (families 2 and 3, and family 1 with gamma < 1) are singular or
/// have a singular score at t = 0, and the optimizer must stay finite when a
/// residual crosses zero. A value of 0 disables clamping.
struct FamilyParams {
    int family = 1;
    double gamma = 2.0;
    double c = 0.5;
    double log_d = 0.0;
    double min_abs_t = 0.0;
};

/// Builds FamilyParams with the clamp policy above (clamp = 1e-12).
FamilyParams make_params(int family, double gamma, double c, double log_d);

/// sum_i -log f(r_i * inv_s) for the standardized density f of the family.
/// The -n log(scale) part of the likelihood is the caller's business.
double neg_logf_sum(const FamilyParams& p, const double* r, std::size_t n, double inv_s);

struct ScoreSums {
    double neg_logf = 0.0;  // sum_i -log f(t_i)
    double psi_dot_t = 0.0; // sum_i psi(t_i) * t_i
};

/// Fills psi[i] = (f'/f)(t_i) with t_i = r_i * inv_s and returns the reduced
/// sums needed by the likelihood gradient.
ScoreSums score_sums(const FamilyParams& p, const double* r, std::size_t n, double inv_s,
                     double* psi);

enum class Backend { kAuto, kScalar, kAvx2 };

/// True when AVX2 kernels are both compiled in and supported by this CPU.
bool avx2_supported();

/// Overrides backend selection (tests use this to exercise both paths).
/// kAuto restores runtime detection. Requesting kAvx2 without support throws.
void set_backend(Backend backend);

/// The backend that calls will actually use (kScalar or kAvx2).
Backend active_backend();

namespace detail {

// Raw entry points, used by the dispatcher and by equivalence tests.
double neg_logf_sum_scalar(const FamilyParams&, const double*, std::size_t, double);
ScoreSums score_sums_scalar(const FamilyParams&, const double*, std::size_t, double, double*);
#if defined(SCALEREG_HAVE_AVX2_KERNELS)
double neg_logf_sum_avx2(const FamilyParams&, const double*, std::size_t, double);
ScoreSums score_sums_avx2(const FamilyParams&, const double*, std::size_t, double, double*);
#endif

}  // namespace detail

}  // namespace scalereg::kernels
