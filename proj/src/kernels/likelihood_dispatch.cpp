// Copyright (C) 2026 scalereg developers
// SPDX-License-Identifier: Apache-2.0

#include <atomic>

#include "scalereg/errors.hpp"
#include "scalereg/kernels/likelihood.hpp"

namespace scalereg::kernels {

FamilyParams make_params(int family, double gamma, double c, double log_d) {
    FamilyParams p;
    p.family = family;
    p.gamma = gamma;
    p.c = c;
    p.log_d = log_d;
    const bool singular_at_zero = family != 1 || gamma < 1.0;
    p.min_abs_t = singular_at_zero ? 1e-12 : 0.0;
    return p;
}

namespace {

std::atomic<Backend> g_requested{Backend::kAuto};

bool runtime_avx2() {
#if defined(SCALEREG_HAVE_AVX2_KERNELS)
    static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    return ok;
#else
    return false;
#endif
}

Backend resolve(Backend requested) {
    if (requested == Backend::kScalar) return Backend::kScalar;
    if (requested == Backend::kAvx2) return Backend::kAvx2;
    return runtime_avx2() ? Backend::kAvx2 : Backend::kScalar;
}

}  // namespace

bool avx2_supported() { return runtime_avx2(); }

void set_backend(Backend backend) {
    if (backend == Backend::kAvx2 && !runtime_avx2())
        throw DomainError("kernels: AVX2 backend requested but not available");
    g_requested.store(backend, std::memory_order_relaxed);
}

Backend active_backend() { return resolve(g_requested.load(std::memory_order_relaxed)); }

double neg_logf_sum(const FamilyParams& p, const double* r, std::size_t n, double inv_s) {
#if defined(SCALEREG_HAVE_AVX2_KERNELS)
    if (active_backend() == Backend::kAvx2)
        return detail::neg_logf_sum_avx2(p, r, n, inv_s);
#endif
    return detail::neg_logf_sum_scalar(p, r, n, inv_s);
}

ScoreSums score_sums(const FamilyParams& p, const double* r, std::size_t n, double inv_s,
                     double* psi) {
#if defined(SCALEREG_HAVE_AVX2_KERNELS)
    if (active_backend() == Backend::kAvx2)
        return detail::score_sums_avx2(p, r, n, inv_s, psi);
#endif
    return detail::score_sums_scalar(p, r, n, inv_s, psi);
}

}  // namespace scalereg::kernels
