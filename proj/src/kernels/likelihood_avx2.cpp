// Copyright (C) 2026 scalereg developers
// SPDX-License-Identifier: Apache-2.0

// AVX2 variants of the likelihood kernels. Tails run through the exact
// scalar term functions, so only the vector body differs from the
// reference path.

#if defined(__AVX2__) && defined(__FMA__)

#include <immintrin.h>

#include "likelihood_terms.hpp"
#include "scalereg/kernels/likelihood.hpp"
#include "vecmath_avx2.hpp"

namespace scalereg::kernels::detail {

namespace {

const __m256d kAbsMask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
const __m256d kSignMask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x8000000000000000LL));

inline __m256d vabs(__m256d x) { return _mm256_and_pd(x, kAbsMask); }

// copysign(mag, src) with magnitudes assumed non-negative.
inline __m256d apply_sign(__m256d mag, __m256d src) {
    return _mm256_or_pd(mag, _mm256_and_pd(src, kSignMask));
}

inline __m256d clamp_vt(const FamilyParams& p, __m256d t) {
    if (p.min_abs_t <= 0.0) return t;
    const __m256d floor_abs = _mm256_set1_pd(p.min_abs_t);
    return apply_sign(_mm256_max_pd(vabs(t), floor_abs), t);
}

struct VecTerm {
    __m256d neg_logf;
    __m256d psi;
};

inline __m256d vterm_value(const FamilyParams& p, __m256d t) {
    const __m256d log_d = _mm256_set1_pd(p.log_d);
    const __m256d c = _mm256_set1_pd(p.c);
    const __m256d u = vabs(t);
    switch (p.family) {
        case 1: {
            if (p.gamma == 2.0)
                return _mm256_fmsub_pd(_mm256_mul_pd(_mm256_set1_pd(0.5), t), t, log_d);
            const __m256d pw = vpow(u, _mm256_set1_pd(p.gamma));
            return _mm256_fmsub_pd(c, pw, log_d);
        }
        case 2: {
            const __m256d lg = vlog(u);
            const __m256d v = _mm256_fnmadd_pd(_mm256_set1_pd(p.gamma - 1.0), lg,
                                               _mm256_mul_pd(c, u));
            return _mm256_sub_pd(v, log_d);
        }
        default: {
            const __m256d lg = vlog(u);
            const __m256d pw = vexp(_mm256_mul_pd(_mm256_set1_pd(p.gamma), lg));
            const __m256d v = _mm256_fnmadd_pd(_mm256_set1_pd(p.gamma - 1.0), lg,
                                               _mm256_mul_pd(c, pw));
            return _mm256_sub_pd(v, log_d);
        }
    }
}

inline VecTerm vterm_score(const FamilyParams& p, __m256d t) {
    const __m256d log_d = _mm256_set1_pd(p.log_d);
    const __m256d c = _mm256_set1_pd(p.c);
    const __m256d u = vabs(t);
    VecTerm out;
    switch (p.family) {
        case 1: {
            if (p.gamma == 2.0) {
                out.neg_logf = _mm256_fmsub_pd(_mm256_mul_pd(_mm256_set1_pd(0.5), t), t, log_d);
                out.psi = _mm256_sub_pd(_mm256_setzero_pd(), t);
                return out;
            }
            const __m256d pw = vpow(u, _mm256_set1_pd(p.gamma));
            out.neg_logf = _mm256_fmsub_pd(c, pw, log_d);
            __m256d pw1 = _mm256_div_pd(pw, u);  // NaN at u = 0, patched below
            const __m256d zero_mask = _mm256_cmp_pd(u, _mm256_setzero_pd(), _CMP_EQ_OQ);
            const __m256d at_zero = _mm256_set1_pd(p.gamma > 1.0 ? 0.0 : 1.0);
            pw1 = _mm256_blendv_pd(pw1, at_zero, zero_mask);
            out.psi = _mm256_sub_pd(_mm256_setzero_pd(),
                                    apply_sign(_mm256_mul_pd(_mm256_set1_pd(p.c * p.gamma), pw1), t));
            return out;
        }
        case 2: {
            const __m256d lg = vlog(u);
            const __m256d v = _mm256_fnmadd_pd(_mm256_set1_pd(p.gamma - 1.0), lg,
                                               _mm256_mul_pd(c, u));
            out.neg_logf = _mm256_sub_pd(v, log_d);
            out.psi = _mm256_sub_pd(_mm256_div_pd(_mm256_set1_pd(p.gamma - 1.0), t),
                                    apply_sign(c, t));
            return out;
        }
        default: {
            const __m256d lg = vlog(u);
            const __m256d pw = vexp(_mm256_mul_pd(_mm256_set1_pd(p.gamma), lg));
            const __m256d v = _mm256_fnmadd_pd(_mm256_set1_pd(p.gamma - 1.0), lg,
                                               _mm256_mul_pd(c, pw));
            out.neg_logf = _mm256_sub_pd(v, log_d);
            const __m256d pw1 = _mm256_div_pd(pw, u);
            out.psi = _mm256_sub_pd(
                _mm256_div_pd(_mm256_set1_pd(p.gamma - 1.0), t),
                apply_sign(_mm256_mul_pd(_mm256_set1_pd(p.c * p.gamma), pw1), t));
            return out;
        }
    }
}

}  // namespace

double neg_logf_sum_avx2(const FamilyParams& p, const double* r, std::size_t n, double inv_s) {
    const __m256d vinv_s = _mm256_set1_pd(inv_s);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d t = clamp_vt(p, _mm256_mul_pd(_mm256_loadu_pd(r + i), vinv_s));
        acc = _mm256_add_pd(acc, vterm_value(p, t));
    }
    double sum = hsum(acc);
    for (; i < n; ++i) sum += term_value(p, clamp_t(p, r[i] * inv_s));
    return sum;
}

ScoreSums score_sums_avx2(const FamilyParams& p, const double* r, std::size_t n, double inv_s,
                          double* psi) {
    const __m256d vinv_s = _mm256_set1_pd(inv_s);
    const __m256d clamp_level = _mm256_set1_pd(p.min_abs_t);
    __m256d acc_nl = _mm256_setzero_pd();
    __m256d acc_pt = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d raw = _mm256_mul_pd(_mm256_loadu_pd(r + i), vinv_s);
        const __m256d t = clamp_vt(p, raw);
        VecTerm term = vterm_score(p, t);
        if (p.min_abs_t > 0.0) {
            // zero gradient on the clamp plateau (see the scalar reference)
            const __m256d clamped = _mm256_cmp_pd(vabs(raw), clamp_level, _CMP_LT_OQ);
            term.psi = _mm256_andnot_pd(clamped, term.psi);
        }
        _mm256_storeu_pd(psi + i, term.psi);
        acc_nl = _mm256_add_pd(acc_nl, term.neg_logf);
        acc_pt = _mm256_fmadd_pd(term.psi, t, acc_pt);
    }
    ScoreSums sums;
    sums.neg_logf = hsum(acc_nl);
    sums.psi_dot_t = hsum(acc_pt);
    for (; i < n; ++i) {
        const double raw = r[i] * inv_s;
        const double t = clamp_t(p, raw);
        Term term = term_score(p, t);
        if (t != raw) term.psi = 0.0;
        psi[i] = term.psi;
        sums.neg_logf += term.neg_logf;
        sums.psi_dot_t += term.psi * t;
    }
    return sums;
}

}  // namespace scalereg::kernels::detail

#endif  // __AVX2__ && __FMA__
