#include "volind/simd/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#include <immintrin.h>
#define VOLIND_HAVE_AVX2_TU 1
#endif

namespace volind::simd {

#if VOLIND_HAVE_AVX2_TU

namespace {

#define VOLIND_AVX2 __attribute__((target("avx2,fma")))

VOLIND_AVX2 inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

VOLIND_AVX2 double dot_row(const double* row, const double* point, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(row + i), _mm256_loadu_pd(point + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(row + i + 4), _mm256_loadu_pd(point + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(row + i), _mm256_loadu_pd(point + i), acc0);
    }
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) s += row[i] * point[i];
    return s;
}

// Four dot products at once; lanes of the result hold rows 0..3.
VOLIND_AVX2 __m256d dot_rows4(const double* r0, const double* r1, const double* r2,
                              const double* r3, const double* point, std::size_t n) {
    __m256d a0 = _mm256_setzero_pd();
    __m256d a1 = _mm256_setzero_pd();
    __m256d a2 = _mm256_setzero_pd();
    __m256d a3 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d p = _mm256_loadu_pd(point + i);
        a0 = _mm256_fmadd_pd(_mm256_loadu_pd(r0 + i), p, a0);
        a1 = _mm256_fmadd_pd(_mm256_loadu_pd(r1 + i), p, a1);
        a2 = _mm256_fmadd_pd(_mm256_loadu_pd(r2 + i), p, a2);
        a3 = _mm256_fmadd_pd(_mm256_loadu_pd(r3 + i), p, a3);
    }
    const __m256d s01 = _mm256_hadd_pd(a0, a1);
    const __m256d s23 = _mm256_hadd_pd(a2, a3);
    const __m256d cross = _mm256_permute2f128_pd(s01, s23, 0x21);
    const __m256d straight = _mm256_blend_pd(s01, s23, 0b1100);
    __m256d sum = _mm256_add_pd(cross, straight);
    if (i < n) {
        alignas(32) double tail[4] = {0.0, 0.0, 0.0, 0.0};
        for (std::size_t k = i; k < n; ++k) {
            tail[0] += r0[k] * point[k];
            tail[1] += r1[k] * point[k];
            tail[2] += r2[k] * point[k];
            tail[3] += r3[k] * point[k];
        }
        sum = _mm256_add_pd(sum, _mm256_load_pd(tail));
    }
    return sum;
}

VOLIND_AVX2 void dot_batch(const double* rows, std::size_t count, std::size_t stride,
                           const double* point, std::size_t n, double* out) {
    std::size_t r = 0;
    for (; r + 4 <= count; r += 4) {
        const double* base = rows + r * stride;
        _mm256_storeu_pd(out + r, dot_rows4(base, base + stride, base + 2 * stride,
                                            base + 3 * stride, point, n));
    }
    for (; r < count; ++r) out[r] = dot_row(rows + r * stride, point, n);
}

VOLIND_AVX2 std::size_t first_hit(const double* rows, std::size_t count, std::size_t stride,
                                  const double* point, std::size_t n, double inv_norm,
                                  ExclusionView ex) {
    if (ex.count == 0) return count;
    const __m256d scale = _mm256_set1_pd(inv_norm);
    std::size_t r = 0;
    for (; r + 4 <= count; r += 4) {
        const double* base = rows + r * stride;
        const __m256d t = _mm256_mul_pd(
            dot_rows4(base, base + stride, base + 2 * stride, base + 3 * stride, point, n), scale);
        __m256d hit = _mm256_setzero_pd();
        for (std::size_t k = 0; k < ex.count; ++k) {
            const __m256d above = _mm256_cmp_pd(t, _mm256_set1_pd(ex.lo[k]), _CMP_GT_OQ);
            const __m256d below = _mm256_cmp_pd(t, _mm256_set1_pd(ex.hi[k]), _CMP_LT_OQ);
            hit = _mm256_or_pd(hit, _mm256_and_pd(above, below));
        }
        const int mask = _mm256_movemask_pd(hit);
        if (mask != 0) return r + static_cast<std::size_t>(__builtin_ctz(static_cast<unsigned>(mask)));
    }
    for (; r < count; ++r) {
        if (detail::excluded(dot_row(rows + r * stride, point, n) * inv_norm, ex)) return r;
    }
    return count;
}

constexpr KernelTable kAvx2{Isa::avx2, &dot_batch, &first_hit};

}  // namespace

const KernelTable* avx2_kernels() {
    static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    return supported ? &kAvx2 : nullptr;
}

#else

const KernelTable* avx2_kernels() { return nullptr; }

#endif

}  // namespace volind::simd
