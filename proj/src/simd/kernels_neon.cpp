#include "volind/simd/kernels.hpp"

#if defined(__aarch64__)
#include <arm_neon.h>
#endif

namespace volind::simd {

#if defined(__aarch64__)

namespace {

double dot_row(const double* row, const double* point, std::size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc0 = vfmaq_f64(acc0, vld1q_f64(row + i), vld1q_f64(point + i));
        acc1 = vfmaq_f64(acc1, vld1q_f64(row + i + 2), vld1q_f64(point + i + 2));
    }
    double s = vaddvq_f64(vaddq_f64(acc0, acc1));
    for (; i < n; ++i) s += row[i] * point[i];
    return s;
}

void dot_batch(const double* rows, std::size_t count, std::size_t stride, const double* point,
               std::size_t n, double* out) {
    for (std::size_t r = 0; r < count; ++r) out[r] = dot_row(rows + r * stride, point, n);
}

std::size_t first_hit(const double* rows, std::size_t count, std::size_t stride,
                      const double* point, std::size_t n, double inv_norm, ExclusionView ex) {
    if (ex.count == 0) return count;
    for (std::size_t r = 0; r < count; ++r) {
        if (detail::excluded(dot_row(rows + r * stride, point, n) * inv_norm, ex)) return r;
    }
    return count;
}

constexpr KernelTable kNeon{Isa::neon, &dot_batch, &first_hit};

}  // namespace

const KernelTable* neon_kernels() { return &kNeon; }

#else

const KernelTable* neon_kernels() { return nullptr; }

#endif

}  // namespace volind::simd
