#include "volind/simd/kernels.hpp"

namespace volind::simd {

namespace {

double dot_row(const double* row, const double* point, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += row[i] * point[i];
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

constexpr KernelTable kScalar{Isa::scalar, &dot_batch, &first_hit};

}  // namespace

const KernelTable& scalar_kernels() { return kScalar; }

}  // namespace volind::simd
