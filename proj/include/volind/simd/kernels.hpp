#pragma once

// Data-parallel inner loops of the membership test. Each instruction set gets
// its own translation unit; the scalar table is the reference every other
// table is tested against.

#include <cstddef>

namespace volind::simd {

enum class Isa { scalar, avx2, neon };

const char* isa_name(Isa isa);

/// Open intervals (lo[i], hi[i]) of normalized projections t that are deleted.
struct ExclusionView {
    const double* lo = nullptr;
    const double* hi = nullptr;
    std::size_t count = 0;
};

/// out[r] = <rows[r*stride .. r*stride+n), point>, for r < count.
using DotBatchFn = void (*)(const double* rows, std::size_t count, std::size_t stride,
                            const double* point, std::size_t n, double* out);

/// First r < count with <row r, point> * inv_norm inside an exclusion interval; `count` if none.
using FirstHitFn = std::size_t (*)(const double* rows, std::size_t count, std::size_t stride,
                                   const double* point, std::size_t n, double inv_norm,
                                   ExclusionView excluded);

struct KernelTable {
    Isa isa;
    DotBatchFn dot_batch;
    FirstHitFn first_hit;
};

const KernelTable& scalar_kernels();

/// nullptr when the binary or the CPU lacks the instruction set.
const KernelTable* avx2_kernels();
const KernelTable* neon_kernels();

/// Best table for this CPU. VOLIND_SIMD=scalar|avx2|neon forces a choice.
const KernelTable& active_kernels();

namespace detail {
inline bool excluded(double t, const ExclusionView& ex) {
    for (std::size_t i = 0; i < ex.count; ++i) {
        if (t > ex.lo[i] && t < ex.hi[i]) return true;
    }
    return false;
}
}  // namespace detail

}  // namespace volind::simd
