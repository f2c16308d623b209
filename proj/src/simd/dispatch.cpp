#include <cstdlib>
#include <string_view>

#include "volind/error.hpp"
#include "volind/simd/kernels.hpp"

namespace volind::simd {

const char* isa_name(Isa isa) {
    switch (isa) {
        case Isa::scalar:
            return "scalar";
        case Isa::avx2:
            return "avx2";
        case Isa::neon:
            return "neon";
    }
    return "unknown";
}

namespace {

const KernelTable& select() {
    const char* forced = std::getenv("VOLIND_SIMD");
    if (forced != nullptr && *forced != '\0') {
        const std::string_view want(forced);
        if (want == "scalar") return scalar_kernels();
        const KernelTable* table = want == "avx2" ? avx2_kernels()
                                   : want == "neon" ? neon_kernels()
                                                    : nullptr;
        if (table == nullptr) {
            throw Error("VOLIND_SIMD=" + std::string(want) + " is not available on this machine");
        }
        return *table;
    }
    if (const KernelTable* t = avx2_kernels()) return *t;
    if (const KernelTable* t = neon_kernels()) return *t;
    return scalar_kernels();
}

}  // namespace

const KernelTable& active_kernels() {
    static const KernelTable& table = select();
    return table;
}

}  // namespace volind::simd
