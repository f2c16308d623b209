#include <doctest.h>

#include <cmath>
#include <vector>

#include "volind/random.hpp"
#include "volind/simd/kernels.hpp"
#include "volind/sphere_geometry.hpp"

using namespace volind;

namespace {

std::vector<const simd::KernelTable*> available() {
    std::vector<const simd::KernelTable*> out;
    if (const simd::KernelTable* k = simd::avx2_kernels()) out.push_back(k);
    if (const simd::KernelTable* k = simd::neon_kernels()) out.push_back(k);
    return out;
}

}  // namespace

TEST_SUITE("simd") {
    TEST_CASE("vector kernels equal the scalar reference") {
        const simd::KernelTable& ref = simd::scalar_kernels();
        RandomStream rng(61);
        for (const simd::KernelTable* k : available()) {
            INFO(simd::isa_name(k->isa));
            for (std::size_t n : {3, 4, 5, 7, 8, 63, 64, 65, 130}) {
                const std::size_t stride = (n + 3) / 4 * 4;
                for (std::size_t count : {0, 1, 3, 4, 5, 17, 64}) {
                    std::vector<double> rows(count * stride + 4, 0.0);
                    for (std::size_t i = 0; i < count; ++i) sample_unit_sphere_into({rows.data() + i * stride, n}, rng);
                    std::vector<double> point(n);
                    sample_unit_ball_into(point, rng);
                    std::vector<double> a(count), b(count);
                    ref.dot_batch(rows.data(), count, stride, point.data(), n, a.data());
                    k->dot_batch(rows.data(), count, stride, point.data(), n, b.data());
                    for (std::size_t i = 0; i < count; ++i) CHECK(std::fabs(a[i] - b[i]) <= 1e-13);

                    const double inv = 1.0 / norm(point);
                    for (int trial = 0; trial < 5; ++trial) {
                        std::vector<double> lo, hi;
                        for (int j = 0; j < trial; ++j) {
                            const double c = 2 * rng.uniform() - 1;
                            lo.push_back(c - 0.2 * rng.uniform());
                            hi.push_back(c + 0.2 * rng.uniform());
                        }
                        const simd::ExclusionView ex{lo.data(), hi.data(), lo.size()};
                        CHECK(ref.first_hit(rows.data(), count, stride, point.data(), n, inv, ex) ==
                              k->first_hit(rows.data(), count, stride, point.data(), n, inv, ex));
                    }
                }
            }
        }
    }

    TEST_CASE("open intervals exclude their endpoints") {
        const double lo[] = {0.25};
        const double hi[] = {0.5};
        const simd::ExclusionView ex{lo, hi, 1};
        CHECK(!simd::detail::excluded(0.25, ex));
        CHECK(simd::detail::excluded(0.3, ex));
        CHECK(!simd::detail::excluded(0.5, ex));
    }

    TEST_CASE("active table is one of the known ones") {
        const simd::KernelTable& k = simd::active_kernels();
        CHECK((k.isa == simd::Isa::scalar || k.isa == simd::Isa::avx2 || k.isa == simd::Isa::neon));
    }
}
