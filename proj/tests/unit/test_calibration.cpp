#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "volind/calibration.hpp"
#include "volind/error.hpp"

using namespace volind;
using volind::testing::flagship;
using volind::testing::flagship_config;

TEST_SUITE("calibration") {
    TEST_CASE("height jet derivative agrees with finite differences") {
        const CalibrationConfig& cfg = flagship_config();
        for (double a : {1.5, 2.5, 4.0}) {
            for (double b : {0.0, 0.3}) {
                const ConeParams p{a, b, cfg.delta0, cfg.delta1, Dimension(cfg.n)};
                for (double u : {0.1, 0.5, 0.9}) {
                    const double fd = volind::testing::five_point([&](double t) { return height_jet(p, t).x; }, u, 1e-4);
                    CHECK(height_jet(p, u).x_u == doctest::Approx(fd).epsilon(1e-8));
                    CHECK(height_jet(p, u).x == doctest::Approx(cap_height_of_radius(p, shell_radius(cfg.delta1, u))));
                }
            }
        }
    }

    TEST_CASE("tangent solve recovers (a, b) from exact value and slope") {
        const CalibrationConfig& cfg = flagship_config();
        RandomStream rng(31);
        int done = 0;
        while (done < 100) {
            const ConeParams p{cfg.a_min + (4.0 - cfg.a_min) * rng.uniform(), 0.5 * rng.uniform(),
                               cfg.delta0, cfg.delta1, Dimension(cfg.n)};
            const double u = rng.uniform();
            if (p.x0() >= p.distance() || vertex(p) > cfg.shell_lo()) continue;
            const HeightJet j = height_jet(p, u);
            const double g = cap_measure(p.n, j.x).value;
            const double gp = cap_measure_derivative(p.n, j.x) * j.x_u;
            const TangentSolution s = solve_cone_for_tangent(u, g, gp, cfg);
            CHECK(s.params.a == doctest::Approx(p.a).epsilon(1e-6));
            CHECK(s.params.x0() == doctest::Approx(p.x0()).epsilon(1e-6));
            ++done;
        }
    }

    TEST_CASE("linearized seed lands near the solution") {
        const CalibrationConfig& cfg = flagship_config();
        const ConeParams p{3.0, 0.2, cfg.delta0, cfg.delta1, Dimension(cfg.n)};
        const HeightJet j = height_jet(p, 0.5);
        const auto [a, b] = linearized_seed(0.5, cap_measure(p.n, j.x).value,
                                            cap_measure_derivative(p.n, j.x) * j.x_u, cfg);
        CHECK(std::fabs(a / p.a - 1.0) < 0.5);
        CHECK(std::isfinite(b));
    }

    TEST_CASE("targets satisfy g1 = 2 g2 - g2(0)") {
        const CalibrationConfig& cfg = flagship_config();
        const ProfileTarget t1 = make_g1_target(cfg);
        const ProfileTarget t2 = make_g2_target(cfg);
        for (double u = 0.0; u <= 1.0; u += 0.05) {
            CHECK(t1.value_at(u) == doctest::Approx(2 * t2.value_at(u) - t2.value_at(0.0)).epsilon(1e-13));
            CHECK(t1.derivative_at(u) == doctest::Approx(2 * t2.derivative_at(u)).epsilon(1e-12));
            const double fd = volind::testing::five_point(t2.value_at, std::clamp(u, 0.01, 0.99), 1e-4);
            CHECK(t2.derivative_at(std::clamp(u, 0.01, 0.99)) == doctest::Approx(fd).epsilon(1e-7));
        }
    }

    TEST_CASE("flagship pair satisfies the pairing identity") {
        const ProfilePair& p = flagship().pair;
        const double g1_top = envelope_profile(*p.I1, 1.0).value;
        CHECK(p.m1 == doctest::Approx(p.kappa / g1_top).epsilon(1e-14));
        CHECK(p.m2 == doctest::Approx(2 * p.m1).epsilon(1e-15));
        CHECK(p.summary.relative_residual <= 1e-6);
        CHECK(p.summary.max_vertex <= p.shell_lo);
        // Independent recomputation of the residual on an offset grid.
        double worst = 0.0;
        for (int k = 0; k < 300; ++k) {
            const double r = shell_radius(p.I1->delta1(), (k + 0.5) / 300.0);
            worst = std::max(worst, std::fabs(p.m2 * envelope_profile(*p.I2, r).value -
                                              p.m1 * envelope_profile(*p.I1, r).value - p.m1 * g1_top));
        }
        CHECK(worst <= 1e-6 * p.m1 * g1_top);
    }

    TEST_CASE("kappa = 0 gives empty deletion processes") {
        CalibrationConfig cfg = flagship_config();
        cfg.kappa = 0.0;
        const ProfilePair p = make_profile_pair(cfg);
        CHECK(p.m1 == 0.0);
        CHECK(p.m2 == 0.0);
    }

    TEST_CASE("pair json round trip") {
        const ProfilePair& p = flagship().pair;
        const ProfilePair q = profile_pair_from_json(to_json(p));
        REQUIRE(q.I1->size() == p.I1->size());
        for (std::size_t i = 0; i < p.I1->size(); ++i) {
            CHECK(q.I1->entries()[i].a == p.I1->entries()[i].a);
            CHECK(q.I2->entries()[i].b == p.I2->entries()[i].b);
        }
        CHECK(q.m1 == p.m1);
        CHECK(q.shell_lo == p.shell_lo);
        CHECK(to_json(q) == to_json(p));
        CHECK_THROWS_AS(profile_pair_from_json("{not json"), IoError);
    }

    TEST_CASE("infeasible box fails loudly") {
        CalibrationConfig cfg = flagship_config();
        cfg.a_max = 1.1;
        CHECK_THROWS_AS(build_profile_pair(cfg), Error);
        cfg = flagship_config();
        cfg.delta1 = 0.6;
        CHECK_THROWS_AS(validate(cfg), DomainError);
    }

    TEST_CASE("tampered tolerance is reported as an invariant violation") {
        ProfilePair p = flagship().pair;
        p.tol_pair = 1e-12;
        CHECK_THROWS_AS(check_profile_pair(p), InvariantViolation);
    }
}
