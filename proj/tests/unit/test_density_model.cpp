#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "volind/density_model.hpp"

using namespace volind;
using volind::testing::flagship;

TEST_SUITE("density_model") {
    TEST_CASE("piecewise quadrature of known integrals") {
        CHECK(integrate_piecewise([](double r) { return 64 * std::pow(r, 63); }, 0, 1, {}) ==
              doctest::Approx(1.0).epsilon(1e-13));
        CHECK(integrate_piecewise([](double r) { return std::fabs(r - 0.3); }, 0, 1, {0.3}) ==
              doctest::Approx(0.045 + 0.245).epsilon(1e-13));
        CHECK(integrate_piecewise([](double r) { return r < 0.7 ? 0.0 : std::exp(r); }, 0, 1, {0.7}) ==
              doctest::Approx(std::exp(1.0) - std::exp(0.7)).epsilon(1e-13));
    }

    TEST_CASE("tilde f is exp(-m g)") {
        const BodyFamilySpec& s = flagship().spec1;
        for (double r : {0.1, 0.6, 0.85, 1.0}) {
            CHECK(tilde_f(s, r) == doctest::Approx(std::exp(-s.m * s.index_set->excluded_fraction(r))).epsilon(1e-14));
        }
        CHECK(tilde_f(s, 0.0) == 1.0);
    }

    TEST_CASE("density is normalized and the normalizer is the expected volume") {
        for (const auto* d : {flagship().density1.get(), flagship().density2.get()}) {
            const double total = d->integrate([&](double r) { return d->density(r); }, 0, 1);
            CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
            CHECK(d->normalizer() == doctest::Approx(expected_relative_volume(d->spec())).epsilon(1e-12));
            CHECK(d->tail_mass(0.0) == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(d->tail_mass(1.0) == 0.0);
            for (double p : {0.01, 0.3, 0.9, 0.999}) {
                CHECK(d->tail_mass(d->quantile(p)) == doctest::Approx(1 - p).epsilon(1e-9));
            }
            CHECK(d->log_density(0.9) == doctest::Approx(std::log(d->density(0.9))).epsilon(1e-13));
        }
    }

    TEST_CASE("normalizer agrees with Monte Carlo body volumes") {
        const PreparedPair& p = flagship();
        const VolumeResult v = measure_volumes(p, 100, 2000, 77, 1);
        CHECK(std::fabs(v.mean_1 - p.density1->normalizer()) <= 4 * v.se_1);
        CHECK(std::fabs(v.mean_2 - p.density2->normalizer()) <= 4 * v.se_2);
    }

    TEST_CASE("flagship volume ratio and shell identity") {
        const PreparedPair& p = flagship();
        const double ratio = p.density1->normalizer() / p.density2->normalizer();
        CHECK(ratio == doctest::Approx(2.0).epsilon(1e-3));
        const ProfileDistanceReport d = l1_profile_distance(*p.density1, *p.density2, p.pair.shell_lo);
        CHECK(d.l1_shell <= 1e-6);
        CHECK(d.l1 >= d.l1_shell);
        CHECK(d.l1 <= d.l1_shell + d.leak_1 + d.leak_2 + 1e-10);
        CHECK(d.shell_mass_1 + d.leak_1 == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(d.tv_bound(256) == doctest::Approx(256 * d.l1));
        const std::string kv = to_key_value(d);
        CHECK(kv.find("l1 = ") != std::string::npos);
    }

    TEST_CASE("identical families are at distance zero") {
        const PreparedPair& p = flagship();
        const ProfileDistanceReport d = l1_profile_distance(*p.density1, *p.density1, p.pair.shell_lo);
        CHECK(d.l1 == 0.0);
        const BodyFamilySpec none{p.pair.I1, 0.0};
        const RadialDensity ball(none);
        CHECK(ball.normalizer() == 1.0);
        CHECK(ball.density(0.5) == doctest::Approx(64 * std::pow(0.5, 63)));
    }

    TEST_CASE("profile moments") {
        const RadialDensity& d = *flagship().density1;
        CHECK(profile_moment(d, 0) == doctest::Approx(1.0).epsilon(1e-12));
        const double m1 = profile_moment(d, 1);
        const double m2 = profile_moment(d, 2);
        CHECK(m1 > 0.0);
        CHECK(m2 < m1);
        CHECK(m2 >= m1 * m1 - 1e-15);
    }

    TEST_CASE("empirical radial distance separates ball from body samples") {
        RandomStream rng(49);
        std::vector<PointSequence> ball, ball2;
        for (int s = 0; s < 2; ++s) {
            PointSequence a(8), b(8);
            for (int i = 0; i < 2000; ++i) {
                sample_unit_ball_into(a.append(), rng);
                sample_unit_ball_into(b.append(), rng);
            }
            ball.push_back(a);
            ball2.push_back(b);
        }
        const double null = empirical_radial_distance(ball, ball2, 20);
        CHECK(null <= 4 * std::sqrt(20.0 / 4000));
        std::vector<PointSequence> shrunk;
        for (const PointSequence& s : ball) {
            PointSequence t(8);
            for (std::size_t j = 0; j < s.size(); ++j) {
                auto q = t.append();
                for (std::size_t i = 0; i < 8; ++i) q[i] = 0.9 * s.point(j)[i];
            }
            shrunk.push_back(t);
        }
        CHECK(empirical_radial_distance(ball, shrunk, 20) > 0.5);
    }
}
