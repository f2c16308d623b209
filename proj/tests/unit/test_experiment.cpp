#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "volind/error.hpp"
#include "volind/experiment.hpp"

using namespace volind;
using volind::testing::flagship;

namespace {

ExperimentConfig small_config() {
    ExperimentConfig c = resolve_config({}).experiment;
    c.N = 8;
    c.M = 10;
    c.volume_bodies = 6;
    c.volume_samples = 200;
    c.diagnostics.density_bodies = 200;
    c.diagnostics.density_radii = 3;
    c.diagnostics.mutual_pairs = 4;
    c.diagnostics.mutual_samples = 50;
    c.diagnostics.factorization_bodies = 500;
    return c;
}

}  // namespace

TEST_SUITE("experiment_harness") {
    TEST_CASE("Wilson interval reference values") {
        const ConfidenceInterval a = wilson_interval(50, 100);
        CHECK(a.lo == doctest::Approx(0.40383).epsilon(1e-4));
        CHECK(a.hi == doctest::Approx(0.59617).epsilon(1e-4));
        const ConfidenceInterval b = wilson_interval(0, 20);
        CHECK(b.lo == 0.0);
        CHECK(b.hi == doctest::Approx(0.16113).epsilon(1e-4));
        const ConfidenceInterval c = wilson_interval(20, 20);
        CHECK(c.hi == 1.0);
    }

    TEST_CASE("likelihood ratio with identical families always answers 1") {
        const PreparedPair& p = flagship();
        const DistinguisherContext ctx = make_context(p.density1, p.density1, 16, 1e-12);
        RandomStream rng(51);
        for (int t = 0; t < 20; ++t) {
            const SampledSequence s = sample_sequence(t % 2 ? p.spec1 : p.spec2, 16, rng, 100000);
            CHECK(likelihood_ratio_distinguisher(s.points, ctx) == 1);
        }
    }

    TEST_CASE("single shell point is a tie for the paired families") {
        const PreparedPair& p = flagship();
        const double tie = 10 * p.pair.tol_pair * p.pair.kappa + 1e-12;
        const DistinguisherContext ctx = make_context(p.density1, p.density2, 1, tie);
        PointSequence pts(64);
        pts.append()[0] = 1.0 - 0.5 * p.pair.I1->delta1();
        CHECK(likelihood_ratio_distinguisher(pts, ctx) == 1);
        PointSequence deep(64);
        deep.append()[0] = 0.5;
        CHECK(likelihood_ratio_distinguisher(deep, ctx) == (p.density1->log_density(0.5) >= p.density2->log_density(0.5) - tie ? 1 : 2));
    }

    TEST_CASE("max radius separates families with disjoint radial supports") {
        const PreparedPair& p = flagship();
        auto d1 = std::make_shared<const RadialDensity>(BodyFamilySpec{p.pair.I1, 0.0});
        auto d2 = std::make_shared<const RadialDensity>(BodyFamilySpec{p.pair.I1, 400.0});
        const DistinguisherContext ctx = make_context(d1, d2, 32, 1e-12);
        CHECK(ctx.max_radius_median1 > ctx.max_radius_median2);
        // The rule only reads radii, so sequences are drawn from each radial law by inversion.
        RandomStream rng(52);
        int correct = 0;
        for (int t = 0; t < 40; ++t) {
            const int family = 1 + t % 2;
            const RadialDensity& d = family == 1 ? *d1 : *d2;
            PointSequence pts(64);
            for (int j = 0; j < 32; ++j) {
                auto x = pts.append();
                sample_unit_sphere_into(x, rng);
                const double r = d.quantile(rng.uniform());
                for (double& v : x) v *= r;
            }
            correct += max_radius_distinguisher(pts, ctx) == family ? 1 : 0;
        }
        CHECK(correct == 40);
    }

    TEST_CASE("missing context is an error") {
        DistinguisherContext ctx;
        PointSequence pts(64);
        CHECK_THROWS_AS(likelihood_ratio_distinguisher(pts, ctx), DomainError);
        CHECK_THROWS_AS(max_radius_distinguisher(pts, ctx), DomainError);
        CHECK_THROWS_AS(find_distinguisher("oracle"), DomainError);
    }

    TEST_CASE("N = 0 gives chance accuracy") {
        ExperimentConfig c = small_config();
        c.N = 0;
        c.diagnostics.enabled = false;
        const ExperimentReport r = run_experiment(c, flagship(), 1);
        for (const DistinguisherResult& d : r.distinguishers) CHECK(d.accuracy == 0.5);
    }

    TEST_CASE("kappa = 0 is the identity experiment") {
        ExperimentConfig c = small_config();
        c.calibration.kappa = 0.0;
        c.diagnostics.enabled = false;
        const ExperimentReport r = run_experiment(c, 1);
        CHECK(r.volume.analytic_ratio == 1.0);
        CHECK(r.distance.l1 == 0.0);
        CHECK(r.volume.var_over_mean2_1 == 0.0);
    }

    TEST_CASE("report does not depend on the worker count") {
        const ExperimentConfig c = small_config();
        const std::string a = report_to_json(run_experiment(c, flagship(), 1));
        const std::string b = report_to_json(run_experiment(c, flagship(), 3));
        CHECK(a == b);
        ExperimentConfig other = c;
        other.seed += 1;
        CHECK(report_to_json(run_experiment(other, flagship(), 2)) != a);
    }

    TEST_CASE("accuracies are probabilities with consistent confusion counts") {
        const ExperimentReport r = run_experiment(small_config(), flagship(), 1);
        for (const DistinguisherResult& d : r.distinguishers) {
            CHECK(d.accuracy >= 0.0);
            CHECK(d.accuracy <= 1.0);
            CHECK(d.ci.lo <= d.accuracy);
            CHECK(d.ci.hi >= d.accuracy);
            CHECK(d.confusion[0][0] + d.confusion[0][1] == 10);
            CHECK(d.confusion[1][0] + d.confusion[1][1] == 10);
            CHECK(d.correct == d.confusion[0][0] + d.confusion[1][1]);
        }
        CHECK(r.diagnostics_run);
    }

    TEST_CASE("invalid configurations") {
        ExperimentConfig c = small_config();
        c.M = 1;
        CHECK_THROWS_AS(validate(c), DomainError);
        c = small_config();
        c.distinguishers = {"nope"};
        CHECK_THROWS_AS(validate(c), DomainError);
    }
}
