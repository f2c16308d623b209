#include <doctest.h>

#include <cmath>
#include <cstdlib>

#include "volind/config.hpp"
#include "volind/error.hpp"

using namespace volind;

TEST_SUITE("config") {
    TEST_CASE("SHA-256 reference digest") {
        CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }

    TEST_CASE("hash ignores key order, whitespace and comments") {
        const std::string a = "[geometry]\nn = 64\n[experiment]\nseed = 5\nN = 10\n";
        const std::string b = "; comment\n[experiment]\n  N=10\nseed   =  5\n\n[geometry]\nn=64\n";
        CHECK(resolve_config(parse_config_text(a)).hash == resolve_config(parse_config_text(b)).hash);
        const std::string c = "[experiment]\nseed = 6\n";
        CHECK(resolve_config(parse_config_text(a)).hash != resolve_config(parse_config_text(c)).hash);
    }

    TEST_CASE("explicit numbers and equivalent rules hash alike") {
        const LoadedConfig rule = resolve_config({});
        ConfigMap raw;
        raw["geometry.delta0"] = rule.effective.at("geometry.delta0");
        raw["geometry.delta1"] = rule.effective.at("geometry.delta1");
        CHECK(resolve_config(raw).hash == rule.hash);
    }

    TEST_CASE("output directory does not enter the hash") {
        ConfigMap raw;
        raw["output.dir"] = "/somewhere/else";
        const LoadedConfig lc = resolve_config(raw);
        CHECK(lc.hash == resolve_config({}).hash);
        CHECK(lc.output_dir == "/somewhere/else");
        CHECK(lc.effective.count("output.dir") == 0);
    }

    TEST_CASE("geometry rules") {
        ConfigMap raw{{"geometry.delta0", "paper"}, {"geometry.delta1", "paper"}, {"geometry.n", "64"}};
        const CalibrationConfig c = resolve_config(raw).experiment.calibration;
        CHECK(c.delta0 == doctest::Approx(std::pow(64.0, -0.25)));
        CHECK(c.delta1 == doctest::Approx(std::pow(64.0, -0.99)));
        const CalibrationConfig d = resolve_config({}).experiment.calibration;
        CHECK(d.delta1 == doctest::Approx(1 - std::pow(1e-6, 1.0 / 64)).epsilon(1e-12));
        CHECK(d.delta0 == doctest::Approx(std::sqrt((1.0 / 3) / (64 * d.delta1 * 4))).epsilon(1e-12));
    }

    TEST_CASE("unknown keys and bad values are configuration errors") {
        CHECK_THROWS_AS(parse_config_text("[geometry]\nradius = 3\n"), ConfigError);
        CHECK_THROWS_AS(parse_config_text("[geometry\nn = 3\n"), ConfigError);
        CHECK_THROWS_AS(resolve_config({{"geometry.n", "sixty"}}), ConfigError);
        CHECK_THROWS_AS(resolve_config({{"experiment.M", "1"}}), ConfigError);
        CHECK_THROWS_AS(resolve_config({{"calibration.b_min", "0"}}), ConfigError);
        CHECK_THROWS_AS(read_config_file("/nonexistent/config.ini"), ConfigError);
    }

    TEST_CASE("environment overrides") {
        ::setenv("VOLIND_EXPERIMENT_SEED", "424242", 1);
        ConfigMap raw{{"experiment.seed", "1"}};
        apply_env_overrides(raw);
        ::unsetenv("VOLIND_EXPERIMENT_SEED");
        CHECK(raw.at("experiment.seed") == "424242");
        CHECK(resolve_config(raw).experiment.seed == 424242);
    }

    TEST_CASE("every effective value is echoed") {
        const LoadedConfig lc = resolve_config({});
        CHECK(lc.effective.at("experiment.distinguishers") == "likelihood_ratio,max_radius");
        CHECK(lc.effective.at("calibration.kappa") == "0.69314718055994529");
        CHECK(canonical_config(lc.effective).find("geometry.n=64\n") != std::string::npos);
    }
}
