#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>
#include <thread>

#include "volind/config.hpp"
#include "volind/error.hpp"
#include "volind/experiment.hpp"
#include "volind/verify.hpp"

namespace {

using namespace volind;
namespace fs = std::filesystem;

constexpr const char* kVersion = "0.1.0";

enum Exit { kOk = 0, kUsage = 2, kNumerical = 3, kInvariant = 4 };

struct Options {
    std::string config;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int workers = 0;
    std::string out;
    std::string level = "quick";
    std::string pair;
    int grid = 0;
    std::string range = "shell";
};

std::string utc_now() {
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

int resolve_workers(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

LoadedConfig load(const Options& o) {
    ConfigMap overrides;
    if (o.seed_set) overrides["experiment.seed"] = std::to_string(o.seed);
    if (!o.out.empty()) overrides["output.dir"] = o.out;
    if (o.config.empty()) {
        ConfigMap raw;
        apply_env_overrides(raw);
        for (const auto& [k, v] : overrides) raw[k] = v;
        return resolve_config(raw);
    }
    return load_config(o.config, overrides);
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << text)) throw IoError("cannot write " + path.string());
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
}

int cmd_calibrate(const Options& o) {
    const LoadedConfig lc = load(o);
    const ProfilePair pair = build_profile_pair(lc.experiment.calibration);
    ensure_dir(lc.output_dir);
    const fs::path path = fs::path(lc.output_dir) / "pair.json";
    write_text(path, to_json(pair) + "\n");
    const PairingSummary& s = pair.summary;
    std::printf("pair file: %s\n", path.string().c_str());
    std::printf("m1 = %.9g  m2 = %.9g  cones = %zu/%zu\n", pair.m1, pair.m2, pair.I1->size(), pair.I2->size());
    std::printf("pairing residual: max %.3g  relative %.3g (tolerance %.3g)\n", s.max_residual, s.relative_residual,
                pair.tol_pair);
    std::printf("fit error: %.3g / %.3g (tolerance %.3g)\n", s.fit_error_1, s.fit_error_2, pair.tol_fit);
    std::printf("max vertex %.6g  shell_lo %.6g  min normal angle %.4g\n", s.max_vertex, pair.shell_lo,
                s.min_normal_angle);
    check_profile_pair(pair);
    return kOk;
}

int cmd_experiment(const Options& o) {
    const LoadedConfig lc = load(o);
    const int workers = resolve_workers(o.workers);
    const std::string started = utc_now();
    const auto t0 = std::chrono::steady_clock::now();
    const PreparedPair prep = prepare_pair(lc.experiment.calibration);
    ExperimentReport rep = run_experiment(lc.experiment, prep, workers);
    rep.config = lc.effective;
    rep.config_hash = lc.hash;
    write_report(rep, prep, lc.output_dir);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    nlohmann::json m;
    m["config_hash"] = lc.hash;
    m["master_seed"] = lc.experiment.seed;
    m["version"] = kVersion;
    m["started"] = started;
    m["finished"] = utc_now();
    m["runtime_seconds"] = seconds;
    m["workers"] = workers;
    m["outputs"] = {"report.json", "volumes.csv", "confusion.csv", "radial_histogram.csv", "analytic_density.csv"};
    write_text(fs::path(lc.output_dir) / "manifest.json", m.dump(2) + "\n");

    std::printf("analytic volume ratio %.9g  Monte Carlo %.5g +- %.2g\n", rep.volume.analytic_ratio,
                rep.volume.ratio, rep.volume.ratio_se);
    std::printf("l1 %.3g  shell l1 %.3g  tv_bound(N) %.3g  leak %.3g/%.3g\n", rep.distance.l1, rep.distance.l1_shell,
                rep.tv_bound, rep.distance.leak_1, rep.distance.leak_2);
    for (const DistinguisherResult& d : rep.distinguishers) {
        std::printf("%-17s accuracy %.4f  [%.4f, %.4f]  bound %.4f  %s\n", d.name.c_str(), d.accuracy, d.ci.lo,
                    d.ci.hi, d.bound, d.consistent ? "ok" : "VIOLATED");
    }
    std::printf("report: %s\n", (fs::path(lc.output_dir) / "report.json").string().c_str());
    if (!rep.accuracy_tv_consistent) {
        for (const DistinguisherResult& d : rep.distinguishers) {
            if (!d.consistent) std::fprintf(stderr, "invariant violated: accuracy-TV consistency (%s)\n", d.name.c_str());
        }
        return kInvariant;
    }
    return kOk;
}

int cmd_verify(const Options& o) {
    const LoadedConfig lc = load(o);
    if (o.level != "quick" && o.level != "full") throw ConfigError("--level must be quick or full");
    const VerifyLevel level = o.level == "full" ? VerifyLevel::full : VerifyLevel::quick;
    const VerifySummary s = run_verify(lc, level, resolve_workers(o.workers));
    const std::string json = verify_summary_json(s, lc.hash);
    std::cout << json;
    if (!o.out.empty()) {
        ensure_dir(o.out);
        write_text(fs::path(o.out) / "verify.json", json);
    }
    for (const PropertyResult& p : s.properties) {
        if (!p.pass) std::fprintf(stderr, "FAIL %s: %s\n", p.name.c_str(), p.detail.c_str());
    }
    return s.all_pass() ? kOk : kInvariant;
}

int cmd_inspect(const Options& o) {
    std::ifstream in(o.pair, std::ios::binary);
    if (!in) throw IoError("cannot read pair file '" + o.pair + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    ProfilePair pair = profile_pair_from_json(ss.str());
    const PreparedPair prep = prepare_pair(std::move(pair));
    const ProfilePair& p = prep.pair;
    const int grid = o.grid > 0 ? o.grid : p.check_grid;
    if (grid < 2) throw ConfigError("--grid must be at least 2");
    const double delta1 = p.I1->delta1();
    const double top = p.m1 * envelope_profile(*p.I1, 1.0).value;

    std::ostringstream out;
    out << "r,g1,g2,f1,f2,density1,density2,pair_residual\n";
    char buf[320];
    for (int k = 0; k < grid; ++k) {
        double r;
        if (o.range == "shell") {
            // Same nodes as the calibration check grid, listed by increasing radius.
            r = shell_radius(delta1, static_cast<double>(grid - 1 - k) / (grid - 1));
        } else if (o.range == "full") {
            r = static_cast<double>(k) / (grid - 1);
        } else {
            throw ConfigError("--range must be shell or full");
        }
        const double g1 = prep.density1->profile(r);
        const double g2 = prep.density2->profile(r);
        const double res = std::fabs(p.m2 * g2 - p.m1 * g1 - top);
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r, g1, g2,
                      tilde_f(prep.spec1, r), tilde_f(prep.spec2, r), prep.density1->density(r),
                      prep.density2->density(r), res);
        out << buf;
    }
    if (o.out.empty()) {
        std::cout << out.str();
    } else {
        ensure_dir(o.out);
        write_text(fs::path(o.out) / "inspect.csv", out.str());
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Volume-indistinguishable deletion bodies: calibration, experiments and checks"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    Options o;

    auto common = [&](CLI::App* c) {
        c->add_option("--workers", o.workers, "worker threads (default: hardware concurrency)")
            ->check(CLI::NonNegativeNumber);
        c->add_option("--out", o.out, "output directory");
    };
    auto with_config = [&](CLI::App* c, bool required) {
        auto* opt = c->add_option("--config", o.config, "INI config file")->check(CLI::ExistingFile);
        if (required) opt->required();
        c->add_option_function<std::uint64_t>(
            "--seed",
            [&](const std::uint64_t& s) {
                o.seed = s;
                o.seed_set = true;
            },
            "master seed (overrides experiment.seed)");
    };

    CLI::App* calibrate = app.add_subcommand("calibrate", "build and check a profile pair");
    with_config(calibrate, true);
    common(calibrate);
    CLI::App* experiment = app.add_subcommand("experiment", "run the indistinguishability experiment");
    with_config(experiment, true);
    common(experiment);
    CLI::App* verify = app.add_subcommand("verify", "run the property suites");
    with_config(verify, false);
    common(verify);
    verify->add_option("--level", o.level, "quick or full")->check(CLI::IsMember({"quick", "full"}));
    CLI::App* inspect = app.add_subcommand("inspect", "tabulate profiles and densities of a pair file");
    inspect->add_option("--pair", o.pair, "pair file written by calibrate")->required();
    inspect->add_option("--grid", o.grid, "grid points (default: the pair's check grid)");
    inspect->add_option("--range", o.range, "shell or full")->check(CLI::IsMember({"shell", "full"}));
    common(inspect);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        if (*calibrate) return cmd_calibrate(o);
        if (*experiment) return cmd_experiment(o);
        if (*verify) return cmd_verify(o);
        return cmd_inspect(o);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return kUsage;
    } catch (const IoError& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return kUsage;
    } catch (const InvariantViolation& e) {
        std::fprintf(stderr, "invariant violated: %s\n", e.what());
        return kInvariant;
    } catch (const NumericalError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return kNumerical;
    } catch (const DomainError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return kNumerical;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kNumerical;
    }
}
