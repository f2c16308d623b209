// Runs the ten acceptance criteria and prints one PASS/FAIL line for each.
#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "volind/config.hpp"
#include "volind/density_model.hpp"
#include "volind/experiment.hpp"

using namespace volind;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a = 0, double b = 0, double c = 0, double d = 0) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

double five_point(const std::function<double(double)>& f, double x, double h) {
    return (f(x - 2 * h) - 8 * f(x - h) + 8 * f(x + h) - f(x + 2 * h)) / (12 * h);
}

LoadedConfig config(const char* name) {
    return load_config(std::string(VOLIND_SOURCE_DIR) + "/configs/" + name);
}

const PreparedPair& flagship() {
    static const PreparedPair prep = prepare_pair(config("flagship.ini").experiment.calibration);
    return prep;
}

const VolumeResult& flagship_volumes() {
    static const VolumeResult v = [] {
        const ExperimentConfig& c = config("flagship.ini").experiment;
        return measure_volumes(flagship(), c.volume_bodies, c.volume_samples, c.seed, 1);
    }();
    return v;
}

Outcome ac1_cap_measure() {
    double closed = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double x = -1.0 + 2.0 * (i + 0.5) / 1000.0;
        closed = std::max(closed, std::fabs(cap_measure(Dimension(3), x).value - 0.5 * (1.0 - x)));
    }
    bool ok = closed <= 1e-12;
    double worst_z = 0.0;
    double worst_quad = 0.0;
    RandomStream rng(1001);
    for (int n : {8, 16, 64}) {
        // Second route: direct quadrature of the surface density of the first coordinate.
        const double norm_const = std::exp(std::lgamma(0.5 * n) - std::lgamma(0.5 * (n - 1)) - 0.5 * std::log(std::numbers::pi));
        for (double x : {0.05, 0.1, 0.2}) {
            const double psi = cap_measure(Dimension(n), x).value;
            const double quad = integrate_piecewise(
                [&](double t) { return norm_const * std::pow((1 - t) * (1 + t), 0.5 * (n - 3)); }, x, 1.0, {});
            worst_quad = std::max(worst_quad, std::fabs(quad - psi));
            const int samples = 1000000;
            std::vector<double> v(static_cast<std::size_t>(n));
            int hits = 0;
            for (int s = 0; s < samples; ++s) {
                sample_unit_sphere_into(v, rng);
                hits += v[0] >= x ? 1 : 0;
            }
            const double se = std::sqrt(psi * (1 - psi) / samples);
            worst_z = std::max(worst_z, std::fabs(static_cast<double>(hits) / samples - psi) / se);
        }
    }
    ok = ok && worst_z <= 4.0 && worst_quad <= 1e-10;
    return {ok, fmt("n=3 max error %.2g; quadrature gap %.2g; Monte Carlo max |z| %.2f", closed, worst_quad, worst_z)};
}

Outcome ac2_derivative() {
    RandomStream rng(1002);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const int n = 3 + static_cast<int>(rng.uniform_index(254));
        const double x = 1.8 * rng.uniform() - 0.9;
        // Difference on the small side of the sphere; the density is even in x.
        const double fd =
            five_point([&](double t) { return cap_measure(Dimension(n), t).value; }, std::fabs(x), 1e-5);
        const double an = cap_measure_derivative(Dimension(n), x);
        worst = std::max(worst, std::fabs(fd / an - 1.0));
    }
    return {worst <= 1e-6, fmt("100 random (n, x), max relative error %.3g", worst)};
}

Outcome ac3_round_trip() {
    const CalibrationConfig cfg = config("flagship.ini").experiment.calibration;
    RandomStream rng(1003);
    double worst = 0.0;
    int done = 0;
    while (done < 100) {
        const double a = cfg.a_min + (cfg.resolved_a_max() - cfg.a_min) * rng.uniform();
        const double b = cfg.resolved_b_min() + (cfg.resolved_b_max() - cfg.resolved_b_min()) * rng.uniform();
        const ConeParams p{a, b, cfg.delta0, cfg.delta1, Dimension(cfg.n)};
        const double u = rng.uniform();
        if (!(p.x0() > 0 && p.x0() < p.distance() && p.distance() < cfg.shell_lo())) continue;
        if (vertex(p) > cfg.shell_lo()) continue;
        const HeightJet j = height_jet(p, u);
        const double g = cap_measure(p.n, j.x).value;
        const double gp = cap_measure_derivative(p.n, j.x) * j.x_u;
        if (!(g > 0.0 && g < 0.5)) continue;
        const TangentSolution s = solve_cone_for_tangent(u, g, gp, cfg);
        worst = std::max({worst, std::fabs(s.params.a / a - 1.0), std::fabs(s.params.x0() / p.x0() - 1.0)});
        ++done;
    }
    return {worst <= 1e-6, fmt("100 valid (a, b), max relative error %.3g", worst)};
}

Outcome ac4_pairing() {
    const ProfilePair& p = flagship().pair;
    const double top = p.m1 * envelope_profile(*p.I1, 1.0).value;
    double worst = 0.0;
    for (int k = 0; k < 256; ++k) {
        const double r = shell_radius(p.I1->delta1(), k / 255.0);
        worst = std::max(worst, std::fabs(p.m2 * envelope_profile(*p.I2, r).value -
                                          p.m1 * envelope_profile(*p.I1, r).value - top));
    }
    return {worst <= 1e-6 * top, fmt("max residual %.3g = %.3g x m1 g1(1) (m1 = %.6g)", worst, worst / top, p.m1)};
}

const DiagnosticsResult& flagship_diagnostics() {
    static const DiagnosticsResult d = [] {
        ExperimentConfig c = config("flagship.ini").experiment;
        c.diagnostics.density_bodies = 10000;
        c.diagnostics.density_radii = 10;
        return run_lemma_diagnostics(c, flagship(), flagship_volumes(), 1);
    }();
    return d;
}

Outcome ac5_density_law() {
    const DiagnosticsResult& d = flagship_diagnostics();
    double worst = 0.0;
    for (const DensityLawPoint& p : d.density_law) worst = std::max(worst, std::fabs(p.z));
    return {d.density_law_pass, fmt("10^4 bodies x 10 radii x 2 families, max |z| %.2f", worst)};
}

Outcome ac6_volume_gap() {
    const PreparedPair& p = flagship();
    const VolumeResult& v = flagship_volumes();
    const ProfileDistanceReport d = l1_profile_distance(*p.density1, *p.density2, p.pair.shell_lo);
    const double analytic_err = std::fabs(v.analytic_ratio / std::exp(p.pair.kappa) - 1.0);
    const bool ok = analytic_err <= 1e-3 && v.relative_error <= 0.05;
    return {ok, fmt("analytic %.9g (error %.2g, leak %.2g); ", v.analytic_ratio, analytic_err,
                    std::max(d.leak_1, d.leak_2)) +
                    fmt("Monte Carlo %.4g +- %.3g (relative error %.3g)", v.ratio, v.ratio_se, v.relative_error)};
}

Outcome ac7_indistinguishability() {
    ExperimentConfig c = config("flagship.ini").experiment;
    c.diagnostics.enabled = false;
    const ExperimentReport r = run_experiment(c, flagship(), 1);
    std::string detail = fmt("n=64 N=%g M=%g tv_bound %.3g (leak %.2g):", static_cast<double>(c.N),
                             static_cast<double>(c.M), r.tv_bound, std::max(r.distance.leak_1, r.distance.leak_2));
    bool ok = !r.distinguishers.empty();
    for (const DistinguisherResult& d : r.distinguishers) {
        const double bound = 0.5 + 0.5 * r.tv_bound + 4.0 * std::sqrt(0.25 / 400.0);
        ok = ok && d.accuracy <= bound;
        detail += " " + d.name + fmt(" %.4f <= %.4f", d.accuracy, bound);
    }
    return {ok, detail};
}

Outcome ac8_factorization() {
    const LoadedConfig lc = config("paper_scale.ini");
    const PreparedPair p = prepare_pair(lc.experiment.calibration);
    const int n = lc.experiment.calibration.n;
    const double r = 1.0 - 0.5 * lc.experiment.calibration.delta1;
    std::vector<BallPoint> pts(3, BallPoint(static_cast<std::size_t>(n), 0.0));
    for (std::size_t j = 0; j < 3; ++j) pts[j][j] = r;
    bool ok = true;
    std::string detail = "paper scale, 3 orthogonal points at r=" + fmt("%.5f, 10^5 bodies:", r);
    int family = 1;
    for (const BodyFamilySpec* spec : {&p.spec1, &p.spec2}) {
        RandomStream rng = RandomStream::derive(lc.experiment.seed, {1008, static_cast<std::uint64_t>(family)});
        const std::size_t bodies = 100000;
        const double joint = joint_membership(pts, *spec, bodies, rng).estimate;
        const double product = std::pow(tilde_f(*spec, r), 3.0);
        const double se = std::sqrt(product * (1 - product) / bodies);
        const double z = (joint - product) / se;
        ok = ok && std::fabs(z) <= 4.0;
        detail += fmt(" family %g joint %.5f product %.5f z %.2f;", family, joint, product, z);
        ++family;
    }
    return {ok, detail};
}

Outcome ac9_concentration() {
    const DiagnosticsResult& d = flagship_diagnostics();
    bool ok = true;
    std::string detail;
    for (int f = 0; f < 2; ++f) {
        const FamilyDiagnostics& fd = d.family[static_cast<std::size_t>(f)];
        ok = ok && fd.concentration_pass;
        detail += fmt("family %g Var/Mean^2 %.4g <= 10 x %.4g; ", f + 1, fd.concentration, fd.concentration_prediction);
    }
    return {ok, detail};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome ac10_determinism() {
    const fs::path work = fs::path(VOLIND_TEST_TMP) / "acceptance_determinism";
    fs::remove_all(work);
    fs::create_directories(work);
    const std::string cfg = std::string(VOLIND_SOURCE_DIR) + "/configs/quick.ini";
    const std::vector<std::pair<std::string, int>> runs{{"w1", 1}, {"w1_again", 1}, {"w4", 4}, {"w8", 8}};
    for (const auto& [dir, workers] : runs) {
        const std::string cmd = std::string(VOLIND_CLI) + " experiment --config " + cfg + " --workers " +
                                std::to_string(workers) + " --out " + (work / dir).string() + " > " +
                                (work / (dir + ".log")).string() + " 2>&1";
        const int status = std::system(cmd.c_str());
        if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
            return {false, "cmd_experiment failed for workers=" + std::to_string(workers)};
        }
    }
    bool ok = true;
    std::string detail = "workers 1,1,4,8:";
    for (const char* f : {"report.json", "volumes.csv", "confusion.csv", "radial_histogram.csv", "analytic_density.csv"}) {
        const std::string ref = slurp(work / "w1" / f);
        bool same = !ref.empty();
        for (const auto& run : runs) same = same && slurp(work / run.first / f) == ref;
        ok = ok && same;
        detail += std::string(" ") + f + (same ? " identical" : " DIFFERS");
    }
    return {ok, detail};
}

}  // namespace

int main() {
    std::setvbuf(stdout, nullptr, _IONBF, 0);
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"AC1 cap measure", ac1_cap_measure},
        {"AC2 derivative consistency", ac2_derivative},
        {"AC3 calibration round trip", ac3_round_trip},
        {"AC4 pairing identity", ac4_pairing},
        {"AC5 density law", ac5_density_law},
        {"AC6 volume gap", ac6_volume_gap},
        {"AC7 indistinguishability", ac7_indistinguishability},
        {"AC8 factorization", ac8_factorization},
        {"AC9 volume concentration", ac9_concentration},
        {"AC10 determinism", ac10_determinism},
    };
    int failed = 0;
    for (const auto& [name, run] : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%s %s: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str(), secs);
        failed += o.pass ? 0 : 1;
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
