#include "volind/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <numeric>

#include "volind/error.hpp"
#include "volind/parallel.hpp"

namespace volind {

namespace {

using nlohmann::json;

enum Purpose : std::uint64_t {
    kVolume = 1,
    kTrial = 2,
    kShuffle = 3,
    kDensityLaw = 4,
    kMutualCap = 5,
    kFactorization = 6,
};

constexpr std::size_t kDensityChunk = 100;
constexpr std::size_t kFactorizationChunk = 10000;

struct Moments {
    double mean = 0.0;
    double var = 0.0;  // unbiased
};

Moments moments(const std::vector<double>& v) {
    Moments m;
    if (v.empty()) return m;
    m.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    if (v.size() > 1) {
        double ss = 0.0;
        for (double x : v) ss += (x - m.mean) * (x - m.mean);
        m.var = ss / static_cast<double>(v.size() - 1);
    }
    return m;
}

double z_score(double observed, double expected, double se) {
    if (se > 0.0) return (observed - expected) / se;
    return observed == expected ? 0.0 : std::copysign(INFINITY, observed - expected);
}

const BodyFamilySpec& spec_of(const PreparedPair& prep, int family) { return family == 1 ? prep.spec1 : prep.spec2; }
const RadialDensity& density_of(const PreparedPair& prep, int family) {
    return family == 1 ? *prep.density1 : *prep.density2;
}

BallPoint sample_outer_ball_point(int n, RandomStream& rng) {
    BallPoint p(static_cast<std::size_t>(n));
    do {
        sample_unit_ball_into(p, rng);
    } while (!(norm(p) > 0.5));
    return p;
}

}  // namespace

void validate(const ExperimentConfig& cfg) {
    validate(cfg.calibration);
    if (cfg.M < 2) throw DomainError("experiment: M must be at least 2");
    if (!(cfg.calibration.kappa >= 0.0)) throw DomainError("experiment: kappa must be non-negative");
    if (cfg.volume_bodies < 2 || cfg.volume_samples < 1) {
        throw DomainError("experiment: volume_bodies >= 2 and volume_samples >= 1 required");
    }
    if (cfg.histogram_bins < 1) throw DomainError("experiment: histogram_bins must be positive");
    for (const std::string& d : cfg.distinguishers) find_distinguisher(d);
    const DiagnosticsConfig& g = cfg.diagnostics;
    if (g.enabled && (g.density_bodies < 2 || g.density_radii < 1 || g.mutual_pairs < 2 || g.mutual_samples < 1 ||
                      g.factorization_bodies < 2)) {
        throw DomainError("experiment: diagnostic sample sizes too small");
    }
}

DistinguisherContext make_context(std::shared_ptr<const RadialDensity> d1, std::shared_ptr<const RadialDensity> d2,
                                  std::size_t N, double tie_tolerance) {
    if (!d1 || !d2) throw DomainError("distinguisher context needs both radial densities");
    DistinguisherContext ctx;
    ctx.family1 = std::move(d1);
    ctx.family2 = std::move(d2);
    ctx.N = N;
    ctx.lr_tie_tolerance = tie_tolerance;
    if (N > 0) {
        // The maximum of N i.i.d. radii has CDF F^N; its median solves F = 2^{-1/N}.
        const double p = std::exp2(-1.0 / static_cast<double>(N));
        ctx.max_radius_median1 = ctx.family1->quantile(p);
        ctx.max_radius_median2 = ctx.family2->quantile(p);
    }
    return ctx;
}

int likelihood_ratio_distinguisher(const PointSequence& points, const DistinguisherContext& ctx) {
    if (!ctx.family1 || !ctx.family2) throw DomainError("likelihood ratio test needs both radial densities");
    double llr = 0.0;
    for (std::size_t j = 0; j < points.size(); ++j) {
        const double r = std::min(norm(points.point(j)), 1.0);
        llr += ctx.family1->log_density(r) - ctx.family2->log_density(r);
    }
    const double tie = ctx.lr_tie_tolerance * static_cast<double>(points.size());
    return llr < -tie ? 2 : 1;
}

int max_radius_distinguisher(const PointSequence& points, const DistinguisherContext& ctx) {
    if (!ctx.family1 || !ctx.family2) throw DomainError("max radius test needs both radial densities");
    const double m1 = ctx.max_radius_median1;
    const double m2 = ctx.max_radius_median2;
    if (points.size() == 0 || std::fabs(m1 - m2) <= 1e-12) return 1;
    double rmax = 0.0;
    for (std::size_t j = 0; j < points.size(); ++j) rmax = std::max(rmax, norm(points.point(j)));
    const int high = m1 > m2 ? 1 : 2;
    return rmax >= 0.5 * (m1 + m2) ? high : 3 - high;
}

Distinguisher find_distinguisher(const std::string& name) {
    if (name == "likelihood_ratio") return {name, &likelihood_ratio_distinguisher};
    if (name == "max_radius") return {name, &max_radius_distinguisher};
    throw DomainError("unknown distinguisher '" + name + "'");
}

ConfidenceInterval wilson_interval(std::size_t k, std::size_t n) {
    if (n == 0) return {0.0, 1.0};
    const double z = 1.959963984540054;
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(k) / nn;
    const double denom = 1.0 + z * z / nn;
    const double centre = (p + z * z / (2.0 * nn)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / nn + z * z / (4.0 * nn * nn)) / denom;
    return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

PreparedPair prepare_pair(ProfilePair pair) {
    PreparedPair prep;
    prep.spec1 = {pair.I1, pair.m1};
    prep.spec2 = {pair.I2, pair.m2};
    prep.density1 = std::make_shared<const RadialDensity>(prep.spec1);
    prep.density2 = std::make_shared<const RadialDensity>(prep.spec2);
    prep.pair = std::move(pair);
    return prep;
}

PreparedPair prepare_pair(const CalibrationConfig& cfg) { return prepare_pair(make_profile_pair(cfg)); }

VolumeResult measure_volumes(const PreparedPair& prep, std::size_t bodies, std::size_t samples, std::uint64_t seed,
                             int workers) {
    VolumeResult v;
    v.analytic_1 = prep.density1->normalizer();
    v.analytic_2 = prep.density2->normalizer();
    v.analytic_ratio = v.analytic_1 / v.analytic_2;
    std::vector<double> est(2 * bodies);
    parallel_for(est.size(), workers, [&](std::size_t i) {
        const int family = i < bodies ? 1 : 2;
        const std::size_t b = i % bodies;
        RandomStream rng = RandomStream::derive(seed, {kVolume, static_cast<std::uint64_t>(family), b});
        const DeletionBody body = sample_body(spec_of(prep, family), rng);
        est[i] = estimate_relative_volume(body, samples, rng);
    });
    v.per_body_1.assign(est.begin(), est.begin() + static_cast<std::ptrdiff_t>(bodies));
    v.per_body_2.assign(est.begin() + static_cast<std::ptrdiff_t>(bodies), est.end());
    const Moments a = moments(v.per_body_1);
    const Moments b = moments(v.per_body_2);
    const double nb = static_cast<double>(bodies);
    v.mean_1 = a.mean;
    v.mean_2 = b.mean;
    v.se_1 = std::sqrt(a.var / nb);
    v.se_2 = std::sqrt(b.var / nb);
    v.ratio = a.mean / b.mean;
    v.ratio_se = v.ratio * std::sqrt(std::pow(v.se_1 / a.mean, 2) + std::pow(v.se_2 / b.mean, 2));
    v.relative_error = std::fabs(v.ratio / v.analytic_ratio - 1.0);
    v.var_over_mean2_1 = a.var / (a.mean * a.mean);
    v.var_over_mean2_2 = b.var / (b.mean * b.mean);
    return v;
}

DiagnosticsResult run_lemma_diagnostics(const ExperimentConfig& cfg, const PreparedPair& prep,
                                        const VolumeResult& volumes, int workers) {
    const DiagnosticsConfig& g = cfg.diagnostics;
    DiagnosticsResult out;
    const int n = prep.pair.I1->n();
    const double delta1 = prep.pair.I1->delta1();

    // Single-point law and thinning at fixed radii.
    std::vector<double> radii;
    for (int k = 0; k < g.density_radii; ++k) {
        const double step = g.density_radii == 1 ? 0.0 : static_cast<double>(k) / (g.density_radii - 1);
        radii.push_back(std::max(0.5 + 1e-9, 1.0 - 2.0 * delta1 * step));
    }
    const std::size_t chunks = (g.density_bodies + kDensityChunk - 1) / kDensityChunk;
    struct Counts {
        std::vector<std::uint64_t> inside, cuts, cuts2;
    };
    std::vector<Counts> counts(2 * chunks);
    parallel_for(counts.size(), workers, [&](std::size_t i) {
        const int family = i < chunks ? 1 : 2;
        const std::size_t chunk = i % chunks;
        const std::size_t first = chunk * kDensityChunk;
        const std::size_t last = std::min(g.density_bodies, first + kDensityChunk);
        RandomStream rng = RandomStream::derive(cfg.seed, {kDensityLaw, static_cast<std::uint64_t>(family), chunk});
        Counts c{std::vector<std::uint64_t>(radii.size()), std::vector<std::uint64_t>(radii.size()),
                 std::vector<std::uint64_t>(radii.size())};
        BallPoint x(static_cast<std::size_t>(n), 0.0);
        for (std::size_t b = first; b < last; ++b) {
            const DeletionBody body = sample_body(spec_of(prep, family), rng);
            for (std::size_t k = 0; k < radii.size(); ++k) {
                x[0] = radii[k];
                const std::uint64_t cut = cutting_directions(body, x);
                c.inside[k] += cut == 0 ? 1 : 0;
                c.cuts[k] += cut;
                c.cuts2[k] += cut * cut;
            }
        }
        counts[i] = std::move(c);
    });
    const double B = static_cast<double>(g.density_bodies);
    for (int family = 1; family <= 2; ++family) {
        const BodyFamilySpec& spec = spec_of(prep, family);
        for (std::size_t k = 0; k < radii.size(); ++k) {
            std::uint64_t inside = 0;
            std::uint64_t cuts = 0;
            std::uint64_t cuts2 = 0;
            for (std::size_t c = 0; c < chunks; ++c) {
                const Counts& cc = counts[(family - 1) * chunks + c];
                inside += cc.inside[k];
                cuts += cc.cuts[k];
                cuts2 += cc.cuts2[k];
            }
            DensityLawPoint pt;
            pt.family = family;
            pt.r = radii[k];
            pt.analytic = tilde_f(spec, radii[k]);
            pt.empirical = static_cast<double>(inside) / B;
            pt.se = std::sqrt(pt.analytic * (1.0 - pt.analytic) / B);
            pt.z = z_score(pt.empirical, pt.analytic, pt.se);
            pt.cut_expected = spec.m * spec.index_set->excluded_fraction(radii[k]);
            pt.cut_mean = static_cast<double>(cuts) / B;
            pt.cut_var = (static_cast<double>(cuts2) - B * pt.cut_mean * pt.cut_mean) / (B - 1.0);
            const double lam = pt.cut_expected;
            const bool law_ok = std::fabs(pt.z) <= 4.0;
            const bool mean_ok = std::fabs(pt.cut_mean - lam) <= 4.0 * std::sqrt(lam / B) + 1e-12;
            const bool var_ok = std::fabs(pt.cut_var - lam) <= 4.0 * std::sqrt((lam + 2.0 * lam * lam) / B) + 1e-12;
            out.density_law_pass = out.density_law_pass && law_ok;
            out.thinning_pass = out.thinning_pass && mean_ok && var_ok;
            out.density_law.push_back(pt);
        }
    }

    for (int family = 1; family <= 2; ++family) {
        FamilyDiagnostics& fd = out.family[static_cast<std::size_t>(family - 1)];
        const BodyFamilySpec& spec = spec_of(prep, family);
        const RadialDensity& dens = density_of(prep, family);

        // Mutual caps of random pairs against the proof's bound.
        std::vector<double> ratios(g.mutual_pairs);
        parallel_for(ratios.size(), workers, [&](std::size_t i) {
            RandomStream rng = RandomStream::derive(cfg.seed, {kMutualCap, static_cast<std::uint64_t>(family), i});
            const BallPoint x1 = sample_outer_ball_point(n, rng);
            const BallPoint x2 = sample_outer_ball_point(n, rng);
            if (deletion_cap_set_measure(x1, *spec.index_set).value <= 0.0) {
                ratios[i] = 0.0;
                return;
            }
            ratios[i] = mutual_cap_ratio(x1, x2, *spec.index_set, rng, g.mutual_samples).estimate;
        });
        const Moments mr = moments(ratios);
        fd.mutual_mean = mr.mean;
        fd.mutual_se = std::sqrt(mr.var / static_cast<double>(ratios.size()));
        fd.mutual_bound = profile_moment(dens, 1);
        fd.mutual_pass = fd.mutual_mean <= fd.mutual_bound + 4.0 * fd.mutual_se;

        // Volume concentration from the per-body volume estimates.
        fd.concentration = family == 1 ? volumes.var_over_mean2_1 : volumes.var_over_mean2_2;
        fd.concentration_prediction = spec.m * profile_moment(dens, 2);
        fd.concentration_pass = fd.concentration <= 10.0 * fd.concentration_prediction;

        // Joint membership of three orthogonal points on the shell.
        fd.factorization_radius = 1.0 - 0.5 * delta1;
        std::vector<BallPoint> pts(3, BallPoint(static_cast<std::size_t>(n), 0.0));
        for (std::size_t j = 0; j < 3; ++j) pts[j][j] = fd.factorization_radius;
        const std::size_t fchunks = (g.factorization_bodies + kFactorizationChunk - 1) / kFactorizationChunk;
        std::vector<std::uint64_t> survived(fchunks);
        parallel_for(fchunks, workers, [&](std::size_t c) {
            const std::size_t size = std::min(kFactorizationChunk, g.factorization_bodies - c * kFactorizationChunk);
            RandomStream rng = RandomStream::derive(cfg.seed, {kFactorization, static_cast<std::uint64_t>(family), c});
            const RatioEstimate est = joint_membership(pts, spec, size, rng);
            survived[c] = static_cast<std::uint64_t>(std::llround(est.estimate * static_cast<double>(size)));
        });
        const double FB = static_cast<double>(g.factorization_bodies);
        fd.factorization_joint =
            static_cast<double>(std::accumulate(survived.begin(), survived.end(), std::uint64_t{0})) / FB;
        fd.factorization_product = std::pow(tilde_f(spec, fd.factorization_radius), 3.0);
        fd.factorization_se = std::sqrt(fd.factorization_product * (1.0 - fd.factorization_product) / FB);
        fd.factorization_z = z_score(fd.factorization_joint, fd.factorization_product, fd.factorization_se);
        fd.factorization_pass = std::fabs(fd.factorization_z) <= 4.0;
    }
    return out;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg, const PreparedPair& prep, int workers) {
    validate(cfg);
    ExperimentReport rep;
    rep.m1 = prep.pair.m1;
    rep.m2 = prep.pair.m2;
    rep.g1_at_1 = envelope_profile(*prep.pair.I1, 1.0).value;
    rep.pairing_residual = prep.pair.summary.relative_residual;
    rep.distance = l1_profile_distance(*prep.density1, *prep.density2, prep.pair.shell_lo);
    rep.tv_bound = rep.distance.tv_bound(static_cast<double>(cfg.N));
    rep.volume = measure_volumes(prep, cfg.volume_bodies, cfg.volume_samples, cfg.seed, workers);

    const double zmin = std::min(prep.density1->normalizer(), prep.density2->normalizer());
    const std::uint64_t budget =
        cfg.max_attempts > 0 ? cfg.max_attempts : 1000 * static_cast<std::uint64_t>(std::ceil(1.0 / zmin));
    const double tie = 10.0 * prep.pair.tol_pair * std::max(prep.pair.kappa, 0.0) + 1e-12;
    const DistinguisherContext ctx = make_context(prep.density1, prep.density2, cfg.N, tie);
    std::vector<Distinguisher> tests;
    for (const std::string& name : cfg.distinguishers) tests.push_back(find_distinguisher(name));

    // Balanced, label-blind trials presented in a seed-determined order.
    const std::size_t total = 2 * cfg.M;
    std::vector<std::size_t> order(total);
    std::iota(order.begin(), order.end(), std::size_t{0});
    RandomStream shuffle_rng = RandomStream::derive(cfg.seed, {kShuffle});
    std::shuffle(order.begin(), order.end(), shuffle_rng.engine());
    const auto bins = static_cast<std::size_t>(cfg.histogram_bins);
    std::vector<std::vector<int>> decisions(total);
    std::vector<std::vector<std::uint64_t>> hist(total);
    parallel_for(total, workers, [&](std::size_t i) {
        const std::size_t key = order[i];
        const int family = key < cfg.M ? 1 : 2;
        RandomStream rng =
            RandomStream::derive(cfg.seed, {kTrial, static_cast<std::uint64_t>(family), key % cfg.M});
        const SampledSequence s = sample_sequence(spec_of(prep, family), cfg.N, rng, budget);
        std::vector<int> d;
        for (const Distinguisher& t : tests) d.push_back(t.decide(s.points, ctx));
        std::vector<std::uint64_t> h(bins, 0);
        for (std::size_t j = 0; j < s.points.size(); ++j) {
            const double v = std::pow(std::min(norm(s.points.point(j)), 1.0), static_cast<double>(s.points.dim()));
            ++h[std::min(static_cast<std::size_t>(v * static_cast<double>(bins)), bins - 1)];
        }
        decisions[i] = std::move(d);
        hist[i] = std::move(h);
    });

    for (std::size_t t = 0; t < tests.size(); ++t) {
        DistinguisherResult r;
        r.name = tests[t].name;
        r.trials = total;
        for (std::size_t i = 0; i < total; ++i) {
            const int truth = order[i] < cfg.M ? 1 : 2;
            const int said = decisions[i][t];
            ++r.confusion[static_cast<std::size_t>(truth - 1)][static_cast<std::size_t>(said - 1)];
            r.correct += said == truth ? 1 : 0;
        }
        r.accuracy = static_cast<double>(r.correct) / static_cast<double>(total);
        r.ci = wilson_interval(r.correct, total);
        r.bound = 0.5 + 0.5 * rep.tv_bound + 4.0 * std::sqrt(0.25 / static_cast<double>(total));
        r.consistent = r.accuracy <= r.bound;
        rep.accuracy_tv_consistent = rep.accuracy_tv_consistent && r.consistent;
        rep.distinguishers.push_back(r);
    }

    std::array<std::vector<double>, 2> freq{std::vector<double>(bins, 0.0), std::vector<double>(bins, 0.0)};
    for (std::size_t i = 0; i < total; ++i) {
        const std::size_t f = order[i] < cfg.M ? 0 : 1;
        for (std::size_t b = 0; b < bins; ++b) freq[f][b] += static_cast<double>(hist[i][b]);
    }
    const double per_family = static_cast<double>(cfg.M * cfg.N);
    for (std::size_t b = 0; b < bins; ++b) {
        const double a = per_family > 0.0 ? freq[0][b] / per_family : 0.0;
        const double c = per_family > 0.0 ? freq[1][b] / per_family : 0.0;
        rep.radial_histogram.push_back({a, c});
        rep.empirical_radial_l1 += std::fabs(a - c);
    }
    rep.empirical_radial_null = per_family > 0.0 ? 4.0 * std::sqrt(static_cast<double>(bins) / per_family) : 0.0;

    if (cfg.diagnostics.enabled) {
        rep.diagnostics_run = true;
        rep.diagnostics = run_lemma_diagnostics(cfg, prep, rep.volume, workers);
    }
    return rep;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg, int workers) {
    validate(cfg);
    return run_experiment(cfg, prepare_pair(cfg.calibration), workers);
}

std::string report_to_json(const ExperimentReport& r) {
    json j;
    j["config"] = r.config;
    j["config_hash"] = r.config_hash;
    j["calibration"] = {{"m1", r.m1}, {"m2", r.m2}, {"g1_at_1", r.g1_at_1}, {"pairing_residual", r.pairing_residual}};
    const VolumeResult& v = r.volume;
    j["volume"] = {{"analytic_1", v.analytic_1},
                   {"analytic_2", v.analytic_2},
                   {"analytic_ratio", v.analytic_ratio},
                   {"mc_mean_1", v.mean_1},
                   {"mc_mean_2", v.mean_2},
                   {"mc_se_1", v.se_1},
                   {"mc_se_2", v.se_2},
                   {"mc_ratio", v.ratio},
                   {"mc_ratio_ci", {v.ratio - 1.959963984540054 * v.ratio_se, v.ratio + 1.959963984540054 * v.ratio_se}},
                   {"mc_relative_error", v.relative_error},
                   {"var_over_mean2_1", v.var_over_mean2_1},
                   {"var_over_mean2_2", v.var_over_mean2_2}};
    const ProfileDistanceReport& d = r.distance;
    j["distance"] = {{"l1", d.l1},
                     {"l1_shell", d.l1_shell},
                     {"shell_lo", d.shell_lo},
                     {"shell_mass_1", d.shell_mass_1},
                     {"shell_mass_2", d.shell_mass_2},
                     {"leak_1", d.leak_1},
                     {"leak_2", d.leak_2},
                     {"tv_bound", r.tv_bound}};
    json ds = json::array();
    for (const DistinguisherResult& x : r.distinguishers) {
        ds.push_back({{"name", x.name},
                      {"correct", x.correct},
                      {"trials", x.trials},
                      {"accuracy", x.accuracy},
                      {"ci95", {x.ci.lo, x.ci.hi}},
                      {"confusion", x.confusion},
                      {"bound", x.bound},
                      {"consistent", x.consistent}});
    }
    j["distinguishers"] = ds;
    j["empirical_radial"] = {{"l1", r.empirical_radial_l1}, {"null_scale", r.empirical_radial_null}};
    j["accuracy_tv_consistent"] = r.accuracy_tv_consistent;
    if (r.diagnostics_run) {
        const DiagnosticsResult& g = r.diagnostics;
        json law = json::array();
        for (const DensityLawPoint& p : g.density_law) {
            law.push_back({{"family", p.family},
                           {"r", p.r},
                           {"analytic", p.analytic},
                           {"empirical", p.empirical},
                           {"se", p.se},
                           {"z", p.z},
                           {"cut_mean", p.cut_mean},
                           {"cut_var", p.cut_var},
                           {"cut_expected", p.cut_expected}});
        }
        json fam = json::array();
        for (const FamilyDiagnostics& f : g.family) {
            fam.push_back({{"mutual_cap", {{"mean", f.mutual_mean}, {"se", f.mutual_se}, {"bound", f.mutual_bound},
                                           {"pass", f.mutual_pass}}},
                           {"concentration", {{"var_over_mean2", f.concentration},
                                              {"first_order_prediction", f.concentration_prediction},
                                              {"pass", f.concentration_pass}}},
                           {"factorization", {{"radius", f.factorization_radius},
                                              {"joint", f.factorization_joint},
                                              {"product", f.factorization_product},
                                              {"se", f.factorization_se},
                                              {"z", f.factorization_z},
                                              {"pass", f.factorization_pass}}}});
        }
        j["diagnostics"] = {{"density_law", law},
                            {"density_law_pass", g.density_law_pass},
                            {"thinning_pass", g.thinning_pass},
                            {"families", fam}};
    }
    return j.dump(2) + "\n";
}

void write_report(const ExperimentReport& report, const PreparedPair& prep, const std::string& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
    auto open = [&](const char* name) {
        std::ofstream out(fs::path(dir) / name, std::ios::binary);
        if (!out) throw IoError(std::string("cannot write ") + name);
        return out;
    };
    char buf[256];
    {
        auto out = open("report.json");
        out << report_to_json(report);
    }
    {
        auto out = open("volumes.csv");
        out << "family,body,relative_volume\n";
        for (int f = 1; f <= 2; ++f) {
            const auto& v = f == 1 ? report.volume.per_body_1 : report.volume.per_body_2;
            for (std::size_t b = 0; b < v.size(); ++b) {
                std::snprintf(buf, sizeof buf, "%d,%zu,%.17g\n", f, b, v[b]);
                out << buf;
            }
        }
    }
    {
        auto out = open("confusion.csv");
        out << "distinguisher,true_label,decided_label,count\n";
        for (const DistinguisherResult& d : report.distinguishers) {
            for (int t = 0; t < 2; ++t) {
                for (int s = 0; s < 2; ++s) {
                    out << d.name << ',' << t + 1 << ',' << s + 1 << ','
                        << d.confusion[static_cast<std::size_t>(t)][static_cast<std::size_t>(s)] << '\n';
                }
            }
        }
    }
    {
        auto out = open("radial_histogram.csv");
        out << "bin_lo,bin_hi,family1,family2\n";
        const double nb = static_cast<double>(report.radial_histogram.size());
        for (std::size_t b = 0; b < report.radial_histogram.size(); ++b) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", static_cast<double>(b) / nb,
                          static_cast<double>(b + 1) / nb, report.radial_histogram[b][0],
                          report.radial_histogram[b][1]);
            out << buf;
        }
    }
    {
        auto out = open("analytic_density.csv");
        out << "r,g1,g2,f1,f2,density1,density2\n";
        const int pts = 400;
        for (int k = 0; k <= pts; ++k) {
            const double r = static_cast<double>(k) / pts;
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r, prep.density1->profile(r),
                          prep.density2->profile(r), tilde_f(prep.spec1, r), tilde_f(prep.spec2, r),
                          prep.density1->density(r), prep.density2->density(r));
            out << buf;
        }
    }
}

}  // namespace volind
