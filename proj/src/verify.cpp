#include "volind/verify.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <json.hpp>

#include "volind/error.hpp"
#include "volind/simd/kernels.hpp"

namespace volind {

namespace {

std::string fmt(const char* f, double a, double b = 0.0) {
    char buf[160];
    std::snprintf(buf, sizeof buf, f, a, b);
    return buf;
}

using Check = std::function<std::pair<bool, std::string>()>;

void run(VerifySummary& s, const std::string& name, const Check& check) {
    PropertyResult r;
    r.name = name;
    try {
        auto [ok, detail] = check();
        r.pass = ok;
        r.detail = detail;
    } catch (const std::exception& e) {
        r.pass = false;
        r.detail = std::string("threw: ") + e.what();
    }
    s.properties.push_back(r);
}

double five_point(const std::function<double(double)>& f, double x, double h) {
    return (f(x - 2 * h) - 8 * f(x - h) + 8 * f(x + h) - f(x + 2 * h)) / (12 * h);
}

}  // namespace

bool VerifySummary::all_pass() const {
    for (const PropertyResult& p : properties) {
        if (!p.pass) return false;
    }
    return true;
}

VerifySummary run_verify(const LoadedConfig& lc, VerifyLevel level, int workers) {
    VerifySummary s;
    s.level = level;
    const ExperimentConfig& cfg = lc.experiment;
    const CalibrationConfig& cal = cfg.calibration;
    const std::uint64_t seed = cfg.seed;

    run(s, "sphere_geometry.n3_closed_form", [] {
        double worst = 0.0;
        for (int i = 0; i <= 1000; ++i) {
            const double x = -1.0 + 2.0 * i / 1000.0;
            worst = std::max(worst, std::fabs(cap_measure(Dimension(3), x).value - 0.5 * (1.0 - x)));
        }
        return std::pair{worst <= 1e-12, fmt("max error %.3g", worst)};
    });
    run(s, "sphere_geometry.complement", [] {
        double worst = 0.0;
        for (int n : {4, 17, 64, 512}) {
            for (double x = 0.0; x <= 1.0; x += 0.0625) {
                worst = std::max(worst, std::fabs(cap_measure(Dimension(n), x).value + cap_measure(Dimension(n), -x).value - 1.0));
            }
        }
        return std::pair{worst <= 1e-13, fmt("max |Psi(x)+Psi(-x)-1| %.3g", worst)};
    });
    run(s, "sphere_geometry.derivative", [&] {
        RandomStream rng = RandomStream::derive(seed, {101});
        double worst = 0.0;
        for (int i = 0; i < 100; ++i) {
            const int n = 3 + static_cast<int>(rng.uniform_index(200));
            const double x = 0.9 * rng.uniform();
            // Differentiate the smaller side so cancellation stays bounded.
            const double fd = five_point([&](double t) { return cap_measure(Dimension(n), t).value; }, x, 1e-5);
            const double an = cap_measure_derivative(Dimension(n), x);
            worst = std::max(worst, std::fabs(fd / an - 1.0));
        }
        return std::pair{worst <= 1e-6, fmt("max relative error %.3g", worst)};
    });
    run(s, "sphere_geometry.inverse", [&] {
        RandomStream rng = RandomStream::derive(seed, {102});
        double worst = 0.0;
        for (int i = 0; i < 200; ++i) {
            const int n = 3 + static_cast<int>(rng.uniform_index(500));
            const double x = 1.8 * rng.uniform() - 0.9;
            const double v = cap_measure(Dimension(n), x).value;
            if (!(v > 0.0 && v < 1.0)) continue;
            // A double near 1 only pins the height to within eps * Psi / |Psi'|.
            const double conditioning = 4e-16 * v / std::fabs(cap_measure_derivative(Dimension(n), x));
            const double back = cap_height_for_measure(Dimension(n), v);
            worst = std::max(worst, std::fabs(back - x) / (1e-9 + conditioning));
        }
        return std::pair{worst <= 1.0, fmt("max height error %.3g of allowance", worst)};
    });
    run(s, "calibration.round_trip", [&] {
        RandomStream rng = RandomStream::derive(seed, {103});
        double worst = 0.0;
        const double a_lo = cal.a_min;
        const double a_hi = cal.resolved_a_max();
        const double b_lo = cal.resolved_b_min();
        const double b_hi = cal.resolved_b_max();
        int tried = 0;
        for (int i = 0; i < 400 && tried < 100; ++i) {
            ConeParams p{a_lo + (a_hi - a_lo) * rng.uniform(), b_lo + (b_hi - b_lo) * rng.uniform(), cal.delta0,
                         cal.delta1, Dimension(cal.n)};
            const double u = rng.uniform();
            if (p.x0() >= p.distance() || vertex(p) > cal.shell_lo() || p.distance() >= shell_radius(cal.delta1, u)) continue;
            const HeightJet j = height_jet(p, u);
            const double g = cap_measure(Dimension(cal.n), j.x).value;
            const double gp = cap_measure_derivative(Dimension(cal.n), j.x) * j.x_u;
            if (!(g > 0.0 && g < 0.5 && gp < 0.0)) continue;
            ++tried;
            const TangentSolution sol = solve_cone_for_tangent(u, g, gp, cal);
            worst = std::max({worst, std::fabs(sol.params.a / p.a - 1.0),
                              std::fabs(sol.params.x0() / p.x0() - 1.0)});
        }
        return std::pair{tried > 0 && worst <= 1e-6, fmt("%g pairs, max relative error %.3g", tried, worst)};
    });

    std::shared_ptr<PreparedPair> prep;
    run(s, "calibration.pairing", [&] {
        prep = std::make_shared<PreparedPair>(prepare_pair(cal));
        const PairingSummary& sum = prep->pair.summary;
        const bool ok = sum.relative_residual <= cal.tol_pair && sum.fit_error_1 <= cal.tol_fit &&
                        sum.fit_error_2 <= cal.tol_fit && sum.max_vertex <= cal.shell_lo();
        return std::pair{ok, fmt("relative residual %.3g, fit error %.3g", sum.relative_residual,
                                 std::max(sum.fit_error_1, sum.fit_error_2))};
    });
    if (prep) {
        run(s, "density_model.normalization", [&] {
            double worst = 0.0;
            for (const auto* d : {prep->density1.get(), prep->density2.get()}) {
                const double total = d->integrate([&](double r) { return d->density(r); }, 0.0, 1.0);
                worst = std::max(worst, std::fabs(total - 1.0));
            }
            return std::pair{worst <= 1e-8, fmt("max |integral - 1| %.3g", worst)};
        });
        ProfileDistanceReport dist;
        run(s, "density_model.shell_identity", [&] {
            dist = l1_profile_distance(*prep->density1, *prep->density2, prep->pair.shell_lo);
            // On the shell the paired densities differ by the constant factor e^-kappa Z1/Z2.
            const double factor = std::exp(-prep->pair.kappa) * prep->density1->normalizer() /
                                  prep->density2->normalizer();
            const double predicted = dist.shell_mass_1 * std::fabs(1.0 - factor);
            const double err = std::fabs(dist.l1_shell - predicted);
            return std::pair{err <= 1e-6, fmt("shell l1 %.3g vs predicted %.3g", dist.l1_shell, predicted)};
        });
        run(s, "density_model.volume_gap", [&] {
            const double ratio = prep->density1->normalizer() / prep->density2->normalizer();
            const double target = std::exp(prep->pair.kappa);
            const double rel = std::fabs(ratio / target - 1.0);
            const double allowed = 1e-3 + dist.leak_1 + dist.leak_2;
            return std::pair{rel <= allowed, fmt("analytic ratio %.9g, relative error %.3g", ratio, rel)};
        });
        run(s, "deletion_process.single_point_law", [&] {
            const double r = 1.0 - 0.5 * cal.delta1;
            BallPoint x(static_cast<std::size_t>(cal.n), 0.0);
            x[0] = r;
            const std::size_t bodies = 4000;
            RandomStream rng = RandomStream::derive(seed, {104});
            std::size_t inside = 0;
            for (std::size_t b = 0; b < bodies; ++b) {
                inside += body_membership(sample_body(prep->spec1, rng), x) ? 1 : 0;
            }
            const double p = tilde_f(prep->spec1, r);
            const double se = std::sqrt(p * (1 - p) / static_cast<double>(bodies));
            const double z = se > 0 ? (static_cast<double>(inside) / static_cast<double>(bodies) - p) / se : 0.0;
            return std::pair{std::fabs(z) <= 4.0, fmt("z = %.3g at analytic %.4g", z, p)};
        });
        run(s, "experiment.worker_independence", [&] {
            const VolumeResult a = measure_volumes(*prep, 6, 300, seed, 1);
            const VolumeResult b = measure_volumes(*prep, 6, 300, seed, std::max(2, workers));
            const bool ok = a.per_body_1 == b.per_body_1 && a.per_body_2 == b.per_body_2;
            return std::pair{ok, std::string(ok ? "identical" : "per-body volumes differ")};
        });
    }
    run(s, "simd.equivalence", [&] {
        const simd::KernelTable& ref = simd::scalar_kernels();
        const simd::KernelTable& act = simd::active_kernels();
        RandomStream rng = RandomStream::derive(seed, {105});
        double worst = 0.0;
        bool hits_agree = true;
        for (std::size_t n : {3u, 5u, 64u, 67u}) {
            const std::size_t stride = (n + 3) / 4 * 4;
            const std::size_t count = 37;
            std::vector<double> rows(count * stride, 0.0);
            std::vector<double> point(n);
            for (std::size_t i = 0; i < count; ++i) sample_unit_sphere_into({rows.data() + i * stride, n}, rng);
            sample_unit_ball_into(point, rng);
            std::vector<double> o1(count), o2(count);
            ref.dot_batch(rows.data(), count, stride, point.data(), n, o1.data());
            act.dot_batch(rows.data(), count, stride, point.data(), n, o2.data());
            for (std::size_t i = 0; i < count; ++i) worst = std::max(worst, std::fabs(o1[i] - o2[i]));
            const double lo[] = {0.1, -0.3};
            const double hi[] = {0.4, -0.05};
            const simd::ExclusionView ex{lo, hi, 2};
            const double inv = 1.0 / norm(point);
            hits_agree = hits_agree && ref.first_hit(rows.data(), count, stride, point.data(), n, inv, ex) ==
                                           act.first_hit(rows.data(), count, stride, point.data(), n, inv, ex);
        }
        return std::pair{worst <= 1e-12 && hits_agree,
                         std::string(simd::isa_name(act.isa)) + fmt(" vs scalar, max dot difference %.3g", worst)};
    });

    if (level == VerifyLevel::full && prep) {
        VolumeResult vol;
        run(s, "experiment.volume_monte_carlo", [&] {
            vol = measure_volumes(*prep, cfg.volume_bodies, cfg.volume_samples, seed, workers);
            const double rel = vol.relative_error;
            return std::pair{rel <= 0.05, fmt("Monte Carlo ratio %.5g, relative error %.3g", vol.ratio, rel)};
        });
        DiagnosticsResult diag;
        bool have_diag = false;
        run(s, "experiment.lemma_diagnostics", [&] {
            diag = run_lemma_diagnostics(cfg, *prep, vol, workers);
            have_diag = true;
            return std::pair{true, std::string("completed")};
        });
        if (have_diag) {
            s.properties.push_back({"diagnostics.density_law", diag.density_law_pass,
                                    std::to_string(diag.density_law.size()) + " radius/family cells"});
            s.properties.push_back({"diagnostics.thinning", diag.thinning_pass, "cut count mean and variance"});
            for (int f = 0; f < 2; ++f) {
                const FamilyDiagnostics& fd = diag.family[static_cast<std::size_t>(f)];
                const std::string tag = "family" + std::to_string(f + 1);
                s.properties.push_back({"diagnostics.mutual_cap." + tag, fd.mutual_pass,
                                        fmt("mean %.4g vs bound %.4g", fd.mutual_mean, fd.mutual_bound)});
                s.properties.push_back({"diagnostics.concentration." + tag, fd.concentration_pass,
                                        fmt("Var/Mean^2 %.4g vs prediction %.4g", fd.concentration,
                                            fd.concentration_prediction)});
                s.properties.push_back({"diagnostics.factorization." + tag, fd.factorization_pass,
                                        fmt("z = %.3g, product %.4g", fd.factorization_z, fd.factorization_product)});
            }
        }
        run(s, "experiment.kappa_monotonicity", [&] {
            std::string detail;
            double last_ratio = 0.0;
            bool ok = true;
            for (double kappa : {0.25, 0.5, 0.75, 1.0}) {
                CalibrationConfig c = cal;
                c.kappa = kappa;
                const PreparedPair p = prepare_pair(c);
                const double ratio = p.density1->normalizer() / p.density2->normalizer();
                const ProfileDistanceReport d = l1_profile_distance(*p.density1, *p.density2, p.pair.shell_lo);
                ok = ok && ratio > last_ratio;
                last_ratio = ratio;
                detail += fmt("kappa %.3g: ratio %.6g", kappa, ratio) + fmt(", l1 %.3g; ", d.l1);
            }
            return std::pair{ok, detail};
        });
    }
    return s;
}

std::string verify_summary_json(const VerifySummary& summary, const std::string& config_hash) {
    nlohmann::json j;
    j["level"] = summary.level == VerifyLevel::quick ? "quick" : "full";
    j["config_hash"] = config_hash;
    nlohmann::json props = nlohmann::json::array();
    std::size_t failed = 0;
    for (const PropertyResult& p : summary.properties) {
        props.push_back({{"name", p.name}, {"pass", p.pass}, {"detail", p.detail}});
        failed += p.pass ? 0 : 1;
    }
    j["properties"] = props;
    j["passed"] = summary.properties.size() - failed;
    j["failed"] = failed;
    j["pass"] = failed == 0;
    return j.dump(2) + "\n";
}

}  // namespace volind
