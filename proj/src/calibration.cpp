#include "volind/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <string>

#include "volind/error.hpp"

namespace volind {

namespace {

using nlohmann::json;

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// Cap height and its u-derivative as functions of d = a*delta0 and x0, with the Jacobian.
struct Jet {
    double x;
    double x_u;
    double dx_dd;
    double dx_dx0;
    double dxu_dd;
    double dxu_dx0;
};

Jet jet_dx0(double d, double x0, double r, double delta1) {
    const double rd = std::sqrt((r - d) * (r + d));
    const double e = std::asin(d / r) - std::asin(d) + std::asin(x0);
    const double se = std::sin(e);
    const double ce = std::cos(e);
    const double D = delta1 * d / (r * rd);
    const double de_dd = 1.0 / rd - 1.0 / std::sqrt((1.0 - d) * (1.0 + d));
    const double de_dx0 = 1.0 / std::sqrt((1.0 - x0) * (1.0 + x0));
    const double dD_dd = delta1 * r / (rd * rd * rd);
    return {se,
            ce * D,
            ce * de_dd,
            ce * de_dx0,
            -se * de_dd * D + ce * dD_dd,
            -se * D * de_dx0};
}

bool admissible(double d, double x0, double r) { return x0 > 0.0 && x0 < d && d < r && d < 1.0; }

struct Box {
    double a_lo, a_hi, b_lo, b_hi, shell_lo;
};

Box box_of(const CalibrationConfig& cfg) {
    return {cfg.a_min, cfg.resolved_a_max(), cfg.resolved_b_min(), cfg.resolved_b_max(), cfg.shell_lo()};
}

}  // namespace

double CalibrationConfig::resolved_a_max() const {
    return a_max > 0.0 ? a_max : std::min(200.0, 0.9 / delta0);
}

double CalibrationConfig::resolved_b_min() const {
    return (b_min == 0.0 && b_max == 0.0) ? -0.5 / delta1 : b_min;
}

double CalibrationConfig::resolved_b_max() const {
    return (b_min == 0.0 && b_max == 0.0) ? 1.0 / delta1 : b_max;
}

void validate(const CalibrationConfig& cfg) {
    Dimension{cfg.n};
    if (!(cfg.delta0 > 0.0 && cfg.delta0 < 1.0) || !(cfg.delta1 > 0.0 && cfg.delta1 < 0.5)) {
        throw DomainError("calibration: need 0 < delta0 < 1 and 0 < delta1 < 1/2");
    }
    if (!(cfg.a_min > 0.0) || !(cfg.resolved_a_max() > cfg.a_min) ||
        !(cfg.resolved_b_max() > cfg.resolved_b_min())) {
        throw DomainError("calibration: empty (a, b) box");
    }
    if (!(cfg.kappa >= 0.0)) throw DomainError("calibration: kappa must be non-negative");
    if (cfg.grid_size < 1 || cfg.check_grid < 2) {
        throw DomainError("calibration: grid_size >= 1 and check_grid >= 2 required");
    }
    if (!(cfg.tol_fit > 0.0) || !(cfg.tol_pair > 0.0) || cfg.max_newton < 1) {
        throw DomainError("calibration: tolerances and max_newton must be positive");
    }
}

HeightJet height_jet(const ConeParams& p, double u) {
    validate(p);
    const double r = shell_radius(p.delta1, u);
    if (!(p.distance() < r)) throw DomainError("height_jet: a*delta0 >= r");
    const Jet j = jet_dx0(p.distance(), p.x0(), r, p.delta1);
    return {j.x, j.x_u};
}

std::pair<double, double> linearized_seed(double u, double g0, double g0p, const CalibrationConfig& cfg) {
    const Dimension n{cfg.n};
    const double k = cfg.delta0 * cfg.delta1 * cap_measure_derivative(n, cfg.delta0);
    const double a = g0p / k;
    const double b = (g0 - cap_measure(n, cfg.delta0).value) / k - a * u;
    return {a, b};
}

TangentSolution solve_cone_for_tangent(double u, double g0, double g0p, const CalibrationConfig& cfg) {
    if (!(u >= 0.0 && u <= 1.0)) throw DomainError("solve_cone_for_tangent: u must lie in [0, 1]");
    if (!(g0 > 0.0 && g0 < 0.5)) {
        throw DomainError("solve_cone_for_tangent: target value " + fmt(g0) + " outside (0, 1/2)");
    }
    if (!(g0p < 0.0)) {
        throw DomainError("solve_cone_for_tangent: target derivative " + fmt(g0p) +
                          " must be negative (profiles decrease in u)");
    }
    const Dimension n{cfg.n};
    const double d0 = cfg.delta0;
    const double d1 = cfg.delta1;
    const double r = shell_radius(d1, u);
    const double xt = cap_height_for_measure(n, g0);
    const double dpsi = cap_measure_derivative(n, xt);
    if (!(dpsi < 0.0)) throw NumericalError("solve_cone_for_tangent: flat cap measure at target");
    const double xut = g0p / dpsi;

    auto residual = [&](double d, double x0, double& f1, double& f2) {
        const Jet j = jet_dx0(d, x0, r, d1);
        f1 = j.x - xt;
        f2 = j.x_u - xut;
        return std::max(std::fabs(f1) / std::max(std::fabs(xt), 1e-300), std::fabs(f2) / xut);
    };

    auto newton = [&](double& d, double& x0, int budget, int& steps) {
        double f1 = 0.0;
        double f2 = 0.0;
        double err = residual(d, x0, f1, f2);
        for (int it = 0; it < budget; ++it) {
            if (err < 1e-14) return true;
            ++steps;
            const Jet j = jet_dx0(d, x0, r, d1);
            const double det = j.dx_dd * j.dxu_dx0 - j.dx_dx0 * j.dxu_dd;
            if (!(std::fabs(det) > 0.0) || !std::isfinite(det)) return false;
            const double sd = (f1 * j.dxu_dx0 - f2 * j.dx_dx0) / det;
            const double sx = (j.dx_dd * f2 - j.dxu_dd * f1) / det;
            double lambda = 1.0;
            bool moved = false;
            for (int h = 0; h < 40; ++h, lambda *= 0.5) {
                const double nd = d - lambda * sd;
                const double nx = x0 - lambda * sx;
                if (!admissible(nd, nx, r)) continue;
                double g1 = 0.0;
                double g2 = 0.0;
                const double nerr = residual(nd, nx, g1, g2);
                if (nerr < err || h == 39) {
                    d = nd;
                    x0 = nx;
                    f1 = g1;
                    f2 = g2;
                    err = nerr;
                    moved = true;
                    break;
                }
            }
            if (!moved) return false;
        }
        return err < 1e-12;
    };

    TangentSolution sol;
    const auto [a_seed, b_seed] = linearized_seed(u, g0, g0p, cfg);
    double d = a_seed * d0;
    double x0 = d0 * (1.0 + b_seed * d1);
    bool ok = admissible(d, x0, r) && newton(d, x0, cfg.max_newton, sol.newton_steps);
    if (!ok) {
        // Exact inversion in cap-height space.
        const double alpha = std::asin(xt);
        const double q = xut / (d1 * std::cos(alpha));
        d = q * r * r / std::sqrt(1.0 + q * q * r * r);
        const double phi = std::asin(d / r) - alpha;
        x0 = std::sin(std::asin(d) - phi);
        sol.used_closed_form = true;
        if (!admissible(d, x0, r)) {
            throw NumericalError("solve_cone_for_tangent: no admissible cone at u=" + fmt(u) +
                                 " (d=" + fmt(d) + ", x0=" + fmt(x0) + ")");
        }
        int polish = 0;
        newton(d, x0, 8, polish);
        sol.newton_steps += polish;
    }

    ConeParams p{d / d0, (x0 / d0 - 1.0) / d1, d0, d1, n};
    const Jet j = jet_dx0(d, x0, r, d1);
    const double g = cap_measure(n, j.x).value;
    const double gp = cap_measure_derivative(n, j.x) * j.x_u;
    sol.residual = std::max(std::fabs(g - g0) / g0, std::fabs(gp - g0p) / std::fabs(g0p));
    sol.params = p;
    if (!(sol.residual <= 1e-8)) {
        throw NumericalError("solve_cone_for_tangent: did not converge at u=" + fmt(u) +
                             ", residual " + fmt(sol.residual));
    }
    const Box box = box_of(cfg);
    const double vx = vertex(p);
    if (p.a < box.a_lo || p.a > box.a_hi || p.b < box.b_lo || p.b > box.b_hi || vx > box.shell_lo) {
        throw NumericalError("solve_cone_for_tangent: solution (a=" + fmt(p.a) + ", b=" + fmt(p.b) +
                             ", vertex=" + fmt(vx) + ") at u=" + fmt(u) +
                             " lies outside the configured box, residual " + fmt(sol.residual));
    }
    return sol;
}

FitError fit_error(const ConeIndexSet& set, const ProfileTarget& target, int grid_size, int refine) {
    FitError fe;
    const double d1 = set.delta1();
    for (int k = 0; k < grid_size; ++k) {
        const double u = grid_size == 1 ? 0.0 : static_cast<double>(k) / (grid_size - 1);
        const double e = envelope_profile(set, shell_radius(d1, u)).value;
        fe.at_nodes = std::max(fe.at_nodes, std::fabs(e - target.value_at(u)));
    }
    const int fine = std::max(2, refine * std::max(1, grid_size - 1) + 1);
    for (int k = 0; k < fine; ++k) {
        const double u = static_cast<double>(k) / (fine - 1);
        const double diff = envelope_profile(set, shell_radius(d1, u)).value - target.value_at(u);
        fe.overshoot = std::max(fe.overshoot, diff);
        fe.undershoot = std::max(fe.undershoot, -diff);
    }
    return fe;
}

ConeIndexSet build_envelope(const ProfileTarget& target, int grid_size, const CalibrationConfig& cfg) {
    if (grid_size < 1) throw DomainError("build_envelope: grid_size must be at least 1");
    std::vector<ConeParams> cones;
    cones.reserve(static_cast<std::size_t>(grid_size));
    for (int k = 0; k < grid_size; ++k) {
        const double u = grid_size == 1 ? 0.0 : static_cast<double>(k) / (grid_size - 1);
        cones.push_back(solve_cone_for_tangent(u, target.value_at(u), target.derivative_at(u), cfg).params);
    }
    ConeIndexSet set(std::move(cones));
    const FitError fe = fit_error(set, target, grid_size, 10);
    if (fe.at_nodes > cfg.tol_fit) {
        throw InvariantViolation("build_envelope: node fit error " + fmt(fe.at_nodes) +
                                 " exceeds tol_fit " + fmt(cfg.tol_fit));
    }
    if (fe.overshoot > cfg.tol_fit) {
        throw InvariantViolation("build_envelope: envelope exceeds the target by " + fmt(fe.overshoot) +
                                 "; target curvature is below the cone curvature");
    }
    return set;
}

ProfileTarget make_g1_target(const CalibrationConfig& cfg) {
    validate(cfg);
    const Dimension n{cfg.n};
    ProfileTarget t;
    t.delta0 = cfg.delta0;
    t.delta1 = cfg.delta1;
    t.n = cfg.n;
    if (cfg.target == TargetShape::cap_height) {
        const ConeParams ref{cfg.target_a, cfg.target_b, cfg.delta0, cfg.delta1, n};
        validate(ref);
        const double bend = cfg.cap_bend * cfg.delta0 * cfg.delta1;
        t.curvature = cfg.cap_bend;
        t.value_at = [ref, bend, n](double u) {
            const HeightJet j = height_jet(ref, u);
            return cap_measure(n, j.x - bend * u * u).value;
        };
        t.derivative_at = [ref, bend, n](double u) {
            const HeightJet j = height_jet(ref, u);
            return cap_measure_derivative(n, j.x - bend * u * u) * (j.x_u - 2.0 * bend * u);
        };
        return t;
    }
    const ProfileTarget g2 = make_g2_target(cfg);
    const double g2_at_0 = g2.value_at(0.0);
    t.curvature = g2.curvature;
    t.value_at = [g2, g2_at_0](double u) { return 2.0 * g2.value_at(u) - g2_at_0; };
    t.derivative_at = [g2](double u) { return 2.0 * g2.derivative_at(u); };
    return t;
}

ProfileTarget make_g2_target(const CalibrationConfig& cfg) {
    validate(cfg);
    const Dimension n{cfg.n};
    ProfileTarget t;
    t.delta0 = cfg.delta0;
    t.delta1 = cfg.delta1;
    t.n = cfg.n;
    if (cfg.target == TargetShape::cap_height) {
        const ProfileTarget g1 = make_g1_target(cfg);
        const double g1_at_0 = g1.value_at(0.0);
        t.curvature = g1.curvature;
        t.value_at = [g1, g1_at_0](double u) { return 0.5 * (g1.value_at(u) + g1_at_0); };
        t.derivative_at = [g1](double u) { return 0.5 * g1.derivative_at(u); };
        return t;
    }
    const double k = std::fabs(cfg.delta0 * cfg.delta1 * cap_measure_derivative(n, cfg.delta0));
    const double c = cfg.quadratic_scale * k;
    const double base = cap_measure(n, cfg.delta0).value;
    t.curvature = c;
    t.value_at = [base, c](double u) { return base + c * (2.0 - u) * (2.0 - u); };
    t.derivative_at = [c](double u) { return -2.0 * c * (2.0 - u); };
    return t;
}

PairingSummary evaluate_pairing(const ConeIndexSet& I1, const ConeIndexSet& I2, double m1, double m2,
                                int check_grid) {
    PairingSummary s;
    const double d1 = I1.delta1();
    const double e1_top = envelope_profile(I1, 1.0).value;
    s.boundary_gap = std::fabs(e1_top - envelope_profile(I2, 1.0).value);
    for (int j = 0; j < check_grid; ++j) {
        const double u = static_cast<double>(j) / (check_grid - 1);
        const double r = shell_radius(d1, u);
        const double res = m2 * envelope_profile(I2, r).value - m1 * envelope_profile(I1, r).value -
                           m1 * e1_top;
        s.max_residual = std::max(s.max_residual, std::fabs(res));
    }
    const double scale = m1 * e1_top;
    s.relative_residual = scale > 0.0 ? s.max_residual / scale : 0.0;
    s.min_normal_angle = 10.0;
    for (const ConeIndexSet* set : {&I1, &I2}) {
        for (const ConeParams& p : set->entries()) s.min_normal_angle = std::min(s.min_normal_angle, normal_angle(p));
        s.max_vertex = std::max(s.max_vertex, set->max_vertex());
    }
    return s;
}

ProfilePair build_profile_pair(const CalibrationConfig& cfg) {
    validate(cfg);
    const ProfileTarget t1 = make_g1_target(cfg);
    const ProfileTarget t2 = make_g2_target(cfg);
    if (!(t1.value_at(1.0) > 0.0)) {
        throw NumericalError("calibration: g1 target is not positive on the shell (g1(u=1) = " +
                             fmt(t1.value_at(1.0)) + ")");
    }
    auto I1 = std::make_shared<const ConeIndexSet>(build_envelope(t1, cfg.grid_size, cfg));
    auto I2 = std::make_shared<const ConeIndexSet>(build_envelope(t2, cfg.grid_size, cfg));
    ProfilePair pair;
    pair.I1 = I1;
    pair.I2 = I2;
    const double g1_top = envelope_profile(*I1, 1.0).value;
    pair.m1 = cfg.kappa > 0.0 ? cfg.kappa / g1_top : 0.0;
    pair.m2 = 2.0 * pair.m1;
    pair.shell_lo = cfg.shell_lo();
    pair.kappa = cfg.kappa;
    pair.tol_fit = cfg.tol_fit;
    pair.tol_pair = cfg.tol_pair;
    pair.grid_size = cfg.grid_size;
    pair.check_grid = cfg.check_grid;
    pair.summary = evaluate_pairing(*I1, *I2, pair.m1, pair.m2, cfg.check_grid);
    pair.summary.fit_error_1 = fit_error(*I1, t1, cfg.grid_size, 1).at_nodes;
    pair.summary.fit_error_2 = fit_error(*I2, t2, cfg.grid_size, 1).at_nodes;
    return pair;
}

void check_profile_pair(const ProfilePair& pair) {
    const PairingSummary& s = pair.summary;
    if (pair.m2 != 2.0 * pair.m1 || pair.m1 < 0.0) {
        throw InvariantViolation("profile pair: m2 must equal 2*m1 >= 0");
    }
    if (s.relative_residual > pair.tol_pair) {
        throw InvariantViolation("profile pair: pairing residual " + fmt(s.relative_residual) +
                                 " exceeds tol_pair " + fmt(pair.tol_pair));
    }
    if (s.boundary_gap > pair.tol_fit) {
        throw InvariantViolation("profile pair: |g1(1) - g2(1)| = " + fmt(s.boundary_gap) +
                                 " exceeds tol_fit " + fmt(pair.tol_fit));
    }
    if (std::max(s.fit_error_1, s.fit_error_2) > pair.tol_fit) {
        throw InvariantViolation("profile pair: node fit error exceeds tol_fit");
    }
}

ProfilePair make_profile_pair(const CalibrationConfig& cfg) {
    ProfilePair pair = build_profile_pair(cfg);
    check_profile_pair(pair);
    return pair;
}

namespace {

json set_to_json(const ConeIndexSet& set) {
    json entries = json::array();
    for (const ConeParams& p : set.entries()) entries.push_back({{"a", p.a}, {"b", p.b}});
    return {{"n", set.n().value()}, {"delta0", set.delta0()}, {"delta1", set.delta1()}, {"entries", entries}};
}

ConeIndexSet set_from_json(const json& j) {
    const Dimension n{j.at("n").get<int>()};
    const double d0 = j.at("delta0").get<double>();
    const double d1 = j.at("delta1").get<double>();
    std::vector<ConeParams> entries;
    for (const json& e : j.at("entries")) {
        entries.push_back({e.at("a").get<double>(), e.at("b").get<double>(), d0, d1, n});
    }
    return ConeIndexSet(std::move(entries));
}

template <class F>
auto parse_or_throw(const std::string& text, F&& f) {
    try {
        return f(json::parse(text));
    } catch (const json::exception& e) {
        throw IoError(std::string("malformed document: ") + e.what());
    }
}

}  // namespace

std::string to_json(const ConeIndexSet& set) { return set_to_json(set).dump(2); }

ConeIndexSet cone_index_set_from_json(const std::string& text) {
    return parse_or_throw(text, [](const json& j) { return set_from_json(j); });
}

std::string to_json(const ProfilePair& pair) {
    const PairingSummary& s = pair.summary;
    json j = {
        {"I1", set_to_json(*pair.I1)},
        {"I2", set_to_json(*pair.I2)},
        {"m1", pair.m1},
        {"m2", pair.m2},
        {"n", pair.I1->n().value()},
        {"delta0", pair.I1->delta0()},
        {"delta1", pair.I1->delta1()},
        {"kappa", pair.kappa},
        {"shell_lo", pair.shell_lo},
        {"tolerances", {{"tol_fit", pair.tol_fit}, {"tol_pair", pair.tol_pair}}},
        {"grid", {{"grid_size", pair.grid_size}, {"check_grid", pair.check_grid}}},
        {"summary",
         {{"max_residual", s.max_residual},
          {"relative_residual", s.relative_residual},
          {"boundary_gap", s.boundary_gap},
          {"fit_error_1", s.fit_error_1},
          {"fit_error_2", s.fit_error_2},
          {"min_normal_angle", s.min_normal_angle},
          {"max_vertex", s.max_vertex}}},
    };
    return j.dump(2);
}

ProfilePair profile_pair_from_json(const std::string& text) {
    return parse_or_throw(text, [](const json& j) {
        ProfilePair p;
        p.I1 = std::make_shared<const ConeIndexSet>(set_from_json(j.at("I1")));
        p.I2 = std::make_shared<const ConeIndexSet>(set_from_json(j.at("I2")));
        p.m1 = j.at("m1").get<double>();
        p.m2 = j.at("m2").get<double>();
        p.kappa = j.at("kappa").get<double>();
        p.shell_lo = j.at("shell_lo").get<double>();
        p.tol_fit = j.at("tolerances").at("tol_fit").get<double>();
        p.tol_pair = j.at("tolerances").at("tol_pair").get<double>();
        p.grid_size = j.at("grid").at("grid_size").get<int>();
        p.check_grid = j.at("grid").at("check_grid").get<int>();
        if (j.contains("summary")) {
            const json& s = j.at("summary");
            p.summary.max_residual = s.value("max_residual", 0.0);
            p.summary.relative_residual = s.value("relative_residual", 0.0);
            p.summary.boundary_gap = s.value("boundary_gap", 0.0);
            p.summary.fit_error_1 = s.value("fit_error_1", 0.0);
            p.summary.fit_error_2 = s.value("fit_error_2", 0.0);
            p.summary.min_normal_angle = s.value("min_normal_angle", 0.0);
            p.summary.max_vertex = s.value("max_vertex", 0.0);
        }
        return p;
    });
}

}  // namespace volind
