#include "volind/density_model.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <cstdio>
#include <limits>

#include "volind/error.hpp"

namespace volind {

namespace {

constexpr int kQuadDepth = 30;
// |p1 - p2| changes sign about twice per calibration cell on the shell.
constexpr double kL1Tol = 1e-10;

// Bisect until the Kronrod error estimate of each panel is within its share of the budget.
double adaptive_panel(const std::function<double(double)>& f, double a, double b, double tol, int depth) {
    double err = 0.0;
    const double v = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 0, 0.0, &err);
    // Boost reports the error of the panel mapped onto [-1, 1].
    err *= 0.5 * (b - a);
    if (err <= tol || depth >= kQuadDepth) return v;
    const double mid = 0.5 * (a + b);
    return adaptive_panel(f, a, mid, 0.5 * tol, depth + 1) + adaptive_panel(f, mid, b, 0.5 * tol, depth + 1);
}

std::vector<double> radial_breaks(const ConeIndexSet& set) {
    std::vector<double> b = set.breakpoints();
    b.push_back(1.0 - set.delta1());
    // The weight n r^{n-1} lives in a window of width ~1/n below 1.
    const double n = set.n().value();
    for (double w = 1.0 / n; w < 0.5; w *= 2.0) b.push_back(1.0 - w);
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
    return b;
}

}  // namespace

double integrate_piecewise(const std::function<double(double)>& f, double a, double b,
                           const std::vector<double>& breaks, double tol) {
    if (!(b > a)) return 0.0;
    std::vector<double> cuts{a};
    for (double x : breaks) {
        if (x > cuts.back() && x < b) cuts.push_back(x);
    }
    cuts.push_back(b);
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        total += adaptive_panel(f, cuts[i], cuts[i + 1], tol * (cuts[i + 1] - cuts[i]) / (b - a), 0);
    }
    return total;
}

double tilde_f(const BodyFamilySpec& spec, double r) {
    validate(spec);
    if (!(r >= 0.0 && r <= 1.0)) throw DomainError("tilde_f: r must lie in [0, 1]");
    if (spec.m == 0.0) return 1.0;
    return std::exp(-spec.m * spec.index_set->excluded_fraction(r));
}

RadialDensity::RadialDensity(BodyFamilySpec spec) : spec_(std::move(spec)) {
    validate(spec_);
    breaks_ = radial_breaks(*spec_.index_set);
    const double n = spec_.n().value();
    const double m = spec_.m;
    const auto& set = *spec_.index_set;
    const std::function<double(double)> f = [&](double r) {
        return r <= 0.0 ? 0.0 : n * std::pow(r, n - 1.0) * std::exp(-m * set.excluded_fraction(r));
    };
    cuts_ = {0.0};
    for (double x : breaks_) {
        if (x > 0.0 && x < 1.0) cuts_.push_back(x);
    }
    cuts_.push_back(1.0);
    cumulative_.assign(cuts_.size(), 0.0);
    for (std::size_t i = 0; i + 1 < cuts_.size(); ++i) {
        cumulative_[i + 1] = cumulative_[i] + integrate_piecewise(f, cuts_[i], cuts_[i + 1], {},
                                                                  1e-12 * (cuts_[i + 1] - cuts_[i]));
    }
    z_ = cumulative_.back();
    if (!(z_ > 0.0) || z_ > 1.0 + 1e-12) {
        throw NumericalError("radial normalizer outside (0, 1]: " + std::to_string(z_));
    }
    z_ = std::min(z_, 1.0);
    log_z_ = std::log(z_);
}

double RadialDensity::profile(double r) const { return spec_.index_set->excluded_fraction(r); }

double RadialDensity::log_unnormalized(double r) const {
    if (r <= 0.0) return -std::numeric_limits<double>::infinity();
    const double n = spec_.n().value();
    return (n - 1.0) * std::log(r) + std::log(n) - spec_.m * profile(r);
}

double RadialDensity::log_density(double r) const { return log_unnormalized(r) - log_z_; }

double RadialDensity::density(double r) const {
    if (!(r >= 0.0 && r <= 1.0)) return 0.0;
    return std::exp(log_density(r));
}

double RadialDensity::integrate(const std::function<double(double)>& f, double a, double b) const {
    return integrate_piecewise(f, a, b, breaks_);
}

double RadialDensity::tail_mass(double r) const {
    if (r >= 1.0) return 0.0;
    if (r <= 0.0) return 1.0;
    const auto k = static_cast<std::size_t>(std::upper_bound(cuts_.begin(), cuts_.end(), r) - cuts_.begin()) - 1;
    const double partial = integrate_piecewise([this](double s) { return density(s); }, r, cuts_[k + 1], {},
                                               1e-12 * (cuts_[k + 1] - r));
    return (cumulative_.back() - cumulative_[k + 1]) / z_ + partial;
}

double RadialDensity::quantile(double p) const {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("quantile: p must lie in (0, 1)");
    const double want = 1.0 - p;
    double lo = 0.0;
    double hi = 1.0;
    for (int it = 0; it < 80 && hi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (tail_mass(mid) > want) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double expected_relative_volume(const BodyFamilySpec& spec) {
    if (spec.m == 0.0) {
        validate(spec);
        return 1.0;
    }
    return RadialDensity(spec).normalizer();
}

ProfileDistanceReport l1_profile_distance(const RadialDensity& d1, const RadialDensity& d2, double shell_lo) {
    if (d1.spec().n().value() != d2.spec().n().value()) {
        throw DomainError("l1_profile_distance: specs must share n");
    }
    ProfileDistanceReport rep;
    rep.shell_lo = shell_lo >= 0.0 ? shell_lo : 1.0 - d1.spec().index_set->delta1();
    std::vector<double> breaks = radial_breaks(*d1.spec().index_set);
    const std::vector<double> more = radial_breaks(*d2.spec().index_set);
    breaks.insert(breaks.end(), more.begin(), more.end());
    breaks.push_back(rep.shell_lo);
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
    const auto diff = [&](double r) { return std::fabs(d1.density(r) - d2.density(r)); };
    rep.l1_shell = integrate_piecewise(diff, rep.shell_lo, 1.0, breaks, kL1Tol);
    rep.l1 = rep.l1_shell + integrate_piecewise(diff, 0.0, rep.shell_lo, breaks, kL1Tol);
    rep.shell_mass_1 = integrate_piecewise([&](double r) { return d1.density(r); }, rep.shell_lo, 1.0, breaks);
    rep.shell_mass_2 = integrate_piecewise([&](double r) { return d2.density(r); }, rep.shell_lo, 1.0, breaks);
    rep.leak_1 = integrate_piecewise([&](double r) { return d1.density(r); }, 0.0, rep.shell_lo, breaks);
    rep.leak_2 = integrate_piecewise([&](double r) { return d2.density(r); }, 0.0, rep.shell_lo, breaks);
    return rep;
}

ProfileDistanceReport l1_profile_distance(const BodyFamilySpec& spec1, const BodyFamilySpec& spec2) {
    return l1_profile_distance(RadialDensity(spec1), RadialDensity(spec2));
}

std::string to_key_value(const ProfileDistanceReport& r) {
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "l1 = %.17g\nl1_shell = %.17g\nshell_lo = %.17g\nshell_mass_1 = %.17g\nshell_mass_2 = %.17g\n"
                  "leak_1 = %.17g\nleak_2 = %.17g\n",
                  r.l1, r.l1_shell, r.shell_lo, r.shell_mass_1, r.shell_mass_2, r.leak_1, r.leak_2);
    return buf;
}

double profile_moment(const RadialDensity& density, int k) {
    const double n = density.spec().n().value();
    return density.integrate(
        [&](double r) { return r <= 0.0 ? 0.0 : n * std::pow(r, n - 1.0) * std::pow(density.profile(r), k); }, 0.0,
        1.0);
}

double empirical_radial_distance(const std::vector<PointSequence>& sample1,
                                 const std::vector<PointSequence>& sample2, int bins) {
    if (bins < 1) throw DomainError("empirical_radial_distance: bins must be positive");
    auto histogram = [bins](const std::vector<PointSequence>& sample, std::size_t& dim) {
        std::vector<double> h(static_cast<std::size_t>(bins), 0.0);
        std::size_t total = 0;
        for (const PointSequence& seq : sample) {
            if (dim == 0) dim = seq.dim();
            if (seq.dim() != dim) throw DomainError("empirical_radial_distance: dimensions differ");
            for (std::size_t j = 0; j < seq.size(); ++j) {
                const double v = std::pow(std::min(norm(seq.point(j)), 1.0), static_cast<double>(dim));
                const auto b = std::min(static_cast<std::size_t>(v * bins), static_cast<std::size_t>(bins - 1));
                h[b] += 1.0;
                ++total;
            }
        }
        if (total == 0) throw DomainError("empirical_radial_distance: empty sample");
        for (double& x : h) x /= static_cast<double>(total);
        return h;
    };
    std::size_t dim = 0;
    const std::vector<double> h1 = histogram(sample1, dim);
    const std::vector<double> h2 = histogram(sample2, dim);
    double l1 = 0.0;
    for (int b = 0; b < bins; ++b) l1 += std::fabs(h1[static_cast<std::size_t>(b)] - h2[static_cast<std::size_t>(b)]);
    return l1;
}

}  // namespace volind
