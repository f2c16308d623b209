#include "volind/sphere_geometry.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "volind/error.hpp"

namespace volind {

namespace {

constexpr double kFpMin = 1e-300;
constexpr double kCfEps = 1e-16;
constexpr int kCfMaxIter = 20000;

double log_beta(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

// Modified Lentz evaluation of the incomplete beta continued fraction.
double beta_continued_fraction(double a, double b, double x) {
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kCfMaxIter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kCfEps) {
            return h;
        }
    }
    throw NumericalError("incomplete beta continued fraction did not converge");
}

// z and 1 - z are passed separately so that z close to 1 keeps full precision.
double log_ibeta(double a, double b, double z, double one_minus_z) {
    if (z <= 0.0) return -std::numeric_limits<double>::infinity();
    if (one_minus_z <= 0.0) return 0.0;
    const double log_front = a * std::log(z) + b * std::log(one_minus_z) - log_beta(a, b);
    if (z < (a + 1.0) / (a + b + 2.0)) {
        return log_front + std::log(beta_continued_fraction(a, b, z)) - std::log(a);
    }
    const double log_complement =
        log_front + std::log(beta_continued_fraction(b, a, one_minus_z)) - std::log(b);
    return std::log1p(-std::exp(log_complement));
}

// log of the upper cap fraction for x in [0, 1].
double log_upper_cap(int n, double x) {
    if (x >= 1.0) return -std::numeric_limits<double>::infinity();
    const double a = 0.5 * (n - 1);
    return std::log(0.5) + log_ibeta(a, 0.5, (1.0 - x) * (1.0 + x), x * x);
}

}  // namespace

Dimension::Dimension(int n) : n_(n) {
    if (n < 3) {
        throw DomainError("dimension must be at least 3, got " + std::to_string(n));
    }
}

double log_incomplete_beta(double a, double b, double z) {
    if (!(a > 0.0) || !(b > 0.0) || !(z >= 0.0 && z <= 1.0)) {
        throw DomainError("log_incomplete_beta: parameters out of domain");
    }
    return log_ibeta(a, b, z, 1.0 - z);
}

CapMeasure cap_measure(Dimension n, double x) {
    if (!(x >= -1.0 && x <= 1.0)) {
        throw DomainError("cap height must lie in [-1, 1]");
    }
    if (x >= 0.0) {
        const double lv = log_upper_cap(n, x);
        return {std::exp(lv), lv};
    }
    const double complement = std::exp(log_upper_cap(n, -x));
    return {1.0 - complement, std::log1p(-complement)};
}

double log_abs_cap_measure_derivative(Dimension n, double x) {
    if (!(x > -1.0 && x < 1.0)) {
        throw DomainError("log derivative of the cap measure needs |x| < 1");
    }
    const double k = 0.5 * (n.value() - 3);
    const double log_density = k == 0.0 ? 0.0 : k * std::log1p(-x * x);
    return log_density - log_beta(0.5, 0.5 * (n.value() - 1));
}

double cap_measure_derivative(Dimension n, double x) {
    if (!(x >= -1.0 && x <= 1.0)) {
        throw DomainError("cap height must lie in [-1, 1]");
    }
    if (std::fabs(x) == 1.0) {
        return n.value() == 3 ? -0.5 : 0.0;
    }
    return -std::exp(log_abs_cap_measure_derivative(n, x));
}

double cap_height_for_log_measure(Dimension n, double log_measure) {
    if (!(log_measure < 0.0)) {
        throw DomainError("cap measure must lie in (0, 1)");
    }
    const double log_half = std::log(0.5);
    if (log_measure > log_half) {
        // Lower half: Psi(x) = 1 - Psi(-x).
        return -cap_height_for_log_measure(n, std::log(-std::expm1(log_measure)));
    }
    if (log_measure == log_half) {
        return 0.0;
    }
    double lo = 0.0;
    double hi = 1.0;
    double x = 0.5;
    for (int it = 0; it < 200; ++it) {
        const double f = log_upper_cap(n, x) - log_measure;
        if (f > 0.0) {
            lo = x;
        } else {
            hi = x;
        }
        // d/dx log Psi = Psi'/Psi
        const double slope = -std::exp(log_abs_cap_measure_derivative(n, x) - log_upper_cap(n, x));
        double next = x - f / slope;
        if (!(next > lo && next < hi) || !std::isfinite(next)) {
            next = 0.5 * (lo + hi);
        }
        if (std::fabs(next - x) <= 1e-16 * std::max(1.0, std::fabs(x)) || hi - lo < 1e-16) {
            return next;
        }
        x = next;
    }
    return x;
}

double cap_height_for_measure(Dimension n, double measure) {
    if (!(measure > 0.0 && measure < 1.0)) {
        throw DomainError("cap measure must lie in (0, 1)");
    }
    return cap_height_for_log_measure(n, std::log(measure));
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

void sample_unit_sphere_into(std::span<double> out, RandomStream& rng) {
    for (;;) {
        double ss = 0.0;
        for (double& v : out) {
            v = rng.normal();
            ss += v * v;
        }
        if (ss > 0.0) {
            const double inv = 1.0 / std::sqrt(ss);
            for (double& v : out) v *= inv;
            return;
        }
    }
}

void sample_unit_ball_into(std::span<double> out, RandomStream& rng) {
    sample_unit_sphere_into(out, rng);
    const double r = std::pow(rng.uniform(), 1.0 / static_cast<double>(out.size()));
    for (double& v : out) v *= r;
}

UnitVector sample_unit_sphere(Dimension n, RandomStream& rng) {
    UnitVector v(static_cast<std::size_t>(n.value()));
    sample_unit_sphere_into(v, rng);
    return v;
}

BallPoint sample_unit_ball(Dimension n, RandomStream& rng) {
    BallPoint p(static_cast<std::size_t>(n.value()));
    sample_unit_ball_into(p, rng);
    return p;
}

}  // namespace volind
