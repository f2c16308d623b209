#include "volind/cone_bodies.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "volind/error.hpp"

namespace volind {

namespace {

std::string describe(const ConeParams& p) {
    return "(a=" + std::to_string(p.a) + ", b=" + std::to_string(p.b) + ")";
}

// Exclusion interval of one cone at radius rho > d, from cos(phi -+ beta).
Interval exclusion_of(double d, double cos_phi, double sin_phi, double rho) {
    const double c = d / rho;
    const double s = std::sqrt(std::max(0.0, (1.0 - c) * (1.0 + c)));
    const double lo = cos_phi * c - sin_phi * s;
    const double hi = cos_phi >= c ? 1.0 : cos_phi * c + sin_phi * s;
    return {lo, hi};
}

CapMeasure from_value(double v) {
    return {v, v > 0.0 ? std::log(v) : -std::numeric_limits<double>::infinity()};
}

}  // namespace

void validate(const ConeParams& p) {
    if (!(p.delta0 > 0.0 && p.delta0 < 1.0) || !(p.delta1 > 0.0 && p.delta1 < 1.0)) {
        throw DomainError("cone " + describe(p) + ": delta0 and delta1 must lie in (0, 1)");
    }
    const double d = p.distance();
    const double x0 = p.x0();
    if (!(x0 > 0.0) || !(x0 < d) || !(d < 1.0)) {
        throw DomainError("cone " + describe(p) + ": need 0 < x0 < a*delta0 < 1, got x0=" +
                          std::to_string(x0) + ", a*delta0=" + std::to_string(d));
    }
}

double normal_angle(const ConeParams& p) {
    validate(p);
    return std::asin(p.distance()) - std::asin(p.x0());
}

double vertex(const ConeParams& p) { return p.distance() / std::cos(normal_angle(p)); }

ConeLine line_from_params(const ConeParams& p) {
    validate(p);
    const double d = p.distance();
    const double x0 = p.x0();
    const double y0 = std::sqrt((1.0 - x0) * (1.0 + x0));
    // Lines through (x0, y0) at distance d: (y0 - s*x0)^2 = d^2 (1 + s^2).
    // The negative-slope root is the one below.
    const double slope = (x0 * y0 + d * std::sqrt((1.0 - d) * (1.0 + d))) / (x0 * x0 - d * d);
    return {slope, y0 - slope * x0};
}

bool cone_membership(const ConeParams& p, std::span<const double> theta,
                     std::span<const double> point) {
    const double rr = dot(point, point);
    if (rr > 1.0) return false;
    const ConeLine line = line_from_params(p);
    const double s = dot(point, theta);
    const double h = std::sqrt(std::max(0.0, rr - s * s));
    return h <= line.at(s);
}

double cap_height_of_radius(const ConeParams& p, double r) {
    validate(p);
    if (!(r > 0.5 && r <= 1.0)) {
        throw DomainError("cap_height_of_radius: r must lie in (1/2, 1], got " + std::to_string(r));
    }
    const double q = p.distance() / r;
    if (!(q < 1.0)) {
        throw DomainError("cap_height_of_radius: a*delta0/r >= 1 for cone " + describe(p));
    }
    return std::sin(std::asin(q) - std::asin(p.distance()) + std::asin(p.x0()));
}

CapMeasure cone_profile(const ConeParams& p, double r) {
    validate(p);
    if (!(r > 0.5 && r <= 1.0)) {
        throw DomainError("cone_profile: r must lie in (1/2, 1], got " + std::to_string(r));
    }
    const double d = p.distance();
    if (r <= d) return from_value(0.0);
    const double phi = std::asin(d) - std::asin(p.x0());
    const Interval iv = exclusion_of(d, std::cos(phi), std::sin(phi), r);
    if (iv.hi >= 1.0) return cap_measure(p.n, iv.lo);
    const Interval one[] = {iv};
    return from_value(interval_measure(p.n, one));
}

ConeIndexSet::ConeIndexSet(std::vector<ConeParams> entries) : entries_(std::move(entries)) {
    if (entries_.empty()) {
        throw DomainError("cone index set must be non-empty");
    }
    const ConeParams& first = entries_.front();
    cached_.reserve(entries_.size());
    for (const ConeParams& p : entries_) {
        if (p.n.value() != first.n.value() || p.delta0 != first.delta0 || p.delta1 != first.delta1) {
            throw DomainError("cone index set entries must share n, delta0 and delta1");
        }
        const double phi = normal_angle(p);
        const Cached c{p.distance(), std::cos(phi), std::sin(phi), p.distance() / std::cos(phi)};
        cached_.push_back(c);
        min_x0_ = std::min(min_x0_, p.x0());
        min_d_ = std::min(min_d_, c.d);
        max_vertex_ = std::max(max_vertex_, c.vertex);
    }
}

std::size_t ConeIndexSet::active_cap(double rho) const {
    std::size_t best = 0;
    double lo = 2.0;
    for (std::size_t k = 0; k < cached_.size(); ++k) {
        const Cached& c = cached_[k];
        const double v = exclusion_of(c.d, c.cos_phi, c.sin_phi, rho).lo;
        if (v < lo) {
            lo = v;
            best = k;
        }
    }
    return best;
}

std::vector<double> ConeIndexSet::breakpoints() const {
    std::vector<double> out;
    out.reserve(4 * cached_.size());
    for (const Cached& c : cached_) {
        out.push_back(c.d);
        if (c.vertex < 1.0) out.push_back(c.vertex);
    }
    // Where every cone cuts a cap, the profile follows whichever cap is largest;
    // its derivative jumps where that cone changes.
    const double start = std::max(max_vertex_, min_d_);
    if (cached_.size() > 1 && start < 1.0) {
        const std::size_t cells = 16 * cached_.size();
        double prev_r = start;
        std::size_t prev_k = active_cap(start);
        for (std::size_t i = 1; i <= cells; ++i) {
            const double r = start + (1.0 - start) * static_cast<double>(i) / static_cast<double>(cells);
            const std::size_t k = active_cap(r);
            if (k != prev_k) {
                double lo = prev_r;
                double hi = r;
                for (int it = 0; it < 60 && hi - lo > 1e-15; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    (active_cap(mid) == prev_k ? lo : hi) = mid;
                }
                out.push_back(0.5 * (lo + hi));
            }
            prev_r = r;
            prev_k = k;
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

void ConeIndexSet::exclusion_set(double rho, std::vector<Interval>& out) const {
    out.clear();
    if (!(rho > min_d_)) return;
    if (rho >= max_vertex_) {
        // Every cone cuts a cap, so the union is the largest one.
        double lo = 1.0;
        for (const Cached& c : cached_) {
            lo = std::min(lo, exclusion_of(c.d, c.cos_phi, c.sin_phi, rho).lo);
        }
        out.push_back({lo, 1.0});
        return;
    }
    for (const Cached& c : cached_) {
        if (rho > c.d) out.push_back(exclusion_of(c.d, c.cos_phi, c.sin_phi, rho));
    }
    std::sort(out.begin(), out.end(), [](const Interval& x, const Interval& y) { return x.lo < y.lo; });
    std::size_t k = 0;
    for (std::size_t i = 1; i < out.size(); ++i) {
        if (out[i].lo <= out[k].hi) {
            out[k].hi = std::max(out[k].hi, out[i].hi);
        } else {
            out[++k] = out[i];
        }
    }
    out.resize(k + 1);
}

double ConeIndexSet::excluded_fraction(double rho) const {
    thread_local std::vector<Interval> scratch;
    exclusion_set(rho, scratch);
    return interval_measure(n(), scratch);
}

double interval_measure(Dimension n, std::span<const Interval> intervals) {
    double total = 0.0;
    for (const Interval& iv : intervals) {
        const double upper = iv.hi >= 1.0 ? 0.0 : cap_measure(n, iv.hi).value;
        total += cap_measure(n, iv.lo).value - upper;
    }
    return total;
}

CapMeasure envelope_profile(const ConeIndexSet& set, double r) {
    if (!(r > 0.5 && r <= 1.0)) {
        throw DomainError("envelope_profile: r must lie in (1/2, 1], got " + std::to_string(r));
    }
    thread_local std::vector<Interval> scratch;
    set.exclusion_set(r, scratch);
    if (scratch.size() == 1 && scratch.front().hi >= 1.0) {
        return cap_measure(set.n(), scratch.front().lo);
    }
    return from_value(interval_measure(set.n(), scratch));
}

bool envelope_membership(const ConeIndexSet& set, std::span<const double> theta,
                         std::span<const double> point) {
    for (const ConeParams& p : set.entries()) {
        if (!cone_membership(p, theta, point)) return false;
    }
    return true;
}

}  // namespace volind
