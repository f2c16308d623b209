#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "volind/sphere_geometry.hpp"

namespace volind {

/// One revolution cone T_{a,b}. The boundary line sits at distance a*delta0
/// from the origin and meets the unit circle at first coordinate
/// x0 = delta0 * (1 + b * delta1).
struct ConeParams {
    double a = 0.0;
    double b = 0.0;
    double delta0 = 0.0;
    double delta1 = 0.0;
    Dimension n{3};

    double distance() const noexcept { return a * delta0; }
    double x0() const noexcept { return delta0 * (1.0 + b * delta1); }
};

/// Throws DomainError unless 0 < delta0, delta1 < 1 and 0 < x0 < a*delta0 < 1.
void validate(const ConeParams& p);

/// Upper boundary h = intercept + slope * s of the cone's meridian section.
struct ConeLine {
    double slope = 0.0;
    double intercept = 0.0;

    double at(double s) const noexcept { return intercept + slope * s; }
};

ConeLine line_from_params(const ConeParams& p);

/// Angle between the cone axis and the normal of the boundary line.
double normal_angle(const ConeParams& p);

/// First coordinate where the boundary line meets the axis.
double vertex(const ConeParams& p);

bool cone_membership(const ConeParams& p, std::span<const double> theta,
                     std::span<const double> point);

/// x(a,b,r): height of the cap cut from the radius-r sphere, as a fraction of r.
/// Requires r in (1/2, 1] and a*delta0 < r.
double cap_height_of_radius(const ConeParams& p, double r);

/// Fraction of the radius-r sphere outside the cone, for r in (1/2, 1].
/// Below the vertex radius the excluded set is a band rather than a cap and is
/// measured as such.
CapMeasure cone_profile(const ConeParams& p, double r);

/// Open interval (lo, hi) of normalized projections t = <point, theta> / |point|.
struct Interval {
    double lo;
    double hi;
};

/// Finite intersection of cones sharing (n, delta0, delta1). Per-cone geometry
/// is cached so that exclusion sets can be evaluated without trigonometry.
class ConeIndexSet {
  public:
    explicit ConeIndexSet(std::vector<ConeParams> entries);

    const std::vector<ConeParams>& entries() const noexcept { return entries_; }
    std::size_t size() const noexcept { return entries_.size(); }
    Dimension n() const noexcept { return entries_.front().n; }
    double delta0() const noexcept { return entries_.front().delta0; }
    double delta1() const noexcept { return entries_.front().delta1; }

    /// Smallest x0 over entries: every ball point with <point, theta> <= this is a member.
    double containment_height() const noexcept { return min_x0_; }
    double min_distance() const noexcept { return min_d_; }
    double max_vertex() const noexcept { return max_vertex_; }

    /// Radii at which the profile is not smooth: cone onsets, vertex radii below 1,
    /// and changes of the largest cap.
    std::vector<double> breakpoints() const;

    /// Merged, sorted exclusion intervals at radius rho in [0, 1]. `out` is overwritten.
    void exclusion_set(double rho, std::vector<Interval>& out) const;

    /// Fraction of the radius-rho sphere outside the intersection, any rho in [0, 1].
    double excluded_fraction(double rho) const;

  private:
    std::size_t active_cap(double rho) const;

    struct Cached {
        double d;
        double cos_phi;
        double sin_phi;
        double vertex;
    };

    std::vector<ConeParams> entries_;
    std::vector<Cached> cached_;
    double min_x0_ = 1.0;
    double min_d_ = 1.0;
    double max_vertex_ = 0.0;
};

/// Measure of the union of exclusion intervals, Psi(lo) - Psi(hi) summed.
double interval_measure(Dimension n, std::span<const Interval> intervals);

/// Fraction of the radius-r sphere outside the intersection, r in (1/2, 1]. This
/// is the sup of cone_profile over entries wherever all cones cut caps.
CapMeasure envelope_profile(const ConeIndexSet& set, double r);

bool envelope_membership(const ConeIndexSet& set, std::span<const double> theta,
                         std::span<const double> point);

}  // namespace volind
