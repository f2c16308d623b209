#pragma once

#include <functional>
#include <string>
#include <vector>

#include "volind/deletion_process.hpp"

namespace volind {

/// P(x in K) for |x| = r: exp(-m g(r)), with g the exact excluded fraction at every r in [0, 1].
double tilde_f(const BodyFamilySpec& spec, double r);

/// Law of |X| for X uniform on a random body of the family, averaged over bodies:
/// proportional to n r^{n-1} exp(-m g(r)) on [0, 1].
class RadialDensity {
  public:
    explicit RadialDensity(BodyFamilySpec spec);

    const BodyFamilySpec& spec() const noexcept { return spec_; }
    double profile(double r) const;
    double log_unnormalized(double r) const;
    double log_normalizer() const noexcept { return log_z_; }
    double normalizer() const noexcept { return z_; }
    double density(double r) const;
    double log_density(double r) const;

    /// Mass of (r, 1].
    double tail_mass(double r) const;
    /// r with tail_mass(r) = 1 - p.
    double quantile(double p) const;

    /// Integral of f over [a, b], split where the profile changes form.
    double integrate(const std::function<double(double)>& f, double a, double b) const;

  private:
    BodyFamilySpec spec_;
    std::vector<double> breaks_;
    std::vector<double> cuts_;
    std::vector<double> cumulative_;  // unnormalized mass of [0, cuts_[i]]
    double z_ = 1.0;
    double log_z_ = 0.0;
};

/// Expected Vol(K) / Vol(D_n).
double expected_relative_volume(const BodyFamilySpec& spec);

/// Adaptive Gauss-Kronrod over the pieces of [a, b] cut at `breaks`, to absolute error ~tol.
double integrate_piecewise(const std::function<double(double)>& f, double a, double b,
                           const std::vector<double>& breaks, double tol = 1e-12);

struct ProfileDistanceReport {
    double l1 = 0.0;
    double l1_shell = 0.0;
    double shell_lo = 0.0;
    double shell_mass_1 = 0.0;
    double shell_mass_2 = 0.0;
    double leak_1 = 0.0;  // mass below shell_lo
    double leak_2 = 0.0;

    double tv_bound(double N) const { return N * l1; }
};

/// L1 distance between the normalized radial densities of two families; shell_lo defaults to 1 - delta1.
ProfileDistanceReport l1_profile_distance(const RadialDensity& d1, const RadialDensity& d2, double shell_lo = -1.0);
ProfileDistanceReport l1_profile_distance(const BodyFamilySpec& spec1, const BodyFamilySpec& spec2);

/// key = value lines.
std::string to_key_value(const ProfileDistanceReport& report);

/// Integral of n r^{n-1} g(r)^k over [0, 1].
double profile_moment(const RadialDensity& density, int k);

/// L1 distance between histograms of |x|^n (uniform on [0, 1] under the ball law) on `bins` equal bins.
double empirical_radial_distance(const std::vector<PointSequence>& sample1,
                                 const std::vector<PointSequence>& sample2, int bins);

}  // namespace volind
