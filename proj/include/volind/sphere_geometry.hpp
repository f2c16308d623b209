#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "volind/random.hpp"

namespace volind {

/// Ambient dimension; at least 3 so that the cap density exponent (n-3)/2 is non-negative.
class Dimension {
  public:
    explicit Dimension(int n);
    operator int() const noexcept { return n_; }
    int value() const noexcept { return n_; }

  private:
    int n_;
};

/// Normalized surface measure of a spherical cap, kept in log form as well so
/// that caps far smaller than DBL_MIN still order correctly.
struct CapMeasure {
    double value = 0.0;
    double log_value = 0.0;
};

using UnitVector = std::vector<double>;
using BallPoint = std::vector<double>;

/// log I_z(a, b), the regularized incomplete beta function, for z in [0, 1].
double log_incomplete_beta(double a, double b, double z);

/// Fraction of S^{n-1} with first coordinate >= x.
CapMeasure cap_measure(Dimension n, double x);

/// d/dx of cap_measure: -(1-x^2)^{(n-3)/2} / B(1/2, (n-1)/2). Zero at |x| = 1 for n > 3.
double cap_measure_derivative(Dimension n, double x);

/// log |cap_measure_derivative|, finite wherever |x| < 1.
double log_abs_cap_measure_derivative(Dimension n, double x);

/// Cap height x with cap_measure(n, x) == measure; measure in (0, 1).
double cap_height_for_measure(Dimension n, double measure);

/// Same, with the target given as a log measure (for caps below DBL_MIN).
double cap_height_for_log_measure(Dimension n, double log_measure);

UnitVector sample_unit_sphere(Dimension n, RandomStream& rng);
BallPoint sample_unit_ball(Dimension n, RandomStream& rng);

/// Fill `out` (size n) in place; same laws as above, no allocation.
void sample_unit_sphere_into(std::span<double> out, RandomStream& rng);
void sample_unit_ball_into(std::span<double> out, RandomStream& rng);

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> a);

}  // namespace volind
