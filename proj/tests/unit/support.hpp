#pragma once

#include <cmath>
#include <functional>

#include "volind/config.hpp"
#include "volind/experiment.hpp"

namespace volind::testing {

/// Flagship calibration (n = 64, kappa = ln 2), the built-in defaults.
inline const CalibrationConfig& flagship_config() {
    static const CalibrationConfig cfg = resolve_config({}).experiment.calibration;
    return cfg;
}

inline const PreparedPair& flagship() {
    static const PreparedPair prep = prepare_pair(flagship_config());
    return prep;
}

inline double five_point(const std::function<double(double)>& f, double x, double h) {
    return (f(x - 2 * h) - 8 * f(x - h) + 8 * f(x + h) - f(x + 2 * h)) / (12 * h);
}

/// |observed - expected| in units of a binomial standard error.
inline double binomial_z(double hits, double trials, double p) {
    const double se = std::sqrt(p * (1 - p) / trials);
    return se > 0 ? (hits / trials - p) / se : (hits / trials == p ? 0.0 : INFINITY);
}

}  // namespace volind::testing
