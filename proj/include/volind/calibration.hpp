#pragma once

#include <functional>
#include <memory>
#include <string>

#include "volind/cone_bodies.hpp"

namespace volind {

enum class TargetShape {
    cap_height,  // reference cone's cap-height curve bent by -q*delta0*delta1*u^2
    quadratic,   // g2 = Psi(delta0) + c*(2 - u)^2
};

struct CalibrationConfig {
    int n = 64;
    double delta0 = 0.0;
    double delta1 = 0.0;
    double a_min = 1.0;
    double a_max = 0.0;  // 0 selects min(200, 0.9/delta0)
    double b_min = 0.0;  // b_min == b_max == 0 selects the box keeping x0 in (delta0/2, 2*delta0)
    double b_max = 0.0;
    double kappa = 0.6931471805599453;
    int grid_size = 512;
    int check_grid = 256;
    TargetShape target = TargetShape::cap_height;
    double target_a = 2.0;
    double target_b = 0.0;
    double cap_bend = 0.05;        // q of the cap_height target
    double quadratic_scale = 5.0;  // c / |delta0*delta1*Psi'(delta0)| of the quadratic target
    double tol_fit = 1e-8;
    double tol_pair = 1e-6;
    int max_newton = 100;

    double resolved_a_max() const;
    double resolved_b_min() const;
    double resolved_b_max() const;
    double shell_lo() const { return 1.0 - delta1; }
};

/// Throws DomainError on an inconsistent configuration.
void validate(const CalibrationConfig& cfg);

/// r(u) = 1 - delta1 * u.
inline double shell_radius(double delta1, double u) { return 1.0 - delta1 * u; }

struct ProfileTarget {
    std::function<double(double)> value_at;
    std::function<double(double)> derivative_at;  // d/du
    double delta0 = 0.0;
    double delta1 = 0.0;
    int n = 3;
    double curvature = 0.0;
};

/// Exact cap height x(a,b,r(u)) and its u-derivative.
struct HeightJet {
    double x;
    double x_u;
};
HeightJet height_jet(const ConeParams& p, double u);

struct TangentSolution {
    ConeParams params;
    int newton_steps = 0;
    bool used_closed_form = false;
    double residual = 0.0;  // max relative mismatch of (g, dg/du)
};

/// Cone whose profile at r(u) has value g0 and u-derivative g0p.
/// Newton on the exact formulas, seeded by the first-order expansion around delta0.
TangentSolution solve_cone_for_tangent(double u, double g0, double g0p, const CalibrationConfig& cfg);

/// The first-order seed (a, b) on its own.
std::pair<double, double> linearized_seed(double u, double g0, double g0p, const CalibrationConfig& cfg);

/// Tangent cones at u_k = k/(grid_size-1); checks node fit and one-sided fit on a 10x finer grid.
ConeIndexSet build_envelope(const ProfileTarget& target, int grid_size, const CalibrationConfig& cfg);

/// Largest |envelope - target| at the nodes and largest envelope - target between them.
struct FitError {
    double at_nodes = 0.0;
    double overshoot = 0.0;
    double undershoot = 0.0;
};
FitError fit_error(const ConeIndexSet& set, const ProfileTarget& target, int grid_size, int refine);

/// Targets for the two families; g1 = 2*g2 - g2(0) pointwise.
ProfileTarget make_g2_target(const CalibrationConfig& cfg);
ProfileTarget make_g1_target(const CalibrationConfig& cfg);

struct PairingSummary {
    double max_residual = 0.0;           // max |m2 g2 - m1 g1 - m1 g1(1)| on the check grid
    double relative_residual = 0.0;      // divided by m1 g1(1) (0 when kappa == 0)
    double boundary_gap = 0.0;           // |g1(1) - g2(1)|
    double fit_error_1 = 0.0;
    double fit_error_2 = 0.0;
    double min_normal_angle = 0.0;
    double max_vertex = 0.0;
};

struct ProfilePair {
    std::shared_ptr<const ConeIndexSet> I1;
    std::shared_ptr<const ConeIndexSet> I2;
    double m1 = 0.0;
    double m2 = 0.0;
    double shell_lo = 0.0;
    double kappa = 0.0;
    double tol_fit = 0.0;
    double tol_pair = 0.0;
    int grid_size = 0;
    int check_grid = 256;
    PairingSummary summary;
};

/// Residuals of the pairing identity on a check_grid-point shell grid.
PairingSummary evaluate_pairing(const ConeIndexSet& I1, const ConeIndexSet& I2, double m1, double m2,
                                int check_grid);

/// Builds both envelopes and the intensities m1 = kappa/g1(1), m2 = 2*m1,
/// and fills in the summary without judging it.
ProfilePair build_profile_pair(const CalibrationConfig& cfg);

/// Throws InvariantViolation when a summary figure exceeds its tolerance.
void check_profile_pair(const ProfilePair& pair);

/// build_profile_pair followed by check_profile_pair.
ProfilePair make_profile_pair(const CalibrationConfig& cfg);

std::string to_json(const ConeIndexSet& set);
ConeIndexSet cone_index_set_from_json(const std::string& text);
std::string to_json(const ProfilePair& pair);
ProfilePair profile_pair_from_json(const std::string& text);

}  // namespace volind
