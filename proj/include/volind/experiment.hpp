#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "volind/calibration.hpp"
#include "volind/density_model.hpp"

namespace volind {

struct DiagnosticsConfig {
    bool enabled = true;
    std::size_t density_bodies = 10000;
    int density_radii = 10;
    std::size_t mutual_pairs = 200;
    std::size_t mutual_samples = 2000;
    std::size_t factorization_bodies = 100000;
};

struct ExperimentConfig {
    CalibrationConfig calibration;
    std::uint64_t seed = 1;
    std::size_t N = 256;
    std::size_t M = 200;
    std::vector<std::string> distinguishers{"likelihood_ratio", "max_radius"};
    std::size_t volume_bodies = 200;
    std::size_t volume_samples = 10000;
    std::uint64_t max_attempts = 0;  // 0 selects 1000 * ceil(1 / smaller expected relative volume)
    int histogram_bins = 50;
    DiagnosticsConfig diagnostics;
};

void validate(const ExperimentConfig& cfg);

/// Analytic summaries of both families handed to every distinguisher.
struct DistinguisherContext {
    std::shared_ptr<const RadialDensity> family1;
    std::shared_ptr<const RadialDensity> family2;
    std::size_t N = 0;
    double lr_tie_tolerance = 0.0;  // per point
    double max_radius_median1 = 0.0;
    double max_radius_median2 = 0.0;
};

/// Fills the derived fields of the context for sequences of length N.
DistinguisherContext make_context(std::shared_ptr<const RadialDensity> d1, std::shared_ptr<const RadialDensity> d2,
                                  std::size_t N, double tie_tolerance);

struct Distinguisher {
    std::string name;
    std::function<int(const PointSequence&, const DistinguisherContext&)> decide;  // returns 1 or 2
};

int likelihood_ratio_distinguisher(const PointSequence& points, const DistinguisherContext& ctx);
int max_radius_distinguisher(const PointSequence& points, const DistinguisherContext& ctx);

/// Built-in distinguishers by name; throws DomainError on an unknown name.
Distinguisher find_distinguisher(const std::string& name);

struct ConfidenceInterval {
    double lo = 0.0;
    double hi = 0.0;
};

/// 95% Wilson score interval for k successes in n trials.
ConfidenceInterval wilson_interval(std::size_t k, std::size_t n);

struct DistinguisherResult {
    std::string name;
    std::size_t correct = 0;
    std::size_t trials = 0;
    double accuracy = 0.0;
    ConfidenceInterval ci;
    std::array<std::array<std::size_t, 2>, 2> confusion{};  // [true label - 1][decided label - 1]
    double bound = 0.0;  // 0.5 + tv_bound/2 + 4 sqrt(0.25 / trials)
    bool consistent = true;
};

struct VolumeResult {
    double analytic_1 = 0.0;
    double analytic_2 = 0.0;
    double analytic_ratio = 0.0;
    double mean_1 = 0.0;
    double mean_2 = 0.0;
    double se_1 = 0.0;
    double se_2 = 0.0;
    double ratio = 0.0;
    double ratio_se = 0.0;
    double relative_error = 0.0;  // |ratio / analytic_ratio - 1|
    double var_over_mean2_1 = 0.0;
    double var_over_mean2_2 = 0.0;
    std::vector<double> per_body_1;
    std::vector<double> per_body_2;
};

struct DensityLawPoint {
    int family = 1;
    double r = 0.0;
    double analytic = 0.0;
    double empirical = 0.0;
    double se = 0.0;
    double z = 0.0;
    double cut_mean = 0.0;  // thinning: mean number of cutting directions
    double cut_var = 0.0;
    double cut_expected = 0.0;  // m g(r)
};

struct FamilyDiagnostics {
    double mutual_mean = 0.0;
    double mutual_se = 0.0;
    double mutual_bound = 0.0;  // integral of n r^{n-1} g(r)
    bool mutual_pass = true;
    double concentration = 0.0;  // Var/Mean^2 of the per-body relative volumes
    double concentration_prediction = 0.0;  // m * integral of n r^{n-1} g(r)^2
    bool concentration_pass = true;
    double factorization_radius = 0.0;
    double factorization_joint = 0.0;
    double factorization_product = 0.0;
    double factorization_se = 0.0;
    double factorization_z = 0.0;
    bool factorization_pass = true;
};

struct DiagnosticsResult {
    std::vector<DensityLawPoint> density_law;
    bool density_law_pass = true;
    bool thinning_pass = true;
    std::array<FamilyDiagnostics, 2> family;
};

struct ExperimentReport {
    std::map<std::string, std::string> config;
    std::string config_hash;
    double m1 = 0.0;
    double m2 = 0.0;
    double g1_at_1 = 0.0;
    double pairing_residual = 0.0;
    VolumeResult volume;
    ProfileDistanceReport distance;
    double tv_bound = 0.0;
    std::vector<DistinguisherResult> distinguishers;
    double empirical_radial_l1 = 0.0;
    double empirical_radial_null = 0.0;  // 4 sqrt(bins / samples)
    std::vector<std::array<double, 2>> radial_histogram;  // per bin, frequencies of |x|^n
    bool diagnostics_run = false;
    DiagnosticsResult diagnostics;
    bool accuracy_tv_consistent = true;
};

/// Everything run_experiment and the diagnostics need about one calibrated pair.
struct PreparedPair {
    ProfilePair pair;
    BodyFamilySpec spec1;
    BodyFamilySpec spec2;
    std::shared_ptr<const RadialDensity> density1;
    std::shared_ptr<const RadialDensity> density2;
};

PreparedPair prepare_pair(const CalibrationConfig& cfg);
PreparedPair prepare_pair(ProfilePair pair);

/// Monte Carlo relative volumes of `bodies` bodies per family with `samples` ball points each.
VolumeResult measure_volumes(const PreparedPair& prep, std::size_t bodies, std::size_t samples,
                             std::uint64_t seed, int workers);

DiagnosticsResult run_lemma_diagnostics(const ExperimentConfig& cfg, const PreparedPair& prep,
                                        const VolumeResult& volumes, int workers);

/// The full pipeline. Results depend only on cfg (including its seed), never on `workers`.
ExperimentReport run_experiment(const ExperimentConfig& cfg, const PreparedPair& prep, int workers);
ExperimentReport run_experiment(const ExperimentConfig& cfg, int workers);

/// Writes report.json plus volumes.csv, confusion.csv, radial_histogram.csv and analytic_density.csv.
void write_report(const ExperimentReport& report, const PreparedPair& prep, const std::string& dir);
std::string report_to_json(const ExperimentReport& report);

}  // namespace volind
