#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "volind/cone_bodies.hpp"
#include "volind/random.hpp"
#include "volind/simd/kernels.hpp"

namespace volind {

struct BodyFamilySpec {
    std::shared_ptr<const ConeIndexSet> index_set;
    double m = 0.0;

    Dimension n() const { return index_set->n(); }
};

void validate(const BodyFamilySpec& spec);

/// Row-major n-vectors with rows padded to a multiple of 4 doubles.
class DirectionMatrix {
  public:
    explicit DirectionMatrix(int n) : n_(static_cast<std::size_t>(n)), stride_((n_ + 3) / 4 * 4) {}

    std::size_t dim() const noexcept { return n_; }
    std::size_t stride() const noexcept { return stride_; }
    std::size_t size() const noexcept { return count_; }
    const double* data() const noexcept { return data_.data(); }

    std::span<const double> row(std::size_t i) const { return {data_.data() + i * stride_, n_}; }
    std::span<double> append();
    void reserve(std::size_t rows) { data_.reserve(rows * stride_); }

  private:
    std::size_t n_;
    std::size_t stride_;
    std::size_t count_ = 0;
    std::vector<double> data_;
};

struct DeletionBody {
    BodyFamilySpec spec;
    DirectionMatrix directions;
};

/// Flat storage of N points in dimension n.
class PointSequence {
  public:
    explicit PointSequence(int n) : n_(static_cast<std::size_t>(n)) {}

    std::size_t dim() const noexcept { return n_; }
    std::size_t size() const noexcept { return n_ == 0 ? 0 : coords_.size() / n_; }
    std::span<const double> point(std::size_t i) const { return {coords_.data() + i * n_, n_}; }
    std::span<double> append();
    void reserve(std::size_t count) { coords_.reserve(count * n_); }
    const std::vector<double>& coords() const noexcept { return coords_; }

  private:
    std::size_t n_;
    std::vector<double> coords_;
};

/// zeta ~ Poisson(m) independent uniform directions.
DeletionBody sample_body(const BodyFamilySpec& spec, RandomStream& rng);

bool body_membership(const DeletionBody& body, std::span<const double> point);
bool body_membership(const DeletionBody& body, std::span<const double> point,
                     const simd::KernelTable& kernels);

/// Number of directions whose cone intersection excludes `point`.
std::size_t cutting_directions(const DeletionBody& body, std::span<const double> point);

/// Uniform point of the body by rejection from the ball.
BallPoint sample_point_in_body(const DeletionBody& body, RandomStream& rng, std::uint64_t max_attempts);

struct SampledSequence {
    DeletionBody body;
    PointSequence points;
    std::uint64_t attempts = 0;
};

/// One draw from P: a body, then N i.i.d. uniform points of it.
SampledSequence sample_sequence(const BodyFamilySpec& spec, std::size_t N, RandomStream& rng,
                                std::uint64_t max_attempts);

/// Fraction of `samples` uniform ball points that lie in the body.
double estimate_relative_volume(const DeletionBody& body, std::size_t samples, RandomStream& rng);

/// sigma of the set of directions theta whose deletion removes `point`.
CapMeasure deletion_cap_set_measure(std::span<const double> point, const ConeIndexSet& set);

struct RatioEstimate {
    double estimate = 0.0;
    double standard_error = 0.0;
    std::size_t samples = 0;
};

/// Monte Carlo sigma(A1 and A2) / sigma(A1), theta drawn exactly from sigma restricted to A1.
RatioEstimate mutual_cap_ratio(std::span<const double> p1, std::span<const double> p2,
                               const ConeIndexSet& set, RandomStream& rng, std::size_t samples);

/// Fraction of `bodies` independent bodies containing every one of `points` (fewer than n of them).
/// Directions are drawn through their exact projection onto the span of the points.
RatioEstimate joint_membership(const std::vector<BallPoint>& points, const BodyFamilySpec& spec,
                               std::size_t bodies, RandomStream& rng);

void write_body(std::ostream& out, const DeletionBody& body, const std::string& spec_reference);
/// Reads directions written by write_body; `spec` must match the recorded n and m.
DeletionBody read_body(std::istream& in, const BodyFamilySpec& spec, std::string* spec_reference = nullptr);

void write_points_csv(std::ostream& out, const PointSequence& points);
void write_points_binary(std::ostream& out, const PointSequence& points);
PointSequence read_points_binary(std::istream& in);

}  // namespace volind
