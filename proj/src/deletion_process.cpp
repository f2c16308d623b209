#include "volind/deletion_process.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <istream>
#include <ostream>
#include <random>

#include "volind/error.hpp"

namespace volind {

namespace {

constexpr char kBodyMagic[8] = {'V', 'O', 'L', 'B', 'O', 'D', 'Y', '\0'};
constexpr char kPointsMagic[8] = {'V', 'O', 'L', 'P', 'T', 'S', '\0', '\0'};
constexpr std::uint32_t kFormatVersion = 1;

struct Workspace {
    std::vector<Interval> intervals;
    std::vector<double> lo;
    std::vector<double> hi;
};

Workspace& workspace() {
    thread_local Workspace ws;
    return ws;
}

simd::ExclusionView view_at(const ConeIndexSet& set, double rho, Workspace& ws) {
    set.exclusion_set(rho, ws.intervals);
    ws.lo.resize(ws.intervals.size());
    ws.hi.resize(ws.intervals.size());
    for (std::size_t i = 0; i < ws.intervals.size(); ++i) {
        ws.lo[i] = ws.intervals[i].lo;
        ws.hi[i] = ws.intervals[i].hi;
    }
    return {ws.lo.data(), ws.hi.data(), ws.intervals.size()};
}

template <class T>
void put(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!in) throw IoError("truncated binary document");
    return v;
}

void expect_magic(std::istream& in, const char (&magic)[8], const char* what) {
    char buf[8];
    in.read(buf, 8);
    if (!in || std::memcmp(buf, magic, 8) != 0) throw IoError(std::string("not a ") + what + " file");
    if (get<std::uint32_t>(in) != kFormatVersion) throw IoError(std::string("unsupported ") + what + " version");
}

}  // namespace

void validate(const BodyFamilySpec& spec) {
    if (!spec.index_set) throw DomainError("body family spec has no index set");
    if (!(spec.m >= 0.0) || !std::isfinite(spec.m)) throw DomainError("Poisson intensity must be finite and >= 0");
}

std::span<double> DirectionMatrix::append() {
    data_.resize((count_ + 1) * stride_, 0.0);
    return {data_.data() + count_++ * stride_, n_};
}

std::span<double> PointSequence::append() {
    coords_.resize(coords_.size() + n_);
    return {coords_.data() + coords_.size() - n_, n_};
}

DeletionBody sample_body(const BodyFamilySpec& spec, RandomStream& rng) {
    validate(spec);
    DeletionBody body{spec, DirectionMatrix(spec.n())};
    const std::uint64_t zeta = rng.poisson(spec.m);
    body.directions.reserve(zeta);
    for (std::uint64_t i = 0; i < zeta; ++i) sample_unit_sphere_into(body.directions.append(), rng);
    return body;
}

bool body_membership(const DeletionBody& body, std::span<const double> point,
                     const simd::KernelTable& kernels) {
    const double rr = dot(point, point);
    if (rr > 1.0) return false;
    const DirectionMatrix& dirs = body.directions;
    if (dirs.size() == 0 || rr == 0.0) return true;
    const double rho = std::sqrt(rr);
    Workspace& ws = workspace();
    const simd::ExclusionView ex = view_at(*body.spec.index_set, rho, ws);
    if (ex.count == 0) return true;
    return kernels.first_hit(dirs.data(), dirs.size(), dirs.stride(), point.data(), point.size(), 1.0 / rho, ex) ==
           dirs.size();
}

bool body_membership(const DeletionBody& body, std::span<const double> point) {
    return body_membership(body, point, simd::active_kernels());
}

std::size_t cutting_directions(const DeletionBody& body, std::span<const double> point) {
    const double rho = norm(point);
    const DirectionMatrix& dirs = body.directions;
    if (dirs.size() == 0 || rho == 0.0) return 0;
    Workspace& ws = workspace();
    const simd::ExclusionView ex = view_at(*body.spec.index_set, std::min(rho, 1.0), ws);
    std::vector<double> t(dirs.size());
    simd::active_kernels().dot_batch(dirs.data(), dirs.size(), dirs.stride(), point.data(), point.size(), t.data());
    std::size_t hits = 0;
    for (double v : t) hits += simd::detail::excluded(v / rho, ex) ? 1 : 0;
    return hits;
}

BallPoint sample_point_in_body(const DeletionBody& body, RandomStream& rng, std::uint64_t max_attempts) {
    if (max_attempts < 1) throw DomainError("max_attempts must be at least 1");
    BallPoint p(body.directions.dim());
    for (std::uint64_t i = 0; i < max_attempts; ++i) {
        sample_unit_ball_into(p, rng);
        if (body_membership(body, p)) return p;
    }
    throw RejectionBudgetExhausted(max_attempts);
}

SampledSequence sample_sequence(const BodyFamilySpec& spec, std::size_t N, RandomStream& rng,
                                std::uint64_t max_attempts) {
    if (max_attempts < 1) throw DomainError("max_attempts must be at least 1");
    SampledSequence s{sample_body(spec, rng), PointSequence(spec.n()), 0};
    s.points.reserve(N);
    for (std::size_t j = 0; j < N; ++j) {
        std::span<double> p = s.points.append();
        std::uint64_t tries = 0;
        for (;;) {
            if (tries == max_attempts) throw RejectionBudgetExhausted(max_attempts);
            ++tries;
            sample_unit_ball_into(p, rng);
            if (body_membership(s.body, p)) break;
        }
        s.attempts += tries;
    }
    return s;
}

double estimate_relative_volume(const DeletionBody& body, std::size_t samples, RandomStream& rng) {
    if (samples == 0) throw DomainError("estimate_relative_volume needs at least one sample");
    BallPoint p(body.directions.dim());
    std::size_t inside = 0;
    for (std::size_t i = 0; i < samples; ++i) {
        sample_unit_ball_into(p, rng);
        inside += body_membership(body, p) ? 1 : 0;
    }
    return static_cast<double>(inside) / static_cast<double>(samples);
}

CapMeasure deletion_cap_set_measure(std::span<const double> point, const ConeIndexSet& set) {
    return envelope_profile(set, norm(point));
}

RatioEstimate mutual_cap_ratio(std::span<const double> p1, std::span<const double> p2,
                               const ConeIndexSet& set, RandomStream& rng, std::size_t samples) {
    const double r1 = norm(p1);
    const double r2 = norm(p2);
    if (!(r1 > 0.5 && r1 <= 1.0) || !(r2 > 0.5 && r2 <= 1.0)) {
        throw DomainError("mutual_cap_ratio: both norms must lie in (1/2, 1]");
    }
    if (samples == 0) throw DomainError("mutual_cap_ratio needs at least one sample");
    const Dimension n = set.n();
    std::vector<Interval> a1;
    std::vector<Interval> a2;
    set.exclusion_set(r1, a1);
    set.exclusion_set(r2, a2);
    // Sample t = <theta, p1/|p1|> from sigma restricted to A1 by inverting the cap measure.
    std::vector<double> upper(a1.size());
    std::vector<double> cumulative(a1.size());
    double total = 0.0;
    for (std::size_t i = 0; i < a1.size(); ++i) {
        upper[i] = a1[i].hi >= 1.0 ? 0.0 : cap_measure(n, a1[i].hi).value;
        total += cap_measure(n, a1[i].lo).value - upper[i];
        cumulative[i] = total;
    }
    if (!(total > 0.0)) throw DomainError("mutual_cap_ratio: sigma(A1) = 0");

    const std::size_t dim = p1.size();
    std::vector<double> e1(dim);
    std::vector<double> e2(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        e1[i] = p1[i] / r1;
        e2[i] = p2[i] / r2;
    }
    std::vector<double> w(dim);
    std::size_t hits = 0;
    for (std::size_t s = 0; s < samples; ++s) {
        const double pick = rng.uniform() * total;
        const std::size_t k = static_cast<std::size_t>(
            std::min<std::ptrdiff_t>(std::lower_bound(cumulative.begin(), cumulative.end(), pick) - cumulative.begin(),
                                     static_cast<std::ptrdiff_t>(a1.size() - 1)));
        const double below = k == 0 ? 0.0 : cumulative[k - 1];
        const double target = upper[k] + (pick - below);
        double t = target >= 1.0 ? -1.0 : target <= 0.0 ? 1.0 : cap_height_for_measure(n, target);
        t = std::clamp(t, a1[k].lo, a1[k].hi);
        double ww = 0.0;
        while (!(ww > 0.0)) {
            for (double& v : w) v = rng.normal();
            const double along = dot(w, e1);
            for (std::size_t i = 0; i < dim; ++i) w[i] -= along * e1[i];
            ww = dot(w, w);
        }
        const double side = std::sqrt(std::max(0.0, 1.0 - t * t) / ww);
        const double t2 = t * dot(e1, e2) + side * dot(w, e2);
        for (const Interval& iv : a2) {
            if (t2 > iv.lo && t2 < iv.hi) {
                ++hits;
                break;
            }
        }
    }
    const double p = static_cast<double>(hits) / static_cast<double>(samples);
    return {p, std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(samples)), samples};
}

RatioEstimate joint_membership(const std::vector<BallPoint>& points, const BodyFamilySpec& spec,
                               std::size_t bodies, RandomStream& rng) {
    validate(spec);
    const int n = spec.n();
    const std::size_t k = points.size();
    if (k == 0 || k >= static_cast<std::size_t>(n)) throw DomainError("joint_membership: need 1 <= points < n");
    if (bodies == 0) throw DomainError("joint_membership needs at least one body");
    // Orthonormal basis of the span of the points, and each point's coordinates in it.
    std::vector<std::vector<double>> basis;
    for (const BallPoint& p : points) {
        std::vector<double> v = p;
        for (const auto& q : basis) {
            const double c = dot(v, q);
            for (std::size_t i = 0; i < v.size(); ++i) v[i] -= c * q[i];
        }
        const double len = norm(v);
        if (len > 1e-12 * std::max(1.0, norm(p))) {
            for (double& x : v) x /= len;
            basis.push_back(std::move(v));
        }
    }
    const std::size_t dim = basis.size();
    std::vector<std::vector<double>> coord(k, std::vector<double>(dim));
    std::vector<double> radius(k);
    std::vector<std::vector<Interval>> excl(k);
    for (std::size_t j = 0; j < k; ++j) {
        radius[j] = norm(points[j]);
        if (radius[j] > 1.0) throw DomainError("joint_membership: points must lie in the ball");
        for (std::size_t i = 0; i < dim; ++i) coord[j][i] = dot(points[j], basis[i]);
        spec.index_set->exclusion_set(radius[j], excl[j]);
    }
    // Remaining n - dim coordinates of a Gaussian vector contribute a chi-square to the squared norm.
    std::gamma_distribution<double> rest(0.5 * static_cast<double>(n - static_cast<int>(dim)), 2.0);
    std::vector<double> z(dim);
    std::size_t survived = 0;
    for (std::size_t b = 0; b < bodies; ++b) {
        const std::uint64_t zeta = rng.poisson(spec.m);
        bool all_in = true;
        for (std::uint64_t d = 0; d < zeta; ++d) {
            double zz = rest(rng.engine());
            for (double& v : z) {
                v = rng.normal();
                zz += v * v;
            }
            if (!all_in) continue;
            const double inv = 1.0 / std::sqrt(zz);
            for (std::size_t j = 0; j < k && all_in; ++j) {
                if (radius[j] == 0.0) continue;
                double s = 0.0;
                for (std::size_t i = 0; i < dim; ++i) s += coord[j][i] * z[i];
                const double t = s * inv / radius[j];
                for (const Interval& iv : excl[j]) {
                    if (t > iv.lo && t < iv.hi) {
                        all_in = false;
                        break;
                    }
                }
            }
        }
        survived += all_in ? 1 : 0;
    }
    const double p = static_cast<double>(survived) / static_cast<double>(bodies);
    return {p, std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(bodies)), bodies};
}

void write_body(std::ostream& out, const DeletionBody& body, const std::string& spec_reference) {
    out.write(kBodyMagic, 8);
    put(out, kFormatVersion);
    put(out, static_cast<std::uint32_t>(body.directions.dim()));
    put(out, body.spec.m);
    put(out, static_cast<std::uint32_t>(spec_reference.size()));
    out.write(spec_reference.data(), static_cast<std::streamsize>(spec_reference.size()));
    put(out, static_cast<std::uint64_t>(body.directions.size()));
    for (std::size_t i = 0; i < body.directions.size(); ++i) {
        const auto row = body.directions.row(i);
        out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size() * sizeof(double)));
    }
    if (!out) throw IoError("failed to write body");
}

DeletionBody read_body(std::istream& in, const BodyFamilySpec& spec, std::string* spec_reference) {
    validate(spec);
    expect_magic(in, kBodyMagic, "body");
    const auto n = get<std::uint32_t>(in);
    const auto m = get<double>(in);
    if (static_cast<int>(n) != spec.n().value() || m != spec.m) {
        throw IoError("body file does not match the supplied family spec");
    }
    const auto len = get<std::uint32_t>(in);
    std::string ref(len, '\0');
    in.read(ref.data(), len);
    if (spec_reference != nullptr) *spec_reference = ref;
    const auto count = get<std::uint64_t>(in);
    DeletionBody body{spec, DirectionMatrix(spec.n())};
    body.directions.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        auto row = body.directions.append();
        in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size() * sizeof(double)));
    }
    if (!in) throw IoError("truncated body file");
    return body;
}

void write_points_csv(std::ostream& out, const PointSequence& points) {
    for (std::size_t i = 0; i < points.dim(); ++i) out << (i ? "," : "") << 'x' << i;
    out << '\n';
    char buf[32];
    for (std::size_t j = 0; j < points.size(); ++j) {
        const auto p = points.point(j);
        for (std::size_t i = 0; i < p.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", p[i]);
            out << (i ? "," : "") << buf;
        }
        out << '\n';
    }
}

void write_points_binary(std::ostream& out, const PointSequence& points) {
    out.write(kPointsMagic, 8);
    put(out, kFormatVersion);
    put(out, static_cast<std::uint32_t>(points.dim()));
    put(out, static_cast<std::uint64_t>(points.size()));
    out.write(reinterpret_cast<const char*>(points.coords().data()),
              static_cast<std::streamsize>(points.coords().size() * sizeof(double)));
    if (!out) throw IoError("failed to write points");
}

PointSequence read_points_binary(std::istream& in) {
    expect_magic(in, kPointsMagic, "point sequence");
    const auto n = get<std::uint32_t>(in);
    const auto count = get<std::uint64_t>(in);
    PointSequence seq(static_cast<int>(n));
    seq.reserve(count);
    for (std::uint64_t j = 0; j < count; ++j) {
        auto p = seq.append();
        in.read(reinterpret_cast<char*>(p.data()), static_cast<std::streamsize>(n * sizeof(double)));
    }
    if (!in) throw IoError("truncated point sequence file");
    return seq;
}

}  // namespace volind
