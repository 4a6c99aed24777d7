#include "rmtlab/nets.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>
#include <string>

#include "rmtlab/csv.hpp"
#include "rmtlab/errors.hpp"

namespace rmt {
namespace {

double squared_distance(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

Vector random_unit_vector(std::size_t n, Rng& rng, std::normal_distribution<double>& normal) {
    Vector x(static_cast<Eigen::Index>(n));
    if (n == 1) {
        x(0) = (rng() >> 63) ? 1.0 : -1.0;
        return x;
    }
    double norm = 0.0;
    do {
        for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = normal(rng);
        norm = x.norm();
    } while (norm == 0.0);
    return x / norm;
}

// Flat row-major copy of the net for fast nearest-point scans.
std::vector<double> flatten(const std::vector<Vector>& points, std::size_t n) {
    std::vector<double> flat;
    flat.reserve(points.size() * n);
    for (const auto& p : points) flat.insert(flat.end(), p.data(), p.data() + n);
    return flat;
}

double nearest_squared(const std::vector<double>& flat, std::size_t n, const double* x) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t off = 0; off < flat.size(); off += n) best = std::min(best, squared_distance(&flat[off], x, n));
    return best;
}

}  // namespace

SphereNet build_sphere_net(std::size_t n, double eps, const SeedPath& seed, const SphereNetOptions& options) {
    if (n < 1) throw ValidationError("build_sphere_net: dimension must be positive");
    if (!(eps > 0.0) || !std::isfinite(eps)) throw ValidationError("build_sphere_net: mesh must be positive and finite");

    Rng rng(seed);
    std::normal_distribution<double> normal;
    SphereNet net{n, eps, {}};

    if (eps >= 2.0) {
        Vector x = random_unit_vector(n, rng, normal);
        net.points.push_back(x);
        if (eps == 2.0) net.points.push_back(-x);
        return net;
    }

    const double eps2 = eps * eps;
    std::vector<double> flat;
    std::size_t streak = 0;
    auto limit = [&] {
        return options.rejection_streak ? *options.rejection_streak : 10 * net.points.size() + 1000;
    };
    while (streak < limit()) {
        Vector x = random_unit_vector(n, rng, normal);
        bool separated = true;
        for (std::size_t off = 0; off < flat.size(); off += n) {
            if (squared_distance(&flat[off], x.data(), n) < eps2) {
                separated = false;
                break;
            }
        }
        if (separated) {
            flat.insert(flat.end(), x.data(), x.data() + n);
            net.points.push_back(std::move(x));
            streak = 0;
        } else {
            ++streak;
        }
    }
    return net;
}

double min_pairwise_distance(const SphereNet& net) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < net.points.size(); ++i)
        for (std::size_t j = i + 1; j < net.points.size(); ++j)
            best = std::min(best, squared_distance(net.points[i].data(), net.points[j].data(), net.dimension));
    return std::sqrt(best);
}

CoveringAudit audit_covering(const SphereNet& net, std::size_t samples, const SeedPath& seed) {
    Rng rng(seed);
    std::normal_distribution<double> normal;
    const auto flat = flatten(net.points, net.dimension);
    CoveringAudit audit{samples, 0, 0.0};
    for (std::size_t s = 0; s < samples; ++s) {
        const Vector x = random_unit_vector(net.dimension, rng, normal);
        const double d = std::sqrt(nearest_squared(flat, net.dimension, x.data()));
        audit.worst_distance = std::max(audit.worst_distance, d);
        if (d > net.mesh) ++audit.uncovered;
    }
    return audit;
}

std::uint64_t volumetric_cap(std::size_t n, double eps) {
    if (!(eps > 0.0 && eps < 1.0)) throw ValidationError("volumetric_cap: eps must lie in (0, 1)");
    if (n < 1) throw ValidationError("volumetric_cap: dimension must be positive");
    const long double v = std::pow(3.0L / static_cast<long double>(eps), static_cast<long double>(n));
    if (v >= 1.8e19L) throw ResourceError("volumetric_cap: bound exceeds 64-bit range");
    // Snap values that are integers up to rounding, so (3/0.5)^2 gives 36.
    const long double nearest = std::round(v);
    if (std::abs(v - nearest) <= 1e-12L * v) return static_cast<std::uint64_t>(nearest);
    return static_cast<std::uint64_t>(std::ceil(v));
}

double certify_operator_norm(const RealMatrix& m, const SphereNet& domain_net, const SphereNet& range_net) {
    if (domain_net.dimension != static_cast<std::size_t>(m.cols()) || range_net.dimension != static_cast<std::size_t>(m.rows()))
        throw DimensionError("certify_operator_norm: net dimensions do not match the matrix");
    if (domain_net.mesh > 0.5 || range_net.mesh > 0.5)
        throw ValidationError("certify_operator_norm: nets must have mesh at most 1/2");
    const auto flat_range = flatten(range_net.points, range_net.dimension);
    double best = 0.0;
    for (const auto& x : domain_net.points) {
        const Vector mx = m * x;
        for (std::size_t off = 0; off < flat_range.size(); off += range_net.dimension) {
            double dot = 0.0;
            for (std::size_t i = 0; i < range_net.dimension; ++i) dot += mx(static_cast<Eigen::Index>(i)) * flat_range[off + i];
            best = std::max(best, std::abs(dot));
        }
    }
    return 4.0 * best;
}

LatticeNet build_lattice_net(std::size_t n, double level, double alpha, std::uint64_t budget) {
    if (n < 1 || n > 4) throw ValidationError("build_lattice_net: dimension must be between 1 and 4");
    if (!(level > 0.0) || !std::isfinite(level)) throw ValidationError("build_lattice_net: level D must be positive");
    if (!(alpha > 0.0)) throw ValidationError("build_lattice_net: alpha must be positive");
    if (4.0 * alpha / level > 1.0) throw ValidationError("build_lattice_net: mesh 4*alpha/D must not exceed 1");

    const double radius = 3.0 * level;
    const auto r = static_cast<std::int64_t>(std::floor(radius));
    const long double side = static_cast<long double>(2 * r + 1);
    const long double box = std::pow(side, static_cast<long double>(n));
    if (box > static_cast<long double>(budget))
        throw ResourceError("build_lattice_net: bounding box of radius " + std::to_string(r) + " in dimension " +
                            std::to_string(n) + " holds " + std::to_string(static_cast<unsigned long long>(box)) +
                            " integer points, budget is " + std::to_string(budget));

    LatticeNet net{n, level, alpha, {}};
    const double r2 = radius * radius;
    std::vector<std::int64_t> p(n, -r);
    for (;;) {
        std::int64_t sq = 0;
        for (auto c : p) sq += c * c;
        if (sq != 0 && static_cast<double>(sq) <= r2) {
            LatticePoint point{p, Vector(static_cast<Eigen::Index>(n))};
            const double norm = std::sqrt(static_cast<double>(sq));
            for (std::size_t i = 0; i < n; ++i) point.direction(static_cast<Eigen::Index>(i)) = static_cast<double>(p[i]) / norm;
            net.points.push_back(std::move(point));
        }
        // Odometer increment, last coordinate fastest.
        std::size_t k = n;
        while (k > 0) {
            --k;
            if (p[k] < r) {
                ++p[k];
                break;
            }
            p[k] = -r;
            if (k == 0) return net;
        }
    }
}

double distance_to_net(const Vector& x, const LatticeNet& net) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& p : net.points) best = std::min(best, (x - p.direction).squaredNorm());
    return std::sqrt(best);
}

double distance_to_net(const Vector& x, const SphereNet& net) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& p : net.points) best = std::min(best, (x - p).squaredNorm());
    return std::sqrt(best);
}

void write_net_csv(std::ostream& out, const SphereNet& net) {
    CsvRow header;
    for (std::size_t i = 0; i < net.dimension; ++i) header.add("x" + std::to_string(i));
    header.write(out);
    for (const auto& p : net.points) {
        CsvRow row;
        for (Eigen::Index i = 0; i < p.size(); ++i) row.add(p(i));
        row.write(out);
    }
}

void write_net_csv(std::ostream& out, const LatticeNet& net) {
    CsvRow header;
    for (std::size_t i = 0; i < net.dimension; ++i) header.add("p" + std::to_string(i));
    for (std::size_t i = 0; i < net.dimension; ++i) header.add("x" + std::to_string(i));
    header.write(out);
    for (const auto& p : net.points) {
        CsvRow row;
        for (auto c : p.integer) row.add(c);
        for (Eigen::Index i = 0; i < p.direction.size(); ++i) row.add(p.direction(i));
        row.write(out);
    }
}

}  // namespace rmt
