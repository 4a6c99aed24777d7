#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "rmtlab/seed.hpp"
#include "rmtlab/types.hpp"

namespace rmt {

// Greedy maximal eps-separated subset of S^{n-1}; by maximality it is an
// eps-net. Maximality is only certified statistically (see audit_covering).
struct SphereNet {
    std::size_t dimension = 0;
    double mesh = 0.0;
    std::vector<Vector> points;

    std::size_t size() const { return points.size(); }
};

struct SphereNetOptions {
    // Stop after this many consecutive rejected candidates. When unset the
    // streak limit is 10 * |net| + 1000, re-evaluated as the net grows.
    std::optional<std::size_t> rejection_streak;
};

// Requires n >= 1 and eps > 0 (ValidationError otherwise). For eps >= 2
// the result is a single point, or an antipodal pair when eps == 2.
SphereNet build_sphere_net(std::size_t n, double eps, const SeedPath& seed, const SphereNetOptions& options = {});

double min_pairwise_distance(const SphereNet& net);

struct CoveringAudit {
    std::size_t samples = 0;
    std::size_t uncovered = 0;     // samples farther than the mesh from every net point
    double worst_distance = 0.0;   // max over samples of the distance to the nearest net point
};

CoveringAudit audit_covering(const SphereNet& net, std::size_t samples, const SeedPath& seed);

// ceil((3 / eps)^n) for eps in (0, 1).
std::uint64_t volumetric_cap(std::size_t n, double eps);

// 4 * max over the product net of |<Mx, y>|, an upper bound for |M| when
// both nets have mesh at most 1/2. domain_net lives on S^{cols-1},
// range_net on S^{rows-1}.
double certify_operator_norm(const RealMatrix& m, const SphereNet& domain_net, const SphereNet& range_net);

struct LatticePoint {
    std::vector<std::int64_t> integer;  // p
    Vector direction;                   // p / |p|
};

// Normalised nonzero integer points of the ball of radius 3D. The mesh
// 4 alpha / D is what the set guarantees for vectors whose essential LCD
// lies in [D, 2D); the point set itself does not depend on alpha.
struct LatticeNet {
    std::size_t dimension = 0;
    double level = 0.0;
    double alpha = 0.0;
    std::vector<LatticePoint> points;

    double mesh() const { return 4.0 * alpha / level; }
    std::size_t size() const { return points.size(); }
};

inline constexpr std::uint64_t kLatticeBudget = 10'000'000;

// Requires n <= 4, D > 0, alpha > 0 and 4 alpha / D <= 1. Enumerates the
// bounding box lexicographically (first coordinate slowest). Throws
// ResourceError when the box holds more than `budget` points.
LatticeNet build_lattice_net(std::size_t n, double level, double alpha, std::uint64_t budget = kLatticeBudget);

double distance_to_net(const Vector& x, const LatticeNet& net);
double distance_to_net(const Vector& x, const SphereNet& net);

// One unit vector per row, columns x0..x{n-1}.
void write_net_csv(std::ostream& out, const SphereNet& net);
// Integer coordinates p0.. followed by the normalised coordinates x0...
void write_net_csv(std::ostream& out, const LatticeNet& net);

}  // namespace rmt
