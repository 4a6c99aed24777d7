#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "rmtlab/seed.hpp"
#include "rmtlab/types.hpp"

namespace rmt {

// One vertex of the section B_1^N cap E, E = range(A). J has m = N - n + 1
// rows; y spans the kernel of the complementary n - 1 rows.
struct SectionVertex {
    std::vector<std::size_t> subset;  // J, ascending
    Vector y;                          // unit, first nonzero coordinate positive
    Vector v;                          // A y / |A y|_1
    double l1 = 0.0;                   // |A y|_1
};

struct SectionReport {
    std::size_t rows = 0;  // N
    std::size_t cols = 0;  // n
    std::size_t m = 0;     // N - n + 1
    std::uint64_t subsets = 0;
    std::uint64_t degenerate_count = 0;
    std::vector<SectionVertex> vertices;  // only with keep_vertices
    double min_l1 = 0.0;
    std::vector<std::size_t> argmin_subset;  // J*
    Vector minimizer;                        // y_{J*}
    double max_vertex_l2 = 0.0;              // max_J |v_J|_2

    double diameter() const { return 2.0 * max_vertex_l2; }
    // sqrt(N) max |v_J|_2: the section's radius relative to the inscribed ball N^{-1/2} B_2^N.
    double kashin_ratio() const;
    bool has_vertices() const { return subsets > degenerate_count; }
};

inline constexpr std::uint64_t kSectionBudget = 1'000'000;

struct SectionOptions {
    bool keep_vertices = false;
    // Adds jitter * G (G i.i.d. N(0,1) from jitter_seed) to A before enumerating.
    double jitter = 0.0;
    SeedPath jitter_seed{0, "jitter", 0};
    std::uint64_t budget = kSectionBudget;
    unsigned workers = 1;
};

std::uint64_t binomial(std::size_t n, std::size_t k);

// Exact min of |Ax|_1 over the unit sphere by enumerating every J of size
// N - n + 1 and the kernel y_J of the other n - 1 rows. Rank-deficient
// complements are skipped and counted. Requires N > n (DimensionError) and
// binomial(N, m) <= budget (ResourceError). Throws DegenerateInputError if
// every complement is rank-deficient.
SectionReport min_l1_on_sphere(const RealMatrix& a, const SectionOptions& options = {});

// Same enumeration with the vertices kept, for the section geometry.
SectionReport octahedron_section(const RealMatrix& a, SectionOptions options = {});

struct DescentResult {
    double value = 0.0;
    Vector x;
};

// Independent local-search estimate of min |Ax|_1 on the sphere: multistart
// majorize-minimize (each step takes the bottom eigenvector of A^T W A with
// W = diag(1 / max(|Ax|, eta))), then snaps to the kernel of the n - 1 rows
// where |Ax| is smallest when that lowers the value.
DescentResult min_l1_descent(const RealMatrix& a, std::size_t starts, const SeedPath& seed);

struct KhinchinEstimate {
    double p = 2.0;
    double alpha = 0.0;  // min over the sphere of ((1/N) sum |<y, X_j>|^p)^{1/p}
    double beta = 0.0;   // max
    bool alpha_exact = false;
    bool beta_exact = false;
};

// Rows of x are the N sample vectors. p = 2 is exact from the singular
// values; p = 1 has an exact minimum (vertex enumeration after merging rows
// parallel up to sign, so repeated sign rows do not inflate the subset
// count) and an ascent maximum; p > 2 uses multistart projected gradient
// for both ends.
KhinchinEstimate khinchin_constants(const RealMatrix& x, double p, const SeedPath& seed, std::size_t starts = 1000,
                                    std::uint64_t budget = kSectionBudget);

struct SandwichReport {
    std::size_t samples = 0;
    bool middle_holds = true;  // |Ax|_1 <= sqrt(N) |Ax|_2
    bool lower_holds = true;   // eps delta n |x|_2 <= |Ax|_1
    bool upper_holds = true;   // sqrt(N) |Ax|_2 <= C' n |x|_2
    bool exact_minimizer_checked = false;
    double min_l1_seen = 0.0;
    double max_l2_seen = 0.0;

    bool passed() const { return middle_holds && lower_holds && upper_holds; }
};

// Checks the 1-2 norm chain on `samples` random unit x and, when the
// enumeration fits in the budget, at the exact l1 minimizer. Requires
// N = floor((1 + delta) n).
SandwichReport sandwich_audit(const RealMatrix& a, double eps, double delta, double c_prime, std::size_t samples,
                              const SeedPath& seed);

// Columns: subset (indices joined by ';'), l1, v0..v{N-1}, y0..y{n-1}.
void write_section_csv(std::ostream& out, const SectionReport& report);

}  // namespace rmt
