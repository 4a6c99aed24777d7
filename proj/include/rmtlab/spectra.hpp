#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rmtlab/types.hpp"

namespace rmt {

// Nonincreasing singular values s_1 >= ... >= s_k, k = min(rows, cols).
struct SingularSpectrum {
    std::vector<double> values;

    double largest() const { return values.empty() ? 0.0 : values.front(); }
    double smallest() const { return values.empty() ? 0.0 : values.back(); }
    // s_1 / s_k; +infinity for a rank-deficient matrix.
    double condition_number() const;
};

// One-sided (Hestenes) Jacobi SVD. Tall inputs are first reduced to their
// triangular QR factor; wide inputs are processed through their adjoint.
// Throws ValidationError on non-finite entries.
SingularSpectrum singular_values(const RealMatrix& m);
SingularSpectrum singular_values(const ComplexMatrix& m);

// Verification mode: also accumulates the right singular vectors V of the
// processed matrix W (W = M, or M* when M is wide) and reports
// max |W*W - V S^2 V*| / s_1^2.
struct VerifiedSpectrum {
    SingularSpectrum spectrum;
    double residual = 0.0;
};
VerifiedSpectrum singular_values_verified(const RealMatrix& m);
VerifiedSpectrum singular_values_verified(const ComplexMatrix& m);

// s_n = min over the unit sphere of |Mx|. Requires rows >= cols
// (DimensionError otherwise).
double smallest_singular_value(const RealMatrix& m);
double smallest_singular_value(const ComplexMatrix& m);

double condition_number(const RealMatrix& m);

// Operator norm by power iteration on M^T M; an independent cross-check of s_1.
double power_iteration_norm(const RealMatrix& m, std::uint64_t seed = 1, int max_iterations = 20000);

// Euclidean distance from x to span(basis). An empty basis gives |x|.
double distance_to_span(const Vector& x, std::span<const Vector> basis);

// Rank test used throughout: s_min(B) < 1e-10 * s_max(B).
inline constexpr double kRankTolerance = 1e-10;

// Unit vector orthogonal to n-1 linearly independent vectors of R^n, with
// its first nonzero coordinate positive. Throws DegenerateInputError when
// the columns fail the rank test and DimensionError on a count mismatch.
Vector random_normal_vector(std::span<const Vector> columns);
// Same, with the vectors given as the rows of an (n-1) x n matrix.
Vector random_normal_vector(const RealMatrix& rows);

}  // namespace rmt
