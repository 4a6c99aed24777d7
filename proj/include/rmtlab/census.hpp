#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "rmtlab/seed.hpp"
#include "rmtlab/stats.hpp"

namespace rmt {

// Exact determinant of an n x n integer matrix (row-major) by fraction-free
// Bareiss elimination. Intermediate products use 128-bit integers, which is
// exact while every minor fits in 64 bits.
std::int64_t bareiss_determinant(std::vector<std::int64_t> m, std::size_t n);

struct SignCensus {
    std::size_t n = 0;
    std::uint64_t singular = 0;
    std::uint64_t total = 0;  // 2^{n^2}

    double probability() const { return static_cast<double>(singular) / static_cast<double>(total); }
};

inline constexpr std::size_t kSignCensusMaxDim = 5;

// Counts the singular matrices among all 2^{n^2} sign matrices; entry k
// (row-major) of matrix `mask` is -1 when bit k is set. Requires n <= 5
// (ResourceError); the 2^25 masks at n = 5 are split into blocks.
SignCensus sign_census(std::size_t n, unsigned workers = 1);

struct SignCensusEstimate {
    std::size_t n = 0;
    std::uint64_t singular = 0;
    std::uint64_t trials = 0;
    double estimate = 0.0;
    Interval ci;
};

// Monte Carlo estimate over i.i.d. uniform sign matrices, n <= 16.
SignCensusEstimate sign_census_monte_carlo(std::size_t n, std::uint64_t trials, const SeedPath& seed,
                                           unsigned workers = 1);

}  // namespace rmt
