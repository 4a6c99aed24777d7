#pragma once

#include <cstdint>
#include <span>

namespace rmt {

struct Interval {
    double low = 0.0;
    double high = 1.0;
};

// Wilson score interval for a binomial proportion.
// Throws ValidationError when trials == 0 or successes > trials.
Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double confidence = 0.95);

// Two-sided standard normal critical value for the given confidence level.
double normal_critical_value(double confidence);

double standard_normal_cdf(double x);

// Least-squares slope of log(y) against log(x) over the points with y > 0.
// Returns NaN when fewer than two such points exist.
double loglog_slope(std::span<const double> x, std::span<const double> y);

}  // namespace rmt
