#include "rmtlab/stats.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rmtlab/errors.hpp"

namespace rmt {

double normal_critical_value(double confidence) {
    if (!(confidence > 0.0 && confidence < 1.0))
        throw ValidationError("confidence level must lie in (0, 1), got " + std::to_string(confidence));
    boost::math::normal standard;
    return boost::math::quantile(standard, 1.0 - (1.0 - confidence) / 2.0);
}

double standard_normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double confidence) {
    if (trials == 0) throw ValidationError("wilson_interval: trials must be positive");
    if (successes > trials) throw ValidationError("wilson_interval: successes exceed trials");

    const double z = normal_critical_value(confidence);
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (p + z2 / (2.0 * n)) / denom;
    const double half = z / denom * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));

    Interval ci{std::max(0.0, center - half), std::min(1.0, center + half)};
    if (successes == 0) ci.low = 0.0;
    if (successes == trials) ci.high = 1.0;
    // Guard the containment invariant against rounding at the ends.
    ci.low = std::min(ci.low, p);
    ci.high = std::max(ci.high, p);
    return ci;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t m = 0;
    for (std::size_t i = 0; i < std::min(x.size(), y.size()); ++i) {
        if (!(y[i] > 0.0) || !(x[i] > 0.0)) continue;
        const double lx = std::log(x[i]);
        const double ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++m;
    }
    if (m < 2) return std::numeric_limits<double>::quiet_NaN();
    const double mm = static_cast<double>(m);
    const double var = sxx - sx * sx / mm;
    if (var <= 0.0) return std::numeric_limits<double>::quiet_NaN();
    return (sxy - sx * sy / mm) / var;
}

}  // namespace rmt
