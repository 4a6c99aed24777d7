#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rmtlab/ensembles.hpp"
#include "rmtlab/seed.hpp"
#include "rmtlab/structure.hpp"
#include "rmtlab/types.hpp"

namespace rmt {

enum class ConcentrationMethod { exact, monte_carlo, esseen_bound, sbp_bound };

std::string to_string(ConcentrationMethod method);

// L(S, eps) = sup_v P(|S - v| <= eps) for S = sum a_k xi_k.
// The bound methods return the raw bound, which may exceed 1.
struct ConcentrationResult {
    double epsilon = 0.0;
    double value = 0.0;
    ConcentrationMethod method = ConcentrationMethod::exact;
    std::uint64_t trials = 0;   // monte_carlo only
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::optional<double> witness_v;  // exact and monte_carlo
};

inline constexpr std::size_t kLevyExactMaxDim = 24;

// All 2^n sums sum_k s_k |a_k|, s in {-1,1}^n, sorted ascending. Each sum is
// accumulated left to right in index order, so the values are bit-identical
// to a direct enumeration of the same sign patterns.
std::vector<double> rademacher_sums(const Vector& a);

// Largest number of sorted values in a closed window of width 2 eps, with
// edge tolerance `tol`. Returns (count, first index of the best window).
std::pair<std::size_t, std::size_t> max_window_count(std::span<const double> sorted, double eps, double tol);

// Exact L for Rademacher xi by sorting all 2^n signed sums and sliding a
// closed window of width 2 eps (edge tolerance 1e-12 |a|_1). Requires
// n <= 24 (ResourceError) and eps >= 0; eps = inf gives 1.
ConcentrationResult levy_exact_rademacher(const Vector& a, double eps);

// Empirical sup over v of the fraction of `trials` sums within eps of v,
// with a Wilson interval. The entry law of `law` gives xi. trials >= 100.
ConcentrationResult levy_monte_carlo(const EnsembleSpec& law, const Vector& a, double eps, std::uint64_t trials,
                                     const SeedPath& seed, double confidence = 0.95, unsigned workers = 1);

// 1 / (2 sin^2 1): the Esseen constant for the kernel psi(x) = max(0, 1 - |x|/2)
// whose Fourier transform is (2 sin t / t)^2 >= 4 sin^2 1 on [-1, 1].
double esseen_constant();

// C_E * int_{-2}^{2} prod_j |cos(a_j theta / eps)| d theta, integrated piecewise
// between the kinks of the integrand (absolute tolerance 1e-10). eps > 0.
ConcentrationResult esseen_bound(const Vector& a, double eps);

struct SbpConstants {
    double big_c = 10.0;
    double small_c = 0.01;
};

// Smallest eps allowed by the small-ball bound, (4 / pi) / LCD. For an
// "exceeds" LCD result this is the value at theta_max, which is an upper
// bound for the true threshold and so still admissible.
double sbp_minimal_epsilon(const LcdResult& lcd);

// C eps + C exp(-c alpha^2), after checking eps >= (4/pi) / LCD_alpha(a).
// ValidationError reports the LCD when eps is inadmissible.
ConcentrationResult sbp_bound(const LcdResult& lcd, double alpha, double eps, const SbpConstants& constants = {});
// Convenience overload that runs essential_lcd(a, {gamma, alpha, theta_max}) first.
ConcentrationResult sbp_bound(const Vector& a, double alpha, double gamma, double eps, const SbpConstants& constants = {},
                              double theta_max = 1000.0);

// (ES^2 - lambda^2)^2 / ES^4, a lower bound for P(|S| > lambda).
// Requires 0 < lambda < sqrt(ES^2) and ES^4 > 0.
double paley_zygmund(double es2, double es4, double lambda);

struct Moments {
    double second = 0.0;
    double fourth = 0.0;
};
// Exact ES^2 = |a|^2 and ES^4 = 3|a|^4 - 2 sum a_k^4 for Rademacher sums.
Moments rademacher_moments(const Vector& a);

// Law of one coordinate zeta in the tensorization check.
struct CoordinateLaw {
    enum class Kind { gaussian, uniform_symmetric, discrete, rademacher_sum } kind = Kind::gaussian;
    std::vector<Atom> atoms;  // discrete
    Vector weights;           // rademacher_sum: zeta = sum weights_k xi_k

    static CoordinateLaw gaussian() { return {}; }
    static CoordinateLaw rademacher_sum(Vector w) { return {Kind::rademacher_sum, {}, std::move(w)}; }
};

// sup over eps >= eps0 of P(|zeta| < eps) / eps, computed exactly from the
// law (closed form for the continuous kinds, step-function maximum for
// atoms). +inf when eps0 = 0 and zeta has an atom at 0.
double small_ball_ratio_sup(const CoordinateLaw& law, double eps0);

double sample_coordinate(const CoordinateLaw& law, Rng& rng, std::normal_distribution<double>& normal);

struct TensorizationRow {
    double epsilon = 0.0;
    double estimate = 0.0;  // Monte Carlo P(sum zeta_k^2 < eps^2 m)
    double ci_low = 0.0;
    double ci_high = 0.0;
    double bound = 0.0;     // (C_T K eps)^m
    bool pass = false;      // estimate <= bound
};

struct TensorizationReport {
    bool hypothesis_holds = false;
    double hypothesis_sup = 0.0;  // small_ball_ratio_sup(law, eps0)
    double k = 0.0;
    double eps0 = 0.0;
    std::size_t m = 0;
    double c_t = 30.0;
    std::uint64_t trials = 0;
    std::vector<TensorizationRow> rows;

    bool passed() const;
};

// Checks P(|zeta| < eps) <= K eps for eps >= eps0 first; when it fails the
// report carries hypothesis_holds = false and no rows. Otherwise estimates
// P(sum_{k<=m} zeta_k^2 < eps^2 m) on each grid point in [eps0, 1].
TensorizationReport tensorization_audit(const CoordinateLaw& law, double k, double eps0, std::size_t m,
                                        std::span<const double> eps_grid, std::uint64_t trials, const SeedPath& seed,
                                        double c_t = 30.0, unsigned workers = 1);

// Columns: method, epsilon, value, ci_low, ci_high, witness_v.
void write_concentration_csv(std::ostream& out, std::span<const ConcentrationResult> rows);

}  // namespace rmt
