#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "rmtlab/ensembles.hpp"
#include "rmtlab/seed.hpp"
#include "rmtlab/types.hpp"

namespace rmt {

using Rational = boost::multiprecision::cpp_rational;
using Integer = boost::multiprecision::cpp_int;

// Smallest theta > 0 with theta * a integral and nonzero, computed exactly
// as lcm(denominators) / gcd(scaled numerators). nullopt for a = 0.
std::optional<Rational> exact_lcd(std::span<const Rational> a);

// dist(theta * a, Z^n), rounding each coordinate to its nearest integer.
double lattice_distance(const Vector& a, double theta);

// True iff dist(theta a, Z^n) < min(gamma |theta a|, alpha).
bool check_lcd_witness(const Vector& a, double theta, double gamma, double alpha);

struct LcdQuery {
    double gamma = 0.1;
    double alpha = 1.0;
    double theta_max = 10.0;
    std::optional<double> slack;  // defaults to alpha / 100

    double effective_slack() const { return slack ? *slack : alpha / 100.0; }
    void validate() const;
};

enum class LcdOutcome { found, exceeds };

struct LcdResult {
    LcdOutcome outcome = LcdOutcome::exceeds;
    double theta_star = 0.0;          // witness when found
    double achieved_distance = 0.0;   // dist(theta_star a, Z^n) when found
    double theta_max = 0.0;
    // True when every part of the scanned range was either excluded by the
    // Lipschitz bound or resolved to the 1e-10 refinement width. False means
    // some sub-1e-10 cells were only excluded up to that width.
    bool certified = true;
    std::uint64_t evaluations = 0;

    bool found() const { return outcome == LcdOutcome::found; }
    // theta_star when found, theta_max otherwise: a value the essential LCD
    // is known to be at least (exceeds) or at most (found).
    double value() const { return found() ? theta_star : theta_max; }
};

inline constexpr std::uint64_t kLcdGridBudget = 1'000'000'000;
inline constexpr double kLcdRefinement = 1e-10;

// Essential LCD search: the smallest theta in (0, theta_max] with
// dist(theta a, Z^n) < min(gamma |theta a|, alpha).
//
// The map theta -> dist(theta a, Z^n) - min(gamma theta |a|, alpha) is
// (1 + gamma)|a|-Lipschitz, so a positive value G at theta rules out a hit
// on [theta, theta + G / Lip). Where that step would fall below the grid
// step h = slack / (2|a|), the cell [theta, theta + h] is bisected down to
// 1e-10, leftmost half first, so the returned witness is within the
// refinement width of the infimum. Nothing in (0, 1 / (2|a|_inf)] can hit,
// since there the nearest lattice point is 0.
//
// Requires |a| = 1 within 1e-10 (ValidationError) and theta_max / h at most
// 1e9 grid steps (ResourceError).
LcdResult essential_lcd(const Vector& a, const LcdQuery& query);

enum class Compressibility { compressible, incompressible };

// Constants of the spread-set extraction for incompressible vectors:
// nu1 = delta rho^2 / 4, nu2 = rho / sqrt(2), nu3 = sqrt(2 / delta).
struct SpreadConstants {
    double nu1 = 0.0;
    double nu2 = 0.0;
    double nu3 = 0.0;

    static SpreadConstants from(double delta, double rho);
};

struct CompressibilityReport {
    double delta = 0.0;
    double rho = 0.0;
    std::size_t sparsity = 0;          // floor(delta n)
    double distance_to_sparse = 0.0;
    Compressibility klass = Compressibility::compressible;
    std::vector<std::size_t> spread_set;  // filled when incompressible
    SpreadConstants nu;
};

// Exact distance from x to the floor(delta n)-sparse vectors (the l2 norm
// of all but the floor(delta n) largest-magnitude coordinates, summed in
// index order), compressible iff that distance is <= rho.
CompressibilityReport classify(const Vector& x, double delta, double rho);

struct SpreadSet {
    std::vector<std::size_t> indices;
    SpreadConstants nu;
};

// {k : nu2 / sqrt(n) <= |x_k| <= nu3 / sqrt(n)} for an incompressible x.
// ValidationError when x is compressible; CalibrationError when the set has
// fewer than nu1 * n elements.
SpreadSet spread_set(const Vector& x, double delta, double rho);

// Supremum of the lambda with lambda (nu3 + 2 gamma / nu1) < 1, for which
// every incompressible vector has essential LCD >= lambda sqrt(n).
// Requires gamma_check < nu2 sqrt(nu1 / 2) (ValidationError otherwise).
double incompressible_lcd_floor(double delta, double rho, double gamma_check);

struct KernelLcdSummary {
    std::size_t n = 0;
    std::size_t trials = 0;
    std::size_t degenerate = 0;   // trials whose columns failed the rank test
    std::size_t exceeds = 0;
    double theta_max = 0.0;
    std::vector<double> found_values;  // sorted ascending

    double exceeds_fraction() const;
    // Empirical quantile of the found values (NaN when none were found).
    double quantile(double q) const;
    std::size_t count_below(double floor) const;
};

// exp(n / 4), the default search ceiling of the random-normal experiment.
double default_kernel_theta_max(std::size_t n);

// Samples n-1 i.i.d. columns in R^n from `law`, takes their unit normal and
// runs essential_lcd with `query`. Requires n <= 64 (ResourceError).
KernelLcdSummary kernel_lcd_experiment(const EnsembleSpec& law, std::size_t n, std::size_t trials, const LcdQuery& query,
                                       const SeedPath& seed, unsigned workers = 1);

// Random unit vectors whose essential LCD (as found by essential_lcd with
// theta_max = 2D) lies in [D, 2D). Throws ResourceError if `count` such
// vectors are not found within max_attempts draws.
std::vector<Vector> sample_level_set(std::size_t n, double level, const LcdQuery& query, std::size_t count,
                                     const SeedPath& seed, std::size_t max_attempts = 1'000'000);

// Columns: outcome, theta_star, achieved_distance, theta_max, certified, evaluations.
void write_lcd_csv(std::ostream& out, std::span<const LcdResult> rows);
// Columns: delta, rho, sparsity, distance_to_sparse, class, spread_size, nu1, nu2, nu3.
void write_compressibility_csv(std::ostream& out, std::span<const CompressibilityReport> rows);

}  // namespace rmt
