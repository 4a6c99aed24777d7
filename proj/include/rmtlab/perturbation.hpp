#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "rmtlab/seed.hpp"
#include "rmtlab/stats.hpp"
#include "rmtlab/types.hpp"

namespace rmt {

enum class Group { unitary, orthogonal, special_orthogonal };

std::string to_string(Group g);
Group parse_group(const std::string& name);

// Operator-norm distance to O(n) (resp. U(n)): max_i |s_i(D) - 1|,
// attained at the polar factor. DimensionError for non-square D.
double dist_to_orthogonal(const RealMatrix& d);
double dist_to_unitary(const ComplexMatrix& d);

// P(s_n(D + U) <= t) per threshold, U Haar on `group`.
struct TailCurve {
    std::vector<double> thresholds;
    std::vector<double> probs;
    std::vector<std::uint64_t> counts;
    std::vector<Interval> ci;
    std::uint64_t trials = 0;
    std::size_t n = 0;
    Group group = Group::unitary;
    double norm_d = 0.0;
    double dist_to_group = 0.0;
    std::uint64_t seed = 0;
    std::vector<double> smallest;  // s_n(D + U) per trial, in trial order

    double half_width(std::size_t i) const { return (ci[i].high - ci[i].low) / 2.0; }
};

// Default "s_n = 0" tolerance: 1e-8 (|D| + 1).
double degeneracy_tolerance(double norm_d);

// Thresholds must be positive and strictly increasing. A real D may be
// paired with any group; a complex D only with the unitary group.
TailCurve perturbation_tail(const RealMatrix& d, Group group, std::span<const double> thresholds, std::uint64_t trials,
                            const SeedPath& seed, unsigned workers = 1);
TailCurve perturbation_tail(const ComplexMatrix& d, Group group, std::span<const double> thresholds,
                            std::uint64_t trials, const SeedPath& seed, unsigned workers = 1);

// True iff prob <= t^c n^C + CI half-width at every threshold.
bool tail_envelope_check(const TailCurve& curve, double c, double big_c);

// Columns: group, n, t, prob, ci_low, ci_high, trials, norm_D, dist_to_On, seed.
void write_tail_csv(std::ostream& out, const TailCurve& curve);

}  // namespace rmt
