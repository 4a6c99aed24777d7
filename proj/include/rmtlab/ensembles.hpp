#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "rmtlab/seed.hpp"
#include "rmtlab/types.hpp"

namespace rmt {

enum class ScalarKind { gaussian, rademacher, uniform_symmetric, discrete, heavy_tail_4th_moment };

std::string to_string(ScalarKind kind);
ScalarKind parse_scalar_kind(const std::string& name);

struct Atom {
    double value = 0.0;
    double probability = 0.0;
};

// Declarative description of an i.i.d. random matrix (or, with 1 x n, a
// random vector). With unit_variance set, the entry law is rescaled to
// variance 1; discrete laws must already be centered.
struct EnsembleSpec {
    ScalarKind kind = ScalarKind::gaussian;
    std::vector<Atom> atoms;  // discrete / heavy_tail_4th_moment; empty heavy-tail uses the default
    std::size_t rows = 1;
    std::size_t cols = 1;
    bool unit_variance = true;

    static EnsembleSpec gaussian(std::size_t rows, std::size_t cols);
    static EnsembleSpec rademacher(std::size_t rows, std::size_t cols);

    // Throws ValidationError describing the first violated invariant.
    void validate() const;

    // Atoms actually sampled from (after unit-variance scaling). Empty for
    // the continuous kinds.
    std::vector<Atom> effective_atoms() const;

    // Analytic moments of the entry law as sampled.
    double mean() const;
    double variance() const;
    double fourth_moment() const;
};

// Symmetric three-atom law {-a, 0, a} with P(+-a) = mass/2 and unit variance.
// The default mass 0.02 gives a = sqrt(50) and fourth moment 50.
std::vector<Atom> heavy_tail_atoms(double mass = 0.02);

// Draws scalars from the entry law of `spec`. Holds the normal
// distribution's cached deviate, so use one sampler per stream.
class ScalarSampler {
public:
    explicit ScalarSampler(const EnsembleSpec& spec);
    double operator()(Rng& rng);

private:
    ScalarKind kind_;
    std::normal_distribution<double> normal_;
    double scale_ = 1.0;
    std::vector<double> values_;
    std::vector<double> cumulative_;
};

RealMatrix sample_matrix(const EnsembleSpec& spec, const SeedPath& seed);

// Haar-distributed orthogonal matrix via QR of a Gaussian matrix with the
// triangular factor normalised to a positive diagonal. With special = true
// a column is negated when det < 0, giving the Haar measure on SO(n).
RealMatrix sample_haar_orthogonal(std::size_t n, const SeedPath& seed, bool special = false);

// Haar-distributed unitary matrix (QR of complex Gaussian, unit-phase diagonal).
ComplexMatrix sample_haar_unitary(std::size_t n, const SeedPath& seed);

// Moment-condition constant max_{1 <= p <= p_max} (E|X|^p)^{1/p} / sqrt(p)
// of an empirical sample. Requires at least 100 samples and p_max >= 2.
double estimate_psi2(std::span<const double> samples, int p_max);

}  // namespace rmt
