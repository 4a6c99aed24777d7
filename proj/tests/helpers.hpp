#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "rmtlab/config.hpp"
#include "rmtlab/seed.hpp"
#include "rmtlab/structure.hpp"
#include "rmtlab/types.hpp"

namespace testing {

inline rmt::Vector unit_gaussian(std::size_t n, rmt::Rng& rng) {
    std::normal_distribution<double> normal;
    rmt::Vector x(static_cast<Eigen::Index>(n));
    do {
        for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = normal(rng);
    } while (x.norm() == 0.0);
    return x.normalized();
}

inline rmt::RealMatrix gaussian_matrix(std::size_t rows, std::size_t cols, rmt::Rng& rng) {
    std::normal_distribution<double> normal;
    rmt::RealMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = normal(rng);
    return m;
}

inline rmt::Rng rng_for(const std::string& label, std::uint64_t trial = 0) {
    return rmt::Rng(rmt::SeedPath{20260101, label, trial});
}

// Cofactor expansion along the first row; exponential, for n <= 8 only.
template <class M>
double cofactor_det(const M& m) {
    const Eigen::Index n = m.rows();
    if (n == 1) return m(0, 0);
    double det = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        Eigen::MatrixXd minor(n - 1, n - 1);
        for (Eigen::Index r = 1; r < n; ++r)
            for (Eigen::Index c = 0, cc = 0; c < n; ++c)
                if (c != j) minor(r - 1, cc++) = m(r, c);
        det += ((j % 2) ? -1.0 : 1.0) * m(0, j) * cofactor_det(minor);
    }
    return det;
}

// Direct enumeration of all 2^n signed sums, each summed in index order.
inline std::vector<double> naive_sums(const rmt::Vector& a) {
    const std::size_t n = static_cast<std::size_t>(a.size());
    std::vector<double> out(std::size_t{1} << n);
    for (std::size_t mask = 0; mask < out.size(); ++mask) {
        double s = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double w = std::abs(a(static_cast<Eigen::Index>(k)));
            s += (mask >> (n - 1 - k)) & 1u ? w : -w;
        }
        out[mask] = s;
    }
    std::sort(out.begin(), out.end());
    return out;
}

// Largest fraction of sorted sums in a closed window [s, s + 2 eps + tol].
inline double naive_levy(const std::vector<double>& sorted, double eps, double tol) {
    std::size_t best = 0;
    for (auto it = sorted.begin(); it != sorted.end(); ++it) {
        const auto end = std::upper_bound(it, sorted.end(), *it + 2.0 * eps + tol);
        best = std::max<std::size_t>(best, static_cast<std::size_t>(end - it));
    }
    return static_cast<double>(best) / static_cast<double>(sorted.size());
}

// Smallest l2 tail over every support of size k, summed in index order.
inline double brute_force_sparse_distance(const rmt::Vector& x, std::size_t k) {
    const std::size_t n = static_cast<std::size_t>(x.size());
    std::vector<bool> keep(n, false);
    std::fill(keep.begin(), keep.begin() + static_cast<std::ptrdiff_t>(k), true);
    double best = INFINITY;
    do {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            if (!keep[i]) acc += x(static_cast<Eigen::Index>(i)) * x(static_cast<Eigen::Index>(i));
        best = std::min(best, std::sqrt(acc));
    } while (std::prev_permutation(keep.begin(), keep.end()));
    return best;
}

// Leibniz expansion over all n! permutations of a row-major integer matrix.
inline std::int64_t permutation_det(const std::vector<std::int64_t>& m, std::size_t n) {
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::int64_t det = 0;
    do {
        int inversions = 0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) inversions += perm[i] > perm[j];
        std::int64_t term = inversions % 2 ? -1 : 1;
        for (std::size_t i = 0; i < n; ++i) term *= m[i * n + perm[i]];
        det += term;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return det;
}

inline std::uint64_t permutation_census(std::size_t n) {
    const std::size_t cells = n * n;
    std::uint64_t singular = 0;
    std::vector<std::int64_t> m(cells);
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << cells); ++mask) {
        for (std::size_t k = 0; k < cells; ++k) m[k] = (mask >> k) & 1u ? -1 : 1;
        singular += permutation_det(m, n) == 0;
    }
    return singular;
}


// Rejection sampling from the sphere down to the (delta, rho)-incompressible part.
inline rmt::Vector random_incompressible(std::size_t n, rmt::Rng& rng, double delta = 0.25, double rho = 0.5) {
    for (;;) {
        rmt::Vector x = unit_gaussian(n, rng);
        if (rmt::classify(x, delta, rho).klass == rmt::Compressibility::incompressible) return x;
    }
}

// One small config per experiment, used for the reproducibility checks.
inline std::vector<rmt::Config> small_configs() {
    const char* texts[] = {
        "experiment = tail_square\nn = 12\ntrials = 300\n",
        "experiment = tail_rectangular\nn = 4\nN = 12\nc1_grid = 0.05, 0.2\ntrials = 300\n",
        "experiment = sign_census\nn = 3\ntrials = 500\n",
        "experiment = edelman\nn = 15\ntrials = 300\n",
        "experiment = levy\nweights = random\nn = 10\neps_grid = 0.1, 0.5\nmethods = exact, monte_carlo, esseen\ntrials = 500\n",
        "experiment = lcd\nmode = kernel\nn = 6\ntrials = 40\ntheta_max = 50\n",
        "experiment = lcd\nmode = vector\nweights = random\nn = 5\ngamma = 0.2\nalpha = 0.5\ntheta_max = 40\n",
        "experiment = khinchin\nn = 3\nN = 9\np_grid = 1, 2, 3\nstarts = 30\ntrials = 4\n",
        "experiment = kashin\nn = 6\nN = 9\nsamples = 200\ntrials = 4\n",
        "experiment = perturb\nn = 4\ngroup = unitary\nd = gaussian\ntrials = 200\n",
        "experiment = net_audit\nn = 2\neps = 0.5\nsamples = 500\ntrials = 3\n",
    };
    std::vector<rmt::Config> out;
    for (const char* t : texts) out.push_back(rmt::Config::parse(t));
    return out;
}

}  // namespace testing
