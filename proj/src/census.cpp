#include "rmtlab/census.hpp"

#include <string>
#include <utility>

#include "rmtlab/errors.hpp"
#include "rmtlab/parallel.hpp"

namespace rmt {

std::int64_t bareiss_determinant(std::vector<std::int64_t> m, std::size_t n) {
    if (m.size() != n * n) throw DimensionError("bareiss_determinant: expected n * n entries");
    if (n == 0) return 1;
    auto at = [&](std::size_t i, std::size_t j) -> std::int64_t& { return m[i * n + j]; };
    std::int64_t sign = 1;
    std::int64_t prev = 1;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        if (at(k, k) == 0) {
            std::size_t p = k + 1;
            while (p < n && at(p, k) == 0) ++p;
            if (p == n) return 0;
            for (std::size_t j = 0; j < n; ++j) std::swap(at(k, j), at(p, j));
            sign = -sign;
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            for (std::size_t j = k + 1; j < n; ++j) {
                const __int128 num = static_cast<__int128>(at(i, j)) * at(k, k) - static_cast<__int128>(at(i, k)) * at(k, j);
                at(i, j) = static_cast<std::int64_t>(num / prev);
            }
        }
        prev = at(k, k);
    }
    return sign * at(n - 1, n - 1);
}

SignCensus sign_census(std::size_t n, unsigned workers) {
    if (n == 0) throw ValidationError("sign_census: n must be positive");
    if (n > kSignCensusMaxDim)
        throw ResourceError("sign_census: n = " + std::to_string(n) + " needs 2^" + std::to_string(n * n) +
                            " matrices; the exact census stops at n = 5");
    const std::size_t bits = n * n;
    const std::uint64_t total = std::uint64_t{1} << bits;
    const std::size_t block_bits = bits > 3 ? 3 : 0;
    const std::uint64_t blocks = std::uint64_t{1} << block_bits;
    const std::uint64_t per_block = total >> block_bits;

    std::vector<std::uint64_t> counts(blocks, 0);
    parallel_for(blocks, workers, [&](std::size_t b) {
        std::vector<std::int64_t> m(bits);
        std::uint64_t count = 0;
        for (std::uint64_t mask = b * per_block; mask < (b + 1) * per_block; ++mask) {
            for (std::size_t k = 0; k < bits; ++k) m[k] = ((mask >> k) & 1U) ? -1 : 1;
            if (bareiss_determinant(m, n) == 0) ++count;
        }
        counts[b] = count;
    });
    SignCensus census{n, 0, total};
    for (auto c : counts) census.singular += c;
    return census;
}

SignCensusEstimate sign_census_monte_carlo(std::size_t n, std::uint64_t trials, const SeedPath& seed, unsigned workers) {
    if (n == 0 || n > 16) throw ValidationError("sign_census_monte_carlo: n must lie in [1, 16]");
    if (trials == 0) throw ValidationError("sign_census_monte_carlo: trials must be positive");
    std::vector<unsigned char> singular(trials, 0);
    parallel_for(trials, workers, [&](std::size_t t) {
        Rng rng(seed.with_trial(t));
        std::vector<std::int64_t> m(n * n);
        for (auto& e : m) e = (rng() >> 63) ? -1 : 1;
        singular[t] = bareiss_determinant(std::move(m), n) == 0;
    });
    SignCensusEstimate est;
    est.n = n;
    est.trials = trials;
    for (auto s : singular) est.singular += s;
    est.estimate = static_cast<double>(est.singular) / static_cast<double>(trials);
    est.ci = wilson_interval(est.singular, trials);
    return est;
}

}  // namespace rmt
