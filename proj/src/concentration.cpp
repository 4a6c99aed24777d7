#include "rmtlab/concentration.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>

#include "rmtlab/csv.hpp"
#include "rmtlab/errors.hpp"
#include "rmtlab/parallel.hpp"
#include "rmtlab/stats.hpp"

namespace rmt {

std::string to_string(ConcentrationMethod method) {
    switch (method) {
    case ConcentrationMethod::exact: return "exact";
    case ConcentrationMethod::monte_carlo: return "monte_carlo";
    case ConcentrationMethod::esseen_bound: return "esseen_bound";
    case ConcentrationMethod::sbp_bound: return "sbp_bound";
    }
    return "unknown";
}

std::vector<double> rademacher_sums(const Vector& a) {
    const auto n = static_cast<std::size_t>(a.size());
    if (n > kLevyExactMaxDim)
        throw ResourceError("rademacher_sums: n = " + std::to_string(n) + " exceeds the 2^24 enumeration budget; use Monte Carlo");
    std::vector<double> sums{0.0};
    sums.reserve(std::size_t{1} << n);
    std::vector<double> lo, hi;
    for (std::size_t k = 0; k < n; ++k) {
        const double w = std::abs(a(static_cast<Eigen::Index>(k)));
        lo.resize(sums.size());
        hi.resize(sums.size());
        for (std::size_t i = 0; i < sums.size(); ++i) {
            lo[i] = sums[i] - w;
            hi[i] = sums[i] + w;
        }
        sums.resize(2 * lo.size());
        std::merge(lo.begin(), lo.end(), hi.begin(), hi.end(), sums.begin());
    }
    return sums;
}

std::pair<std::size_t, std::size_t> max_window_count(std::span<const double> sorted, double eps, double tol) {
    std::size_t best = 0, best_start = 0, j = 0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double edge = sorted[i] + 2.0 * eps + tol;
        if (j < i) j = i;
        while (j < sorted.size() && sorted[j] <= edge) ++j;
        if (j - i > best) {
            best = j - i;
            best_start = i;
        }
    }
    return {best, best_start};
}

ConcentrationResult levy_exact_rademacher(const Vector& a, double eps) {
    if (std::isnan(eps) || eps < 0.0) throw ValidationError("levy_exact_rademacher: eps must be nonnegative");
    if (!a.allFinite()) throw ValidationError("levy_exact_rademacher: weights must be finite");
    ConcentrationResult r;
    r.epsilon = eps;
    r.method = ConcentrationMethod::exact;
    if (std::isinf(eps)) {
        r.value = 1.0;
        r.witness_v = 0.0;
        return r;
    }
    const auto sums = rademacher_sums(a);
    const auto [count, start] = max_window_count(sums, eps, 1e-12 * a.lpNorm<1>());
    r.value = std::ldexp(static_cast<double>(count), -static_cast<int>(a.size()));
    r.witness_v = sums[start] + eps;
    return r;
}

ConcentrationResult levy_monte_carlo(const EnsembleSpec& law, const Vector& a, double eps, std::uint64_t trials,
                                     const SeedPath& seed, double confidence, unsigned workers) {
    if (trials < 100) throw ValidationError("levy_monte_carlo: at least 100 trials are required");
    if (std::isnan(eps) || eps < 0.0) throw ValidationError("levy_monte_carlo: eps must be nonnegative");
    law.validate();

    std::vector<double> sums(trials);
    parallel_for(trials, workers, [&](std::size_t t) {
        ScalarSampler draw(law);
        Rng rng(seed.with_trial(t));
        double s = 0.0;
        for (Eigen::Index k = 0; k < a.size(); ++k) s += a(k) * draw(rng);
        sums[t] = s;
    });
    std::sort(sums.begin(), sums.end());

    ConcentrationResult r;
    r.epsilon = eps;
    r.method = ConcentrationMethod::monte_carlo;
    r.trials = trials;
    std::size_t count = trials, start = 0;
    if (!std::isinf(eps)) std::tie(count, start) = max_window_count(sums, eps, 1e-12 * a.lpNorm<1>());
    r.value = static_cast<double>(count) / static_cast<double>(trials);
    const auto ci = wilson_interval(count, trials, confidence);
    r.ci_low = ci.low;
    r.ci_high = ci.high;
    r.witness_v = std::isinf(eps) ? 0.0 : sums[start] + eps;
    return r;
}

double esseen_constant() {
    const double s = std::sin(1.0);
    return 1.0 / (2.0 * s * s);
}

ConcentrationResult esseen_bound(const Vector& a, double eps) {
    if (!(eps > 0.0)) throw ValidationError("esseen_bound: eps must be positive");
    if (!a.allFinite()) throw ValidationError("esseen_bound: weights must be finite");

    // The integrand is even; on [0, 2] it is smooth between the zeros of the
    // cosines, theta = eps (pi/2 + k pi) / |a_j|.
    std::vector<double> cuts{0.0, 2.0};
    for (Eigen::Index j = 0; j < a.size(); ++j) {
        const double w = std::abs(a(j));
        if (w == 0.0) continue;
        for (double k = 0.0;; k += 1.0) {
            const double theta = eps * (std::numbers::pi / 2.0 + k * std::numbers::pi) / w;
            if (theta >= 2.0) break;
            cuts.push_back(theta);
            if (cuts.size() > 1'000'000) throw ResourceError("esseen_bound: more than 1e6 integrand kinks; eps too small");
        }
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    auto f = [&](double theta) {
        double p = 1.0;
        for (Eigen::Index j = 0; j < a.size(); ++j) p *= std::abs(std::cos(a(j) * theta / eps));
        return p;
    };
    double integral = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        if (cuts[i + 1] <= cuts[i]) continue;
        double err = 0.0;
        integral += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, cuts[i], cuts[i + 1], 15, 1e-12, &err);
    }

    ConcentrationResult r;
    r.epsilon = eps;
    r.method = ConcentrationMethod::esseen_bound;
    r.value = esseen_constant() * 2.0 * integral;
    return r;
}

double sbp_minimal_epsilon(const LcdResult& lcd) {
    return (4.0 / std::numbers::pi) / lcd.value();
}

ConcentrationResult sbp_bound(const LcdResult& lcd, double alpha, double eps, const SbpConstants& constants) {
    if (!(constants.big_c > 0.0 && constants.small_c > 0.0)) throw ValidationError("sbp_bound: constants must be positive");
    const double minimal = sbp_minimal_epsilon(lcd);
    if (!(eps >= minimal))
        throw ValidationError("sbp_bound: eps = " + format_double(eps) + " is below (4/pi)/LCD = " + format_double(minimal) +
                              " (LCD " + (lcd.found() ? "= " : "> ") + format_double(lcd.value()) + ")");
    ConcentrationResult r;
    r.epsilon = eps;
    r.method = ConcentrationMethod::sbp_bound;
    r.value = constants.big_c * eps + constants.big_c * std::exp(-constants.small_c * alpha * alpha);
    return r;
}

ConcentrationResult sbp_bound(const Vector& a, double alpha, double gamma, double eps, const SbpConstants& constants,
                              double theta_max) {
    LcdQuery q;
    q.gamma = gamma;
    q.alpha = alpha;
    q.theta_max = theta_max;
    return sbp_bound(essential_lcd(a, q), alpha, eps, constants);
}

double paley_zygmund(double es2, double es4, double lambda) {
    if (!(es4 > 0.0)) throw ValidationError("paley_zygmund: ES^4 must be positive");
    if (!(lambda > 0.0) || !(lambda * lambda < es2)) throw ValidationError("paley_zygmund: lambda must lie in (0, sqrt(ES^2))");
    const double d = es2 - lambda * lambda;
    return d * d / es4;
}

Moments rademacher_moments(const Vector& a) {
    const double s2 = a.squaredNorm();
    return {s2, 3.0 * s2 * s2 - 2.0 * a.array().pow(4).sum()};
}

namespace {

// sup over eps >= eps0 of P(|zeta| < eps) / eps for a law with atoms at the
// sorted magnitudes t_k (masses w_k). On (t_k, t_{k+1}] the numerator is the
// mass up to t_k, so the ratio peaks just above each t_k.
double atomic_ratio_sup(std::vector<std::pair<double, double>> mags, double eps0) {
    std::sort(mags.begin(), mags.end());
    double below_eps0 = 0.0;
    for (const auto& [t, w] : mags)
        if (t < eps0) below_eps0 += w;
    double best = eps0 > 0.0 ? below_eps0 / eps0 : 0.0;
    double cumulative = 0.0;
    for (const auto& [t, w] : mags) {
        cumulative += w;
        if (t < eps0) continue;
        if (t == 0.0) return std::numeric_limits<double>::infinity();
        best = std::max(best, cumulative / t);
    }
    return best;
}

}  // namespace

double small_ball_ratio_sup(const CoordinateLaw& law, double eps0) {
    if (std::isnan(eps0) || eps0 < 0.0) throw ValidationError("small_ball_ratio_sup: eps0 must be nonnegative");
    switch (law.kind) {
    case CoordinateLaw::Kind::gaussian:
        // 2 Phi(eps) - 1 is concave on [0, inf), so the ratio decreases.
        return eps0 == 0.0 ? std::sqrt(2.0 / std::numbers::pi) : (2.0 * standard_normal_cdf(eps0) - 1.0) / eps0;
    case CoordinateLaw::Kind::uniform_symmetric:
        // Uniform on [-sqrt 3, sqrt 3].
        return eps0 <= std::sqrt(3.0) ? 1.0 / std::sqrt(3.0) : 1.0 / eps0;
    case CoordinateLaw::Kind::discrete: {
        std::vector<std::pair<double, double>> mags;
        for (const auto& at : law.atoms) mags.emplace_back(std::abs(at.value), at.probability);
        return atomic_ratio_sup(std::move(mags), eps0);
    }
    case CoordinateLaw::Kind::rademacher_sum: {
        const auto sums = rademacher_sums(law.weights);
        const double w = std::ldexp(1.0, -static_cast<int>(law.weights.size()));
        std::vector<std::pair<double, double>> mags;
        mags.reserve(sums.size());
        for (double s : sums) mags.emplace_back(std::abs(s), w);
        return atomic_ratio_sup(std::move(mags), eps0);
    }
    }
    return std::numeric_limits<double>::infinity();
}

double sample_coordinate(const CoordinateLaw& law, Rng& rng, std::normal_distribution<double>& normal) {
    switch (law.kind) {
    case CoordinateLaw::Kind::gaussian: return normal(rng);
    case CoordinateLaw::Kind::uniform_symmetric: return std::sqrt(3.0) * (2.0 * rng.uniform01() - 1.0);
    case CoordinateLaw::Kind::discrete: {
        double u = rng.uniform01();
        for (const auto& at : law.atoms) {
            if (u < at.probability) return at.value;
            u -= at.probability;
        }
        return law.atoms.back().value;
    }
    case CoordinateLaw::Kind::rademacher_sum: {
        double s = 0.0;
        for (Eigen::Index k = 0; k < law.weights.size(); ++k) s += ((rng() >> 63) ? 1.0 : -1.0) * law.weights(k);
        return s;
    }
    }
    return 0.0;
}

bool TensorizationReport::passed() const {
    if (!hypothesis_holds) return false;
    return std::all_of(rows.begin(), rows.end(), [](const TensorizationRow& r) { return r.pass; });
}

TensorizationReport tensorization_audit(const CoordinateLaw& law, double k, double eps0, std::size_t m,
                                        std::span<const double> eps_grid, std::uint64_t trials, const SeedPath& seed,
                                        double c_t, unsigned workers) {
    if (m < 1) throw ValidationError("tensorization_audit: m must be positive");
    if (!(k > 0.0)) throw ValidationError("tensorization_audit: K must be positive");
    if (trials < 1) throw ValidationError("tensorization_audit: trials must be positive");
    if (law.kind == CoordinateLaw::Kind::discrete && law.atoms.empty())
        throw ValidationError("tensorization_audit: discrete law needs atoms");

    TensorizationReport report;
    report.k = k;
    report.eps0 = eps0;
    report.m = m;
    report.c_t = c_t;
    report.trials = trials;
    report.hypothesis_sup = small_ball_ratio_sup(law, eps0);
    report.hypothesis_holds = report.hypothesis_sup <= k * (1.0 + 1e-12);
    if (!report.hypothesis_holds) return report;

    for (double eps : eps_grid)
        if (!(eps >= eps0 && eps <= 1.0)) throw ValidationError("tensorization_audit: grid points must lie in [eps0, 1]");

    std::vector<double> norms(trials);
    parallel_for(trials, workers, [&](std::size_t t) {
        Rng rng(seed.with_trial(t));
        std::normal_distribution<double> normal;
        double acc = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double z = sample_coordinate(law, rng, normal);
            acc += z * z;
        }
        norms[t] = acc;
    });
    std::sort(norms.begin(), norms.end());

    const double md = static_cast<double>(m);
    for (double eps : eps_grid) {
        const auto hits = static_cast<std::uint64_t>(std::lower_bound(norms.begin(), norms.end(), eps * eps * md) - norms.begin());
        TensorizationRow row;
        row.epsilon = eps;
        row.estimate = static_cast<double>(hits) / static_cast<double>(trials);
        const auto ci = wilson_interval(hits, trials);
        row.ci_low = ci.low;
        row.ci_high = ci.high;
        row.bound = std::pow(c_t * k * eps, md);
        row.pass = row.estimate <= row.bound;
        report.rows.push_back(row);
    }
    return report;
}

void write_concentration_csv(std::ostream& out, std::span<const ConcentrationResult> rows) {
    CsvRow().add("method").add("epsilon").add("value").add("ci_low").add("ci_high").add("witness_v").write(out);
    for (const auto& r : rows) {
        CsvRow row;
        row.add(to_string(r.method)).add(r.epsilon).add(r.value);
        if (r.method == ConcentrationMethod::monte_carlo) {
            row.add(r.ci_low).add(r.ci_high);
        } else {
            row.add("").add("");
        }
        if (r.witness_v) {
            row.add(*r.witness_v);
        } else {
            row.add("");
        }
        row.write(out);
    }
}

}  // namespace rmt
