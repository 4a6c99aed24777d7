#include "rmtlab/structure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>

#include "rmtlab/csv.hpp"
#include "rmtlab/errors.hpp"
#include "rmtlab/parallel.hpp"
#include "rmtlab/spectra.hpp"

namespace rmt {

std::optional<Rational> exact_lcd(std::span<const Rational> a) {
    Integer common_denominator = 1;
    bool any_nonzero = false;
    for (const auto& q : a) {
        if (q == 0) continue;
        any_nonzero = true;
        common_denominator = boost::multiprecision::lcm(common_denominator, boost::multiprecision::denominator(q));
    }
    if (!any_nonzero) return std::nullopt;

    Integer g = 0;
    for (const auto& q : a) {
        if (q == 0) continue;
        const Integer scaled = boost::multiprecision::numerator(q) * (common_denominator / boost::multiprecision::denominator(q));
        g = boost::multiprecision::gcd(g, boost::multiprecision::abs(scaled));
    }
    return Rational(common_denominator, g);
}

double lattice_distance(const Vector& a, double theta) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        const double v = theta * a(i);
        const double d = v - std::round(v);
        acc += d * d;
    }
    return std::sqrt(acc);
}

bool check_lcd_witness(const Vector& a, double theta, double gamma, double alpha) {
    if (!(theta > 0.0)) return false;
    return lattice_distance(a, theta) < std::min(gamma * theta * a.norm(), alpha);
}

void LcdQuery::validate() const {
    if (!(gamma > 0.0 && gamma < 1.0)) throw ValidationError("LcdQuery: gamma must lie in (0, 1)");
    if (!(alpha > 0.0)) throw ValidationError("LcdQuery: alpha must be positive");
    if (!(theta_max > 0.0) || !std::isfinite(theta_max)) throw ValidationError("LcdQuery: theta_max must be positive");
    if (!(effective_slack() > 0.0)) throw ValidationError("LcdQuery: slack must be positive");
}

namespace {

class LcdScanner {
public:
    LcdScanner(const Vector& a, const LcdQuery& q)
        : a_(a), gamma_(q.gamma), alpha_(q.alpha), norm_(a.norm()), lip_((1.0 + q.gamma) * norm_) {}

    double gap(double theta) {
        ++evaluations_;
        if (evaluations_ > kLcdGridBudget) throw ResourceError("essential_lcd: evaluation budget exhausted");
        return lattice_distance(a_, theta) - std::min(gamma_ * theta * norm_, alpha_);
    }

    // Smallest hit in [l, r] up to the refinement width, leftmost first.
    std::optional<double> refine(double l, double r) {
        const double mid = 0.5 * (l + r);
        const double gm = gap(mid);
        if (gm - lip_ * (r - l) / 2.0 >= 0.0) return std::nullopt;
        const double width = std::max(kLcdRefinement, 4.0 * std::numeric_limits<double>::epsilon() * r);
        if (r - l <= width || mid <= l || mid >= r) {
            if (gap(l) < 0.0) return l;
            if (gm < 0.0) return mid;
            if (gap(r) < 0.0) return r;
            uncertain_ = true;
            return std::nullopt;
        }
        if (auto left = refine(l, mid)) return left;
        return refine(mid, r);
    }

    double lipschitz() const { return lip_; }
    bool uncertain() const { return uncertain_; }
    std::uint64_t evaluations() const { return evaluations_; }

private:
    const Vector& a_;
    double gamma_;
    double alpha_;
    double norm_;
    double lip_;
    std::uint64_t evaluations_ = 0;
    bool uncertain_ = false;
};

}  // namespace

LcdResult essential_lcd(const Vector& a, const LcdQuery& query) {
    query.validate();
    if (a.size() == 0 || !a.allFinite()) throw ValidationError("essential_lcd: vector must be finite and nonempty");
    if (std::abs(a.norm() - 1.0) > 1e-10) throw ValidationError("essential_lcd: vector must have unit norm");

    const double norm = a.norm();
    const double step = query.effective_slack() / (2.0 * norm);
    if (query.theta_max / step > static_cast<double>(kLcdGridBudget))
        throw ResourceError("essential_lcd: theta_max / grid step = " + std::to_string(query.theta_max / step) +
                            " exceeds the 1e9 grid-step budget");

    LcdScanner scan(a, query);
    LcdResult result;
    result.theta_max = query.theta_max;

    auto found = [&](double theta) {
        result.outcome = LcdOutcome::found;
        result.theta_star = theta;
        result.achieved_distance = lattice_distance(a, theta);
        result.certified = !scan.uncertain();
        result.evaluations = scan.evaluations();
        return result;
    };

    double theta = 0.5 / a.cwiseAbs().maxCoeff();
    while (theta <= query.theta_max) {
        const double g = scan.gap(theta);
        if (g < 0.0) return found(theta);
        const double safe = g / scan.lipschitz();
        if (safe >= step) {
            theta += safe;
            continue;
        }
        const double right = std::min(theta + step, query.theta_max);
        if (auto hit = scan.refine(theta, right)) return found(*hit);
        if (right >= query.theta_max) break;
        theta = right;
    }
    result.outcome = LcdOutcome::exceeds;
    result.certified = !scan.uncertain();
    result.evaluations = scan.evaluations();
    return result;
}

SpreadConstants SpreadConstants::from(double delta, double rho) {
    return {delta * rho * rho / 4.0, rho / std::sqrt(2.0), std::sqrt(2.0 / delta)};
}

namespace {

void check_compressibility_params(double delta, double rho) {
    if (!(delta > 0.0 && delta < 1.0)) throw ValidationError("compressibility: delta must lie in (0, 1)");
    if (!(rho > 0.0 && rho < 1.0)) throw ValidationError("compressibility: rho must lie in (0, 1)");
}

std::size_t sparsity_level(std::size_t n, double delta) {
    return static_cast<std::size_t>(std::floor(delta * static_cast<double>(n) * (1.0 + 1e-12)));
}

std::vector<std::size_t> spread_indices(const Vector& x, const SpreadConstants& nu) {
    const double root_n = std::sqrt(static_cast<double>(x.size()));
    const double lo = nu.nu2 / root_n;
    const double hi = nu.nu3 / root_n;
    std::vector<std::size_t> out;
    for (Eigen::Index k = 0; k < x.size(); ++k) {
        const double m = std::abs(x(k));
        if (m >= lo && m <= hi) out.push_back(static_cast<std::size_t>(k));
    }
    return out;
}

}  // namespace

CompressibilityReport classify(const Vector& x, double delta, double rho) {
    check_compressibility_params(delta, rho);
    const auto n = static_cast<std::size_t>(x.size());
    const std::size_t k = sparsity_level(n, delta);
    if (k == 0) throw ValidationError("classify: floor(delta n) is 0, no nonzero sparse vectors");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
        return std::abs(x(static_cast<Eigen::Index>(i))) > std::abs(x(static_cast<Eigen::Index>(j)));
    });
    std::vector<bool> kept(n, false);
    for (std::size_t i = 0; i < std::min(k, n); ++i) kept[order[i]] = true;
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        if (!kept[i]) acc += x(static_cast<Eigen::Index>(i)) * x(static_cast<Eigen::Index>(i));

    CompressibilityReport report;
    report.delta = delta;
    report.rho = rho;
    report.sparsity = k;
    report.distance_to_sparse = std::sqrt(acc);
    report.klass = report.distance_to_sparse <= rho ? Compressibility::compressible : Compressibility::incompressible;
    report.nu = SpreadConstants::from(delta, rho);
    if (report.klass == Compressibility::incompressible) report.spread_set = spread_indices(x, report.nu);
    return report;
}

SpreadSet spread_set(const Vector& x, double delta, double rho) {
    const auto report = classify(x, delta, rho);
    if (report.klass != Compressibility::incompressible) throw ValidationError("spread_set: vector is compressible");
    const double required = report.nu.nu1 * static_cast<double>(x.size());
    if (static_cast<double>(report.spread_set.size()) < required)
        throw CalibrationError("spread_set: |sigma(x)| = " + std::to_string(report.spread_set.size()) +
                               " is below nu1 * n = " + std::to_string(required));
    return {report.spread_set, report.nu};
}

double incompressible_lcd_floor(double delta, double rho, double gamma_check) {
    check_compressibility_params(delta, rho);
    const auto nu = SpreadConstants::from(delta, rho);
    const double gamma_limit = nu.nu2 * std::sqrt(nu.nu1 / 2.0);
    if (!(gamma_check > 0.0) || !(gamma_check < gamma_limit))
        throw ValidationError("incompressible_lcd_floor: gamma must lie in (0, nu2 sqrt(nu1/2)) = (0, " +
                              std::to_string(gamma_limit) + ")");
    return 1.0 / (nu.nu3 + 2.0 * gamma_check / nu.nu1);
}

double KernelLcdSummary::exceeds_fraction() const {
    const std::size_t valid = trials - degenerate;
    return valid == 0 ? 0.0 : static_cast<double>(exceeds) / static_cast<double>(valid);
}

double KernelLcdSummary::quantile(double q) const {
    if (found_values.empty()) return std::numeric_limits<double>::quiet_NaN();
    const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(found_values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = static_cast<std::size_t>(std::ceil(pos));
    return found_values[lo] + (pos - static_cast<double>(lo)) * (found_values[hi] - found_values[lo]);
}

std::size_t KernelLcdSummary::count_below(double floor) const {
    return static_cast<std::size_t>(std::lower_bound(found_values.begin(), found_values.end(), floor) - found_values.begin());
}

double default_kernel_theta_max(std::size_t n) {
    return std::exp(static_cast<double>(n) / 4.0);
}

KernelLcdSummary kernel_lcd_experiment(const EnsembleSpec& law, std::size_t n, std::size_t trials, const LcdQuery& query,
                                       const SeedPath& seed, unsigned workers) {
    if (n < 2) throw ValidationError("kernel_lcd_experiment: n must be at least 2");
    if (n > 64) throw ResourceError("kernel_lcd_experiment: n > 64 exceeds the LCD search budget");
    query.validate();
    law.validate();

    struct Trial {
        bool degenerate = false;
        LcdResult lcd;
    };
    std::vector<Trial> out(trials);
    parallel_for(trials, workers, [&](std::size_t t) {
        ScalarSampler draw(law);
        Rng rng(seed.with_trial(t));
        RealMatrix rows(static_cast<Eigen::Index>(n - 1), static_cast<Eigen::Index>(n));
        for (Eigen::Index i = 0; i < rows.rows(); ++i)
            for (Eigen::Index j = 0; j < rows.cols(); ++j) rows(i, j) = draw(rng);
        try {
            const Vector z = random_normal_vector(rows);
            out[t].lcd = essential_lcd(z, query);
        } catch (const DegenerateInputError&) {
            out[t].degenerate = true;
        }
    });

    KernelLcdSummary summary;
    summary.n = n;
    summary.trials = trials;
    summary.theta_max = query.theta_max;
    for (const auto& t : out) {
        if (t.degenerate) {
            ++summary.degenerate;
        } else if (t.lcd.found()) {
            summary.found_values.push_back(t.lcd.theta_star);
        } else {
            ++summary.exceeds;
        }
    }
    std::sort(summary.found_values.begin(), summary.found_values.end());
    return summary;
}

std::vector<Vector> sample_level_set(std::size_t n, double level, const LcdQuery& query, std::size_t count,
                                     const SeedPath& seed, std::size_t max_attempts) {
    if (!(level > 0.0)) throw ValidationError("sample_level_set: level must be positive");
    LcdQuery q = query;
    q.theta_max = 2.0 * level;
    std::vector<Vector> out;
    Rng rng(seed);
    std::normal_distribution<double> normal;
    for (std::size_t attempt = 0; attempt < max_attempts && out.size() < count; ++attempt) {
        Vector x(static_cast<Eigen::Index>(n));
        for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = normal(rng);
        const double norm = x.norm();
        if (norm == 0.0) continue;
        x /= norm;
        const auto lcd = essential_lcd(x, q);
        if (lcd.found() && lcd.theta_star >= level && lcd.theta_star < 2.0 * level) out.push_back(std::move(x));
    }
    if (out.size() < count)
        throw ResourceError("sample_level_set: found only " + std::to_string(out.size()) + " of " + std::to_string(count) +
                            " vectors in the level set");
    return out;
}

void write_lcd_csv(std::ostream& out, std::span<const LcdResult> rows) {
    CsvRow().add("outcome").add("theta_star").add("achieved_distance").add("theta_max").add("certified").add("evaluations").write(out);
    for (const auto& r : rows) {
        CsvRow row;
        row.add(r.found() ? "found" : "exceeds");
        if (r.found()) {
            row.add(r.theta_star).add(r.achieved_distance);
        } else {
            row.add("").add("");
        }
        row.add(r.theta_max).add(r.certified ? "true" : "false").add(r.evaluations).write(out);
    }
}

void write_compressibility_csv(std::ostream& out, std::span<const CompressibilityReport> rows) {
    CsvRow().add("delta").add("rho").add("sparsity").add("distance_to_sparse").add("class").add("spread_size")
        .add("nu1").add("nu2").add("nu3").write(out);
    for (const auto& r : rows) {
        CsvRow()
            .add(r.delta)
            .add(r.rho)
            .add(static_cast<std::uint64_t>(r.sparsity))
            .add(r.distance_to_sparse)
            .add(r.klass == Compressibility::compressible ? "compressible" : "incompressible")
            .add(static_cast<std::uint64_t>(r.spread_set.size()))
            .add(r.nu.nu1)
            .add(r.nu.nu2)
            .add(r.nu.nu3)
            .write(out);
    }
}

}  // namespace rmt
