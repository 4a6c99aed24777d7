#include "rmtlab/geometry.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>
#include <string>

#include "rmtlab/csv.hpp"
#include "rmtlab/errors.hpp"
#include "rmtlab/parallel.hpp"
#include "rmtlab/spectra.hpp"

namespace rmt {

double SectionReport::kashin_ratio() const {
    return std::sqrt(static_cast<double>(rows)) * max_vertex_l2;
}

std::uint64_t binomial(std::size_t n, std::size_t k) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    unsigned __int128 r = 1;
    for (std::size_t i = 0; i < k; ++i) {
        r = r * (n - i) / (i + 1);
        if (r > std::numeric_limits<std::uint64_t>::max()) return std::numeric_limits<std::uint64_t>::max();
    }
    return static_cast<std::uint64_t>(r);
}

namespace {

// Lexicographic combination of rank r among the k-subsets of {0..n-1}.
std::vector<std::size_t> unrank_combination(std::uint64_t r, std::size_t n, std::size_t k) {
    std::vector<std::size_t> c;
    c.reserve(k);
    std::size_t next = 0;
    for (std::size_t i = 0; i < k; ++i) {
        for (;;) {
            const std::uint64_t count = binomial(n - next - 1, k - i - 1);
            if (r < count) {
                c.push_back(next++);
                break;
            }
            r -= count;
            ++next;
        }
    }
    return c;
}

bool next_combination(std::vector<std::size_t>& c, std::size_t n) {
    const std::size_t k = c.size();
    std::size_t i = k;
    while (i > 0 && c[i - 1] == n - k + i - 1) --i;
    if (i == 0) return false;
    ++c[i - 1];
    for (std::size_t j = i; j < k; ++j) c[j] = c[j - 1] + 1;
    return true;
}

Vector random_unit(std::size_t n, Rng& rng) {
    std::normal_distribution<double> normal;
    Vector x(static_cast<Eigen::Index>(n));
    double norm = 0.0;
    do {
        for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = normal(rng);
        norm = x.norm();
    } while (norm == 0.0);
    return x / norm;
}

// Kernel of the rows of `a` not in `subset` (ascending, size N - n + 1).
Vector complement_kernel(const RealMatrix& a, const std::vector<std::size_t>& subset) {
    const Eigen::Index n = a.cols();
    RealMatrix rows(n - 1, n);
    std::size_t s = 0;
    Eigen::Index out = 0;
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        if (s < subset.size() && subset[s] == static_cast<std::size_t>(i)) {
            ++s;
            continue;
        }
        rows.row(out++) = a.row(i);
    }
    return random_normal_vector(rows);
}

struct BlockResult {
    double best = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> best_subset;
    Vector best_y;
    double max_l2 = 0.0;
    std::uint64_t degenerate = 0;
    std::vector<SectionVertex> vertices;
};

}  // namespace

SectionReport min_l1_on_sphere(const RealMatrix& input, const SectionOptions& options) {
    const auto big_n = static_cast<std::size_t>(input.rows());
    const auto n = static_cast<std::size_t>(input.cols());
    if (big_n <= n || n == 0) throw DimensionError("min_l1_on_sphere: requires N > n >= 1");
    if (!input.allFinite()) throw ValidationError("min_l1_on_sphere: entries must be finite");
    const std::size_t m = big_n - n + 1;
    const std::uint64_t total = binomial(big_n, m);
    if (total > options.budget)
        throw ResourceError("min_l1_on_sphere: binomial(" + std::to_string(big_n) + ", " + std::to_string(m) + ") = " +
                            std::to_string(total) + " subsets exceeds the budget " + std::to_string(options.budget));

    RealMatrix a = input;
    if (options.jitter > 0.0) {
        Rng rng(options.jitter_seed);
        std::normal_distribution<double> normal;
        for (Eigen::Index i = 0; i < a.rows(); ++i)
            for (Eigen::Index j = 0; j < a.cols(); ++j) a(i, j) += options.jitter * normal(rng);
    }

    constexpr std::uint64_t kBlock = 2048;
    const std::uint64_t blocks = (total + kBlock - 1) / kBlock;
    std::vector<BlockResult> results(blocks);
    parallel_for(blocks, options.workers, [&](std::size_t b) {
        BlockResult& out = results[b];
        const std::uint64_t first = b * kBlock;
        const std::uint64_t last = std::min(total, first + kBlock);
        auto subset = unrank_combination(first, big_n, m);
        for (std::uint64_t r = first; r < last; ++r) {
            Vector y;
            try {
                y = complement_kernel(a, subset);
            } catch (const DegenerateInputError&) {
                ++out.degenerate;
                next_combination(subset, big_n);
                continue;
            }
            const Vector ay = a * y;
            const double l1 = ay.lpNorm<1>();
            if (l1 < out.best) {
                out.best = l1;
                out.best_subset = subset;
                out.best_y = y;
            }
            if (l1 > 0.0) {
                const Vector v = ay / l1;
                out.max_l2 = std::max(out.max_l2, v.norm());
                if (options.keep_vertices) out.vertices.push_back({subset, y, v, l1});
            }
            next_combination(subset, big_n);
        }
    });

    SectionReport report;
    report.rows = big_n;
    report.cols = n;
    report.m = m;
    report.subsets = total;
    report.min_l1 = std::numeric_limits<double>::infinity();
    for (auto& blk : results) {
        report.degenerate_count += blk.degenerate;
        report.max_vertex_l2 = std::max(report.max_vertex_l2, blk.max_l2);
        if (blk.best < report.min_l1) {
            report.min_l1 = blk.best;
            report.argmin_subset = std::move(blk.best_subset);
            report.minimizer = std::move(blk.best_y);
        }
        if (options.keep_vertices)
            std::move(blk.vertices.begin(), blk.vertices.end(), std::back_inserter(report.vertices));
    }
    if (!report.has_vertices())
        throw DegenerateInputError("min_l1_on_sphere: every (n-1)-row complement is rank-deficient");
    return report;
}

SectionReport octahedron_section(const RealMatrix& a, SectionOptions options) {
    options.keep_vertices = true;
    return min_l1_on_sphere(a, options);
}

DescentResult min_l1_descent(const RealMatrix& a, std::size_t starts, const SeedPath& seed) {
    const auto n = static_cast<std::size_t>(a.cols());
    if (n == 0 || a.rows() == 0) throw DimensionError("min_l1_descent: empty matrix");
    const double eta = 1e-13 * std::max(a.norm(), std::numeric_limits<double>::min());

    DescentResult best{std::numeric_limits<double>::infinity(), Vector()};
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
    for (std::size_t s = 0; s < starts; ++s) {
        Rng rng(seed.with_trial(s));
        Vector x = random_unit(n, rng);
        double value = (a * x).lpNorm<1>();
        for (int it = 0; it < 500; ++it) {
            const Vector r = a * x;
            const Eigen::VectorXd w = r.cwiseAbs().cwiseMax(eta).cwiseInverse();
            const Eigen::MatrixXd m = a.transpose() * w.asDiagonal() * a;
            eig.compute(m);
            Vector next = eig.eigenvectors().col(0);
            if (next.dot(x) < 0) next = -next;
            const double v = (a * next).lpNorm<1>();
            if (!(v < value * (1.0 - 1e-15))) break;
            x = next;
            value = v;
        }
        if (n > 1 && static_cast<std::size_t>(a.rows()) >= n - 1) {
            // Snap to the vertex spanned by the n - 1 rows closest to zero.
            const Vector r = (a * x).cwiseAbs();
            std::vector<Eigen::Index> order(static_cast<std::size_t>(r.size()));
            for (Eigen::Index i = 0; i < r.size(); ++i) order[static_cast<std::size_t>(i)] = i;
            std::stable_sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) { return r(i) < r(j); });
            RealMatrix rows(static_cast<Eigen::Index>(n - 1), static_cast<Eigen::Index>(n));
            for (std::size_t k = 0; k + 1 < n; ++k) rows.row(static_cast<Eigen::Index>(k)) = a.row(order[k]);
            try {
                const Vector y = random_normal_vector(rows);
                const double v = (a * y).lpNorm<1>();
                if (v < value) {
                    value = v;
                    x = y;
                }
            } catch (const DegenerateInputError&) {
            }
        }
        if (value < best.value) best = {value, x};
    }
    return best;
}

namespace {

double abs_pow(double t, double p) {
    t = std::abs(t);
    if (p == std::floor(p) && p <= 16.0) {
        double r = 1.0;
        for (int k = 0; k < static_cast<int>(p); ++k) r *= t;
        return r;
    }
    return std::pow(t, p);
}

double mean_abs_pow(const Vector& r, double p) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < r.size(); ++i) acc += abs_pow(r(i), p);
    return acc / static_cast<double>(r.size());
}

// Gradient of y -> mean |<y, X_j>|^p.
Vector mean_abs_pow_gradient(const RealMatrix& x, const Vector& r, double p) {
    Vector g(r.size());
    for (Eigen::Index i = 0; i < r.size(); ++i) g(i) = p * abs_pow(r(i), p - 1.0) * (r(i) < 0 ? -1.0 : 1.0);
    return x.transpose() * g / static_cast<double>(r.size());
}

// max of a convex p-homogeneous function on the sphere: y <- grad / |grad|
// never decreases it.
double ascend(const RealMatrix& x, double p, Vector y) {
    double value = mean_abs_pow(x * y, p);
    for (int it = 0; it < 200; ++it) {
        const Vector g = mean_abs_pow_gradient(x, x * y, p);
        const double gn = g.norm();
        if (gn == 0.0) break;
        const Vector next = g / gn;
        const double v = mean_abs_pow(x * next, p);
        if (!(v > value * (1.0 + 1e-13))) {
            value = std::max(value, v);
            break;
        }
        y = next;
        value = v;
    }
    return value;
}

// Projected gradient descent on the sphere with Armijo backtracking.
double descend(const RealMatrix& x, double p, Vector y) {
    double value = mean_abs_pow(x * y, p);
    double step = 0.5;
    for (int it = 0; it < 300; ++it) {
        const Vector g = mean_abs_pow_gradient(x, x * y, p);
        const Vector tangent = g - g.dot(y) * y;
        const double tn = tangent.norm();
        if (tn <= 1e-12 * (1.0 + value)) break;
        const Vector dir = -tangent / tn;
        step = std::min(1.0, 2.0 * step);
        bool moved = false;
        while (step > 1e-12) {
            const Vector trial = (y + step * dir).normalized();
            const double v = mean_abs_pow(x * trial, p);
            if (v <= value - 1e-4 * step * tn) {
                y = trial;
                value = v;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if (!moved) break;
    }
    return value;
}

// |Ax|_1 is unchanged when rows parallel up to sign are merged into one
// row carrying their summed length, and zero rows are dropped. Rows with
// no partner are kept bit-for-bit.
RealMatrix merge_parallel_rows(const RealMatrix& x) {
    std::vector<Vector> dirs;
    std::vector<double> mass;
    std::vector<Eigen::Index> first;
    std::vector<std::size_t> members;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double len = x.row(i).norm();
        if (len == 0.0) continue;
        Vector u = x.row(i).transpose() / len;
        Eigen::Index lead = 0;
        while (std::abs(u(lead)) <= 1e-12) ++lead;
        if (u(lead) < 0) u = -u;
        std::size_t k = 0;
        while (k < dirs.size() && (dirs[k] - u).cwiseAbs().maxCoeff() > 1e-12) ++k;
        if (k == dirs.size()) {
            dirs.push_back(u);
            mass.push_back(0.0);
            first.push_back(i);
            members.push_back(0);
        }
        mass[k] += len;
        ++members[k];
    }
    RealMatrix out(static_cast<Eigen::Index>(dirs.size()), x.cols());
    for (std::size_t k = 0; k < dirs.size(); ++k) {
        const auto r = static_cast<Eigen::Index>(k);
        if (members[k] == 1) {
            out.row(r) = x.row(first[k]);
        } else {
            out.row(r) = mass[k] * dirs[k].transpose();
        }
    }
    return out;
}

}  // namespace

KhinchinEstimate khinchin_constants(const RealMatrix& x, double p, const SeedPath& seed, std::size_t starts,
                                    std::uint64_t budget) {
    if (!(p >= 1.0) || !std::isfinite(p)) throw ValidationError("khinchin_constants: p must be >= 1");
    if (x.rows() == 0 || x.cols() == 0) throw DimensionError("khinchin_constants: empty sample matrix");
    if (starts == 0) throw ValidationError("khinchin_constants: starts must be positive");
    const double big_n = static_cast<double>(x.rows());
    const auto n = static_cast<std::size_t>(x.cols());
    KhinchinEstimate est;
    est.p = p;

    if (p == 2.0) {
        const auto s = singular_values(x);
        est.alpha = x.rows() < x.cols() ? 0.0 : s.smallest() / std::sqrt(big_n);
        est.beta = s.largest() / std::sqrt(big_n);
        est.alpha_exact = est.beta_exact = true;
        return est;
    }

    if (p == 1.0) {
        SectionOptions opts;
        opts.budget = budget;
        RealMatrix merged = merge_parallel_rows(x);
        if (merged.rows() < x.cols()) {
            est.alpha = 0.0;  // some unit y is orthogonal to every sample
        } else {
            if (merged.rows() == x.cols()) {
                // One zero row makes N > n; subsets that keep it in the complement are skipped as degenerate.
                merged.conservativeResize(merged.rows() + 1, Eigen::NoChange);
                merged.row(merged.rows() - 1).setZero();
            }
            est.alpha = min_l1_on_sphere(merged, opts).min_l1 / big_n;
        }
        est.alpha_exact = true;
        double best = 0.0;
        for (std::size_t s = 0; s < starts; ++s) {
            Rng rng(seed.with_trial(s));
            Vector y = random_unit(n, rng);
            double value = (x * y).lpNorm<1>();
            for (int it = 0; it < 100; ++it) {
                const Vector r = x * y;
                const Vector g = x.transpose() * r.unaryExpr([](double t) { return t < 0 ? -1.0 : 1.0; });
                const double gn = g.norm();
                if (gn == 0.0) break;
                const Vector next = g / gn;
                const double v = (x * next).lpNorm<1>();
                if (!(v > value * (1.0 + 1e-14))) break;
                y = next;
                value = v;
            }
            best = std::max(best, value);
        }
        est.beta = best / big_n;
        return est;
    }

    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (std::size_t s = 0; s < starts; ++s) {
        Rng rng(seed.with_trial(s));
        const Vector y = random_unit(n, rng);
        lo = std::min(lo, descend(x, p, y));
        hi = std::max(hi, ascend(x, p, y));
    }
    est.alpha = std::pow(lo, 1.0 / p);
    est.beta = std::pow(hi, 1.0 / p);
    return est;
}

SandwichReport sandwich_audit(const RealMatrix& a, double eps, double delta, double c_prime, std::size_t samples,
                              const SeedPath& seed) {
    const auto big_n = static_cast<std::size_t>(a.rows());
    const auto n = static_cast<std::size_t>(a.cols());
    if (!(delta > 0.0)) throw ValidationError("sandwich_audit: delta must be positive");
    const auto expected = static_cast<std::size_t>(std::floor((1.0 + delta) * static_cast<double>(n) + 1e-9));
    if (big_n != expected)
        throw DimensionError("sandwich_audit: N = " + std::to_string(big_n) + " but floor((1+delta)n) = " + std::to_string(expected));

    const double root_n = std::sqrt(static_cast<double>(big_n));
    const double lower = eps * delta * static_cast<double>(n);
    const double upper = c_prime * static_cast<double>(n);
    SandwichReport report;
    report.min_l1_seen = std::numeric_limits<double>::infinity();
    auto check = [&](const Vector& x) {
        const Vector ax = a * x;
        const double l1 = ax.lpNorm<1>();
        const double l2 = ax.norm();
        const double xn = x.norm();
        if (l1 > root_n * l2 * (1.0 + 1e-12)) report.middle_holds = false;
        if (l1 < lower * xn) report.lower_holds = false;
        if (root_n * l2 > upper * xn) report.upper_holds = false;
        report.min_l1_seen = std::min(report.min_l1_seen, l1 / xn);
        report.max_l2_seen = std::max(report.max_l2_seen, l2 / xn);
    };

    Rng rng(seed);
    for (std::size_t s = 0; s < samples; ++s) check(random_unit(n, rng));
    report.samples = samples;

    if (big_n > n && binomial(big_n, big_n - n + 1) <= kSectionBudget) {
        try {
            check(min_l1_on_sphere(a).minimizer);
            report.exact_minimizer_checked = true;
        } catch (const DegenerateInputError&) {
        }
    }
    return report;
}

void write_section_csv(std::ostream& out, const SectionReport& report) {
    CsvRow header;
    header.add("subset").add("l1");
    for (std::size_t i = 0; i < report.rows; ++i) header.add("v" + std::to_string(i));
    for (std::size_t i = 0; i < report.cols; ++i) header.add("y" + std::to_string(i));
    header.write(out);
    for (const auto& vert : report.vertices) {
        std::string subset;
        for (std::size_t k = 0; k < vert.subset.size(); ++k) {
            if (k) subset += ';';
            subset += std::to_string(vert.subset[k]);
        }
        CsvRow row;
        row.add(subset).add(vert.l1);
        for (Eigen::Index i = 0; i < vert.v.size(); ++i) row.add(vert.v(i));
        for (Eigen::Index i = 0; i < vert.y.size(); ++i) row.add(vert.y(i));
        row.write(out);
    }
}

}  // namespace rmt
