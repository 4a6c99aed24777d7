#include "rmtlab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <set>

#include "rmtlab/census.hpp"
#include "rmtlab/concentration.hpp"
#include "rmtlab/csv.hpp"
#include "rmtlab/ensembles.hpp"
#include "rmtlab/errors.hpp"
#include "rmtlab/geometry.hpp"
#include "rmtlab/nets.hpp"
#include "rmtlab/parallel.hpp"
#include "rmtlab/perturbation.hpp"
#include "rmtlab/spectra.hpp"
#include "rmtlab/stats.hpp"
#include "rmtlab/structure.hpp"

namespace rmt {

namespace {

struct Named {
    Experiment e;
    const char* name;
};

constexpr Named kNames[] = {
    {Experiment::tail_square, "tail_square"}, {Experiment::tail_rectangular, "tail_rectangular"},
    {Experiment::sign_census, "sign_census"}, {Experiment::edelman, "edelman"},
    {Experiment::levy, "levy"},               {Experiment::lcd, "lcd"},
    {Experiment::khinchin, "khinchin"},       {Experiment::kashin, "kashin"},
    {Experiment::perturb, "perturb"},         {Experiment::net_audit, "net_audit"},
};

const std::set<std::string> kGlobalKeys = {"experiment", "seed", "trials", "workers", "output"};

}  // namespace

std::string to_string(Experiment e) {
    for (const auto& n : kNames)
        if (n.e == e) return n.name;
    return "unknown";
}

Experiment parse_experiment(const std::string& name) {
    for (const auto& n : kNames)
        if (name == n.name) return n.e;
    std::string known;
    for (const auto& n : kNames) known += std::string(known.empty() ? "" : ", ") + n.name;
    throw ValidationError("unknown experiment '" + name + "' (expected one of " + known + ")");
}

const std::vector<Experiment>& all_experiments() {
    static const std::vector<Experiment> all = [] {
        std::vector<Experiment> v;
        for (const auto& n : kNames) v.push_back(n.e);
        return v;
    }();
    return all;
}

const std::vector<std::string>& experiment_keys(Experiment e) {
    static const std::vector<std::string> ensemble = {"ensemble", "atoms", "heavy_mass"};
    auto with_ensemble = [](std::vector<std::string> v) {
        v.insert(v.end(), ensemble.begin(), ensemble.end());
        return v;
    };
    static const std::vector<std::string> tail_square = with_ensemble({"n", "eps_grid"});
    static const std::vector<std::string> tail_rectangular = with_ensemble({"n", "N", "c1_grid"});
    static const std::vector<std::string> sign_census = {"n"};
    static const std::vector<std::string> edelman = {"n", "eps_grid"};
    static const std::vector<std::string> levy = {"weights", "n", "eps_grid", "methods", "law", "confidence", "detail_path"};
    static const std::vector<std::string> lcd = with_ensemble(
        {"mode", "n", "weights", "gamma", "alpha", "theta_max", "slack", "delta", "rho", "detail_path"});
    static const std::vector<std::string> khinchin = with_ensemble({"n", "N", "p_grid", "starts"});
    static const std::vector<std::string> kashin = {"n", "N", "delta", "eps", "c_prime", "samples", "detail_path"};
    static const std::vector<std::string> perturb = {"n", "group", "d", "d_scale", "thresholds", "detail_path"};
    static const std::vector<std::string> net_audit = {"n", "eps", "samples", "rejection_streak", "detail_path"};
    switch (e) {
    case Experiment::tail_square: return tail_square;
    case Experiment::tail_rectangular: return tail_rectangular;
    case Experiment::sign_census: return sign_census;
    case Experiment::edelman: return edelman;
    case Experiment::levy: return levy;
    case Experiment::lcd: return lcd;
    case Experiment::khinchin: return khinchin;
    case Experiment::kashin: return kashin;
    case Experiment::perturb: return perturb;
    case Experiment::net_audit: return net_audit;
    }
    return sign_census;
}

namespace {

void check_keys(const Config& cfg, Experiment e) {
    const auto& allowed = experiment_keys(e);
    for (const auto& [key, value] : cfg.entries()) {
        if (kGlobalKeys.count(key)) continue;
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw ValidationError("unknown key '" + key + "' for experiment '" + to_string(e) + "'");
    }
}

std::size_t positive_size(const Config& cfg, const std::string& key) {
    const auto v = cfg.integer(key);
    if (v == 0) throw ValidationError("key '" + key + "' must be positive");
    return static_cast<std::size_t>(v);
}

std::uint64_t trials_or(const Config& cfg, std::uint64_t fallback) {
    const auto t = cfg.integer_or("trials", fallback);
    if (t == 0) throw ValidationError("key 'trials' must be positive");
    return t;
}

std::vector<double> sorted_positive_grid(const Config& cfg, const std::string& key, std::vector<double> fallback) {
    auto grid = cfg.list_or(key, std::move(fallback));
    if (grid.empty()) throw ValidationError("key '" + key + "' must not be empty");
    for (double g : grid)
        if (!(g > 0.0) || !std::isfinite(g)) throw ValidationError("key '" + key + "' entries must be positive and finite");
    std::sort(grid.begin(), grid.end());
    return grid;
}

std::vector<Atom> parse_atoms(const std::string& text) {
    std::vector<Atom> atoms;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        const std::string item = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        const auto colon = item.find(':');
        if (colon == std::string::npos) throw ValidationError("key 'atoms': expected value:probability pairs");
        atoms.push_back({parse_number(item.substr(0, colon), "key 'atoms'"), parse_number(item.substr(colon + 1), "key 'atoms'")});
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return atoms;
}

EnsembleSpec ensemble_from(const Config& cfg, std::size_t rows, std::size_t cols, const std::string& fallback) {
    EnsembleSpec spec;
    spec.kind = parse_scalar_kind(cfg.text_or("ensemble", fallback));
    spec.rows = rows;
    spec.cols = cols;
    if (cfg.has("atoms")) {
        if (spec.kind != ScalarKind::discrete && spec.kind != ScalarKind::heavy_tail_4th_moment)
            throw ValidationError("key 'atoms' requires ensemble = discrete or heavy_tail_4th_moment");
        spec.atoms = parse_atoms(cfg.text("atoms"));
    }
    if (cfg.has("heavy_mass")) {
        if (spec.kind != ScalarKind::heavy_tail_4th_moment || cfg.has("atoms"))
            throw ValidationError("key 'heavy_mass' requires ensemble = heavy_tail_4th_moment without atoms");
        spec.atoms = heavy_tail_atoms(cfg.number("heavy_mass"));
    }
    if (spec.kind == ScalarKind::discrete && spec.atoms.empty())
        throw ValidationError("ensemble = discrete requires key 'atoms'");
    spec.validate();
    return spec;
}

// a1 = (1,1,0,...)/sqrt 2, a2 = flat, a3 = ((1 + k/n)/sqrt n)_k, e1, random
// (Gaussian direction), or an explicit comma list.
Vector named_weights(const std::string& name, const Config& cfg, const SeedPath& seed) {
    if (name == "a1" || name == "a2" || name == "a3" || name == "e1" || name == "random") {
        const auto n = positive_size(cfg, "n");
        const auto dim = static_cast<Eigen::Index>(n);
        const double nd = static_cast<double>(n);
        Vector a = Vector::Zero(dim);
        if (name == "a1") {
            if (n < 2) throw ValidationError("weights = a1 needs n >= 2");
            a(0) = a(1) = 1.0 / std::sqrt(2.0);
        } else if (name == "a2") {
            a.setConstant(1.0 / std::sqrt(nd));
        } else if (name == "a3") {
            for (Eigen::Index k = 0; k < dim; ++k) a(k) = (1.0 + static_cast<double>(k + 1) / nd) / std::sqrt(nd);
        } else if (name == "e1") {
            a(0) = 1.0;
        } else {
            Rng rng(seed.child("weights"));
            std::normal_distribution<double> normal;
            do {
                for (Eigen::Index k = 0; k < dim; ++k) a(k) = normal(rng);
            } while (a.norm() == 0.0);
            a.normalize();
        }
        return a;
    }
    if (cfg.has("n")) throw ValidationError("key 'n' conflicts with an explicit weight list");
    std::vector<double> values;
    std::size_t start = 0;
    while (start <= name.size()) {
        const auto comma = name.find(',', start);
        values.push_back(parse_number(name.substr(start, comma == std::string::npos ? std::string::npos : comma - start), "key 'weights'"));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return Eigen::Map<Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot open '" + path + "' for writing");
    return out;
}

struct Context {
    const Config& cfg;
    Experiment experiment;
    std::string name;
    std::uint64_t seed;
    SeedPath path;
    unsigned workers;

    ResultRow row(std::uint64_t n, std::uint64_t big_n, std::string param_name, std::string param_value) const {
        ResultRow r;
        r.experiment = name;
        r.n = n;
        r.big_n = big_n;
        r.param_name = std::move(param_name);
        r.param_value = std::move(param_value);
        r.seed = seed;
        return r;
    }
};

void fill_binomial(ResultRow& r, std::uint64_t hits, std::uint64_t trials) {
    r.trials = trials;
    r.estimate = static_cast<double>(hits) / static_cast<double>(trials);
    const auto ci = wilson_interval(hits, trials);
    r.ci_low = ci.low;
    r.ci_high = ci.high;
}

void fill_point(ResultRow& r, double value, std::uint64_t trials) {
    r.estimate = r.ci_low = r.ci_high = value;
    r.trials = trials;
}

// Estimate is the mean over seeds; ci columns carry the min and max.
void fill_range(ResultRow& r, const std::vector<double>& values) {
    r.trials = values.size();
    r.estimate = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    r.ci_low = *std::min_element(values.begin(), values.end());
    r.ci_high = *std::max_element(values.begin(), values.end());
    r.estimate = std::clamp(r.estimate, r.ci_low, r.ci_high);
}

std::vector<double> smallest_singular_values(const EnsembleSpec& spec, std::uint64_t trials, const SeedPath& seed,
                                             unsigned workers) {
    std::vector<double> out(trials);
    parallel_for(trials, workers, [&](std::size_t t) { out[t] = smallest_singular_value(sample_matrix(spec, seed.with_trial(t))); });
    std::sort(out.begin(), out.end());
    return out;
}

std::uint64_t count_at_most(const std::vector<double>& sorted, double t) {
    return static_cast<std::uint64_t>(std::upper_bound(sorted.begin(), sorted.end(), t) - sorted.begin());
}

std::vector<ResultRow> run_tail_square(const Context& ctx) {
    const auto n = positive_size(ctx.cfg, "n");
    const auto grid = sorted_positive_grid(ctx.cfg, "eps_grid", {0.05, 0.1, 0.2});
    const auto trials = trials_or(ctx.cfg, 1000);
    const auto spec = ensemble_from(ctx.cfg, n, n, "gaussian");
    const auto s = smallest_singular_values(spec, trials, ctx.path, ctx.workers);
    std::vector<ResultRow> rows;
    for (double eps : grid) {
        auto r = ctx.row(n, n, "eps", format_double(eps));
        r.threshold = eps / std::sqrt(static_cast<double>(n));
        fill_binomial(r, count_at_most(s, r.threshold), trials);
        rows.push_back(r);
    }
    return rows;
}

std::vector<ResultRow> run_tail_rectangular(const Context& ctx) {
    const auto n = positive_size(ctx.cfg, "n");
    const auto big_n = positive_size(ctx.cfg, "N");
    if (!(n < big_n)) throw ValidationError("tail_rectangular requires n < N");
    const auto grid = sorted_positive_grid(ctx.cfg, "c1_grid", {0.05});
    const auto trials = trials_or(ctx.cfg, 1000);
    const auto spec = ensemble_from(ctx.cfg, big_n, n, "gaussian");
    const auto s = smallest_singular_values(spec, trials, ctx.path, ctx.workers);
    std::vector<ResultRow> rows;
    for (double c1 : grid) {
        auto r = ctx.row(n, big_n, "c1", format_double(c1));
        r.threshold = c1 * std::sqrt(static_cast<double>(big_n));
        fill_binomial(r, count_at_most(s, r.threshold), trials);
        rows.push_back(r);
    }
    return rows;
}

std::vector<ResultRow> run_sign_census(const Context& ctx) {
    const auto n = positive_size(ctx.cfg, "n");
    std::vector<ResultRow> rows;
    const auto census = sign_census(n, ctx.workers);
    auto exact = ctx.row(n, n, "method", "exact");
    fill_point(exact, census.probability(), census.total);
    rows.push_back(exact);
    if (ctx.cfg.has("trials")) {
        const auto mc = sign_census_monte_carlo(n, trials_or(ctx.cfg, 1), ctx.path, ctx.workers);
        auto r = ctx.row(n, n, "method", "monte_carlo");
        fill_binomial(r, mc.singular, mc.trials);
        rows.push_back(r);
    }
    return rows;
}

std::vector<ResultRow> run_edelman(const Context& ctx) {
    const auto n = static_cast<std::size_t>(ctx.cfg.integer_or("n", 100));
    if (n == 0) throw ValidationError("key 'n' must be positive");
    const auto grid = sorted_positive_grid(ctx.cfg, "eps_grid", {0.1});
    const auto trials = trials_or(ctx.cfg, 2000);
    const auto s = smallest_singular_values(EnsembleSpec::gaussian(n, n), trials, ctx.path, ctx.workers);
    std::vector<ResultRow> rows;
    for (double eps : grid) {
        auto r = ctx.row(n, n, "eps", format_double(eps));
        r.threshold = eps / std::sqrt(static_cast<double>(n));
        fill_binomial(r, count_at_most(s, r.threshold), trials);
        rows.push_back(r);
        auto limit = ctx.row(n, n, "edelman_limit", format_double(eps));
        limit.threshold = r.threshold;
        fill_point(limit, 1.0 - std::exp(-eps * eps / 2.0 - eps), 0);
        rows.push_back(limit);
    }
    return rows;
}

std::vector<ResultRow> run_levy(const Context& ctx) {
    const auto a = named_weights(ctx.cfg.text("weights"), ctx.cfg, ctx.path);
    auto grid = ctx.cfg.list_or("eps_grid", {0.0, 0.1, 0.5, 1.0});
    for (double e : grid)
        if (std::isnan(e) || e < 0.0) throw ValidationError("key 'eps_grid' entries must be nonnegative");
    std::sort(grid.begin(), grid.end());
    const auto methods = ctx.cfg.words_or("methods", {"exact"});
    const double confidence = ctx.cfg.number_or("confidence", 0.95);
    const auto trials = trials_or(ctx.cfg, 10000);
    EnsembleSpec law;
    law.kind = parse_scalar_kind(ctx.cfg.text_or("law", "rademacher"));
    if (law.kind == ScalarKind::discrete) throw ValidationError("key 'law': discrete laws are not supported here");

    std::vector<ConcentrationResult> detail;
    std::vector<ResultRow> rows;
    const auto n = static_cast<std::uint64_t>(a.size());
    for (const auto& method : methods) {
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double eps = grid[i];
            ConcentrationResult res;
            if (method == "exact") {
                res = levy_exact_rademacher(a, eps);
            } else if (method == "monte_carlo") {
                res = levy_monte_carlo(law, a, eps, trials, ctx.path, confidence, ctx.workers);
            } else if (method == "esseen") {
                res = esseen_bound(a, eps);
            } else {
                throw ValidationError("key 'methods': unknown method '" + method + "' (expected exact, monte_carlo, esseen)");
            }
            auto r = ctx.row(n, 1, "method", method);
            r.threshold = eps;
            r.estimate = res.value;
            if (res.method == ConcentrationMethod::monte_carlo) {
                r.ci_low = res.ci_low;
                r.ci_high = res.ci_high;
                r.trials = res.trials;
            } else {
                r.ci_low = r.ci_high = res.value;
                r.trials = res.method == ConcentrationMethod::exact ? (std::uint64_t{1} << a.size()) : 0;
            }
            rows.push_back(r);
            detail.push_back(res);
        }
    }
    if (ctx.cfg.has("detail_path")) {
        auto out = open_output(ctx.cfg.text("detail_path"));
        write_concentration_csv(out, detail);
    }
    return rows;
}

std::vector<ResultRow> run_lcd(const Context& ctx) {
    const std::string mode = ctx.cfg.text_or("mode", "kernel");
    LcdQuery q;
    q.gamma = ctx.cfg.number_or("gamma", 0.1);
    q.alpha = ctx.cfg.number_or("alpha", 1.0);
    if (ctx.cfg.has("slack")) q.slack = ctx.cfg.number("slack");

    if (mode == "vector") {
        Vector a = named_weights(ctx.cfg.text("weights"), ctx.cfg, ctx.path);
        if (a.norm() == 0.0) throw ValidationError("key 'weights': zero vector");
        a.normalize();
        q.theta_max = ctx.cfg.number_or("theta_max", 10.0);
        for (const char* k : {"ensemble", "atoms", "heavy_mass", "delta", "rho", "trials"})
            if (ctx.cfg.has(k)) throw ValidationError(std::string("key '") + k + "' is not used with mode = vector");
        const auto res = essential_lcd(a, q);
        auto r = ctx.row(static_cast<std::uint64_t>(a.size()), 1, "outcome", res.found() ? "found" : "exceeds");
        r.threshold = q.theta_max;
        fill_point(r, res.value(), 1);
        if (ctx.cfg.has("detail_path")) {
            auto out = open_output(ctx.cfg.text("detail_path"));
            write_lcd_csv(out, std::span<const LcdResult>(&res, 1));
        }
        return {r};
    }
    if (mode != "kernel") throw ValidationError("key 'mode' must be kernel or vector");
    if (ctx.cfg.has("weights")) throw ValidationError("key 'weights' is only used with mode = vector");
    if (ctx.cfg.has("detail_path")) throw ValidationError("key 'detail_path' requires mode = vector");

    const auto n = positive_size(ctx.cfg, "n");
    q.theta_max = ctx.cfg.number_or("theta_max", default_kernel_theta_max(n));
    const auto trials = trials_or(ctx.cfg, 100);
    const auto law = ensemble_from(ctx.cfg, 1, 1, "rademacher");
    const auto summary = kernel_lcd_experiment(law, n, trials, q, ctx.path, ctx.workers);
    const std::uint64_t valid = summary.trials - summary.degenerate;

    std::vector<ResultRow> rows;
    auto degenerate = ctx.row(n, n - 1, "degenerate", "rank_test");
    fill_binomial(degenerate, summary.degenerate, summary.trials);
    rows.push_back(degenerate);
    if (valid > 0) {
        auto exceeds = ctx.row(n, n - 1, "exceeds_fraction", format_double(q.gamma));
        exceeds.threshold = q.theta_max;
        fill_binomial(exceeds, summary.exceeds, valid);
        rows.push_back(exceeds);
    }
    if (!summary.found_values.empty()) {
        for (double qq : {0.1, 0.5, 0.9}) {
            auto r = ctx.row(n, n - 1, "quantile", format_double(qq));
            r.threshold = q.theta_max;
            fill_point(r, summary.quantile(qq), summary.found_values.size());
            rows.push_back(r);
        }
    }
    const double delta = ctx.cfg.number_or("delta", 0.25);
    const double rho = ctx.cfg.number_or("rho", 0.5);
    const auto nu = SpreadConstants::from(delta, rho);
    if (q.gamma < nu.nu2 * std::sqrt(nu.nu1 / 2.0) && valid > 0) {
        const double floor = incompressible_lcd_floor(delta, rho, q.gamma) * std::sqrt(static_cast<double>(n));
        auto r = ctx.row(n, n - 1, "below_floor", format_double(floor));
        r.threshold = floor;
        fill_binomial(r, summary.count_below(floor), valid);
        rows.push_back(r);
    }
    return rows;
}

std::vector<ResultRow> run_khinchin(const Context& ctx) {
    const auto n = positive_size(ctx.cfg, "n");
    const auto big_n = positive_size(ctx.cfg, "N");
    const auto ps = ctx.cfg.list_or("p_grid", {1.0, 2.0});
    const auto starts = static_cast<std::size_t>(ctx.cfg.integer_or("starts", 1000));
    const auto trials = trials_or(ctx.cfg, 1);
    const auto spec = ensemble_from(ctx.cfg, big_n, n, "rademacher");
    std::vector<ResultRow> rows;
    for (double p : ps) {
        std::vector<KhinchinEstimate> est(trials);
        parallel_for(trials, ctx.workers, [&](std::size_t t) {
            const auto x = sample_matrix(spec, ctx.path.child("matrix").with_trial(t));
            est[t] = khinchin_constants(x, p, ctx.path.child("starts").with_trial(t), starts);
        });
        std::vector<double> alphas, betas;
        for (const auto& e : est) {
            alphas.push_back(e.alpha);
            betas.push_back(e.beta);
        }
        auto ra = ctx.row(n, big_n, est[0].alpha_exact ? "alpha_exact" : "alpha_approx", format_double(p));
        ra.threshold = p;
        fill_range(ra, alphas);
        rows.push_back(ra);
        auto rb = ctx.row(n, big_n, est[0].beta_exact ? "beta_exact" : "beta_approx", format_double(p));
        rb.threshold = p;
        fill_range(rb, betas);
        rows.push_back(rb);
    }
    return rows;
}

std::vector<ResultRow> run_kashin(const Context& ctx) {
    const auto n = positive_size(ctx.cfg, "n");
    double delta = ctx.cfg.number_or("delta", 0.5);
    std::size_t big_n = 0;
    if (ctx.cfg.has("N")) {
        big_n = positive_size(ctx.cfg, "N");
        if (ctx.cfg.has("delta")) throw ValidationError("keys 'N' and 'delta' are mutually exclusive");
        delta = static_cast<double>(big_n - std::min(big_n, n)) / static_cast<double>(n);
    } else {
        big_n = static_cast<std::size_t>(std::floor((1.0 + delta) * static_cast<double>(n) + 1e-9));
    }
    if (!(big_n > n)) throw ValidationError("kashin requires N > n");
    const double eps = ctx.cfg.number_or("eps", 0.05);
    const double c_prime = ctx.cfg.number_or("c_prime", 10.0);
    const auto samples = static_cast<std::size_t>(ctx.cfg.integer_or("samples", 10000));
    const auto trials = trials_or(ctx.cfg, 10);

    std::vector<double> ratio(trials), diameter(trials), min_l1(trials);
    std::vector<unsigned char> pass(trials);
    SectionReport first;
    parallel_for(trials, ctx.workers, [&](std::size_t t) {
        const auto a = sample_matrix(EnsembleSpec::gaussian(big_n, n), ctx.path.child("matrix").with_trial(t));
        auto section = octahedron_section(a);
        ratio[t] = section.kashin_ratio();
        diameter[t] = section.diameter();
        min_l1[t] = section.min_l1;
        pass[t] = sandwich_audit(a, eps, delta, c_prime, samples, ctx.path.child("sandwich").with_trial(t)).passed();
        if (t == 0) first = std::move(section);
    });

    std::vector<ResultRow> rows;
    for (auto [name, values] : {std::pair{"kashin_ratio", &ratio}, {"diameter", &diameter}, {"min_l1", &min_l1}}) {
        auto r = ctx.row(n, big_n, name, format_double(delta));
        fill_range(r, *values);
        rows.push_back(r);
    }
    auto r = ctx.row(n, big_n, "sandwich_pass", format_double(delta));
    r.threshold = eps;
    fill_binomial(r, static_cast<std::uint64_t>(std::count(pass.begin(), pass.end(), 1)), trials);
    rows.push_back(r);
    if (ctx.cfg.has("detail_path")) {
        auto out = open_output(ctx.cfg.text("detail_path"));
        write_section_csv(out, first);
    }
    return rows;
}

std::vector<ResultRow> run_perturb(const Context& ctx) {
    const auto n = positive_size(ctx.cfg, "n");
    const auto group = parse_group(ctx.cfg.text_or("group", "unitary"));
    const std::string d_name = ctx.cfg.text_or("d", "identity");
    const double scale = ctx.cfg.number_or("d_scale", 1.0);
    const auto thresholds = ctx.cfg.list_or("thresholds", {0.001, 0.003, 0.01, 0.03, 0.1});
    const auto trials = trials_or(ctx.cfg, 1000);
    const auto dim = static_cast<Eigen::Index>(n);
    RealMatrix d;
    if (d_name == "identity") {
        d = scale * RealMatrix::Identity(dim, dim);
    } else if (d_name == "minus_identity") {
        d = -scale * RealMatrix::Identity(dim, dim);
    } else if (d_name == "zero") {
        d = RealMatrix::Zero(dim, dim);
    } else if (d_name == "gaussian") {
        d = scale * sample_matrix(EnsembleSpec::gaussian(n, n), ctx.path.child("D"));
    } else {
        throw ValidationError("key 'd' must be identity, minus_identity, zero or gaussian");
    }
    const auto curve = perturbation_tail(d, group, thresholds, trials, ctx.path, ctx.workers);
    std::vector<ResultRow> rows;
    for (std::size_t i = 0; i < curve.thresholds.size(); ++i) {
        auto r = ctx.row(n, n, "group", to_string(group));
        r.threshold = curve.thresholds[i];
        r.estimate = curve.probs[i];
        r.ci_low = curve.ci[i].low;
        r.ci_high = curve.ci[i].high;
        r.trials = trials;
        rows.push_back(r);
    }
    if (ctx.cfg.has("detail_path")) {
        auto out = open_output(ctx.cfg.text("detail_path"));
        write_tail_csv(out, curve);
    }
    return rows;
}

std::vector<ResultRow> run_net_audit(const Context& ctx) {
    const auto n = positive_size(ctx.cfg, "n");
    const double eps = ctx.cfg.number("eps");
    const auto samples = static_cast<std::size_t>(ctx.cfg.integer_or("samples", 10000));
    const auto trials = trials_or(ctx.cfg, 10);
    SphereNetOptions opts;
    if (ctx.cfg.has("rejection_streak")) opts.rejection_streak = static_cast<std::size_t>(ctx.cfg.integer("rejection_streak"));

    std::vector<SphereNet> nets(trials);
    std::vector<CoveringAudit> audits(trials);
    parallel_for(trials, ctx.workers, [&](std::size_t t) {
        nets[t] = build_sphere_net(n, eps, ctx.path.child("net").with_trial(t), opts);
        audits[t] = audit_covering(nets[t], samples, ctx.path.child("audit").with_trial(t));
    });

    std::vector<double> sizes, separation, worst;
    std::uint64_t uncovered = 0;
    for (std::size_t t = 0; t < trials; ++t) {
        sizes.push_back(static_cast<double>(nets[t].size()));
        separation.push_back(nets[t].size() > 1 ? min_pairwise_distance(nets[t]) : INFINITY);
        worst.push_back(audits[t].worst_distance);
        uncovered += audits[t].uncovered;
    }
    std::vector<ResultRow> rows;
    auto size_row = ctx.row(n, n, "net_size", format_double(eps));
    fill_range(size_row, sizes);
    rows.push_back(size_row);
    if (eps < 1.0) {
        auto cap = ctx.row(n, n, "volumetric_cap", format_double(eps));
        fill_point(cap, static_cast<double>(volumetric_cap(n, eps)), 0);
        rows.push_back(cap);
    }
    auto sep = ctx.row(n, n, "min_separation", format_double(eps));
    sep.threshold = eps;
    fill_range(sep, separation);
    rows.push_back(sep);
    auto worst_row = ctx.row(n, n, "worst_distance", format_double(eps));
    worst_row.threshold = eps;
    fill_range(worst_row, worst);
    rows.push_back(worst_row);
    auto unc = ctx.row(n, n, "uncovered_fraction", format_double(eps));
    unc.threshold = eps;
    fill_binomial(unc, uncovered, static_cast<std::uint64_t>(samples) * trials);
    rows.push_back(unc);
    if (ctx.cfg.has("detail_path")) {
        auto out = open_output(ctx.cfg.text("detail_path"));
        write_net_csv(out, nets.front());
    }
    return rows;
}

}  // namespace

std::vector<ResultRow> run_experiment(const Config& config, const RunOptions& options) {
    const auto e = parse_experiment(config.text("experiment"));
    check_keys(config, e);
    const std::uint64_t seed = config.integer_or("seed", 1);
    const auto workers = static_cast<unsigned>(config.integer_or("workers", options.workers));
    Context ctx{config, e, to_string(e), seed, SeedPath{seed, to_string(e), 0}, workers};
    switch (e) {
    case Experiment::tail_square: return run_tail_square(ctx);
    case Experiment::tail_rectangular: return run_tail_rectangular(ctx);
    case Experiment::sign_census: return run_sign_census(ctx);
    case Experiment::edelman: return run_edelman(ctx);
    case Experiment::levy: return run_levy(ctx);
    case Experiment::lcd: return run_lcd(ctx);
    case Experiment::khinchin: return run_khinchin(ctx);
    case Experiment::kashin: return run_kashin(ctx);
    case Experiment::perturb: return run_perturb(ctx);
    case Experiment::net_audit: return run_net_audit(ctx);
    }
    throw ValidationError("unhandled experiment");
}

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
    CsvRow()
        .add("experiment").add("n").add("N").add("param_name").add("param_value").add("threshold")
        .add("estimate").add("ci_low").add("ci_high").add("trials").add("seed")
        .write(out);
    for (const auto& r : rows) {
        CsvRow()
            .add(r.experiment)
            .add(r.n)
            .add(r.big_n)
            .add(r.param_name)
            .add(r.param_value)
            .add(r.threshold)
            .add(r.estimate)
            .add(r.ci_low)
            .add(r.ci_high)
            .add(r.trials)
            .add(r.seed)
            .write(out);
    }
}

std::string metadata_line(const Config& config) {
    // Where the output goes and how many threads produce it do not change it.
    Config hashed = config;
    hashed.erase("output");
    hashed.erase("workers");
    char hash[17];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(hashed.hash()));
    return "version=" + std::string(kVersion) + ", config_hash=" + hash +
           ", master_seed=" + std::to_string(config.integer_or("seed", 1));
}

std::vector<ResultRow> run(const Config& config, const RunOptions& options) {
    auto rows = run_experiment(config, options);
    if (config.has("output")) {
        const auto path = config.text("output");
        {
            auto out = open_output(path);
            write_results_csv(out, rows);
        }
        auto meta = open_output(path + ".meta");
        meta << metadata_line(config) << '\n';
    } else {
        write_results_csv(std::cout, rows);
    }
    return rows;
}

}  // namespace rmt
