#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "rmtlab/config.hpp"
#include "rmtlab/errors.hpp"
#include "rmtlab/experiments.hpp"

namespace {

const char* describe(rmt::Experiment e) {
    using rmt::Experiment;
    switch (e) {
    case Experiment::tail_square: return "P(s_n(A) <= eps / sqrt(n)) for square random matrices";
    case Experiment::tail_rectangular: return "P(s_n(A) <= c1 sqrt(N)) for tall N x n random matrices";
    case Experiment::sign_census: return "exact singularity probability of n x n sign matrices (n <= 5)";
    case Experiment::edelman: return "Gaussian smallest singular value tail against the Edelman limit";
    case Experiment::levy: return "Levy concentration of weighted Rademacher sums (exact, Monte Carlo, Esseen)";
    case Experiment::lcd: return "essential LCD of a vector or of random normals";
    case Experiment::khinchin: return "empirical Khinchin constants alpha_p, beta_p";
    case Experiment::kashin: return "random sections of the octahedron and the 1-2 norm sandwich";
    case Experiment::perturb: return "P(s_n(D + U) <= t) for Haar U";
    case Experiment::net_audit: return "greedy eps-nets on the sphere: size, separation, covering";
    }
    return "";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerical experiments on extreme singular values, small-ball probabilities and sections of the octahedron"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::string out_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> trials;
    std::optional<unsigned> workers;
    std::vector<std::string> overrides;
    bool quiet = false;
    app.add_option("--config", config_path, "key = value config file")->check(CLI::ExistingFile);
    app.add_option("--seed", seed, "master seed");
    app.add_option("--out", out_path, "CSV output path (stdout when omitted); metadata goes to PATH.meta");
    app.add_option("--trials", trials, "trial count");
    app.add_option("--workers", workers, "worker threads (0 = one per hardware thread); results do not depend on it");
    app.add_option("--set", overrides, "override a config key, KEY=VALUE (repeatable)");
    app.add_flag("--quiet", quiet, "no progress output on stderr");

    for (auto e : rmt::all_experiments()) app.add_subcommand(rmt::to_string(e), describe(e));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        rmt::Config cfg = config_path.empty() ? rmt::Config{} : rmt::Config::load(config_path);
        const std::string name = app.get_subcommands().front()->get_name();
        if (cfg.has("experiment") && cfg.text("experiment") != name)
            throw rmt::ValidationError("config names experiment '" + cfg.text("experiment") + "' but the subcommand is '" + name + "'");
        cfg.set("experiment", name);
        for (const auto& kv : overrides) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) throw rmt::ValidationError("--set expects KEY=VALUE, got '" + kv + "'");
            cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
        }
        if (seed) cfg.set("seed", std::to_string(*seed));
        if (trials) cfg.set("trials", std::to_string(*trials));
        if (workers) cfg.set("workers", std::to_string(*workers));
        if (!out_path.empty()) cfg.set("output", out_path);

        rmt::RunOptions options;
        options.workers = 0;
        const auto rows = rmt::run(cfg, options);
        if (!quiet && cfg.has("output"))
            std::cerr << name << ": wrote " << rows.size() << " rows to " << cfg.text("output") << "\n";
        return 0;
    } catch (const rmt::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const rmt::ResourceError& e) {
        std::cerr << "resource error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
