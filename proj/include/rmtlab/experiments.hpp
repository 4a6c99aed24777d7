#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rmtlab/config.hpp"

namespace rmt {

enum class Experiment { tail_square, tail_rectangular, sign_census, edelman, levy, lcd, khinchin, kashin, perturb, net_audit };

std::string to_string(Experiment e);
Experiment parse_experiment(const std::string& name);
const std::vector<Experiment>& all_experiments();

// Keys an experiment accepts besides the global ones (experiment, seed,
// trials, workers, output). Used to reject typos.
const std::vector<std::string>& experiment_keys(Experiment e);

// One row of the fixed result schema.
struct ResultRow {
    std::string experiment;
    std::uint64_t n = 0;
    std::uint64_t big_n = 0;
    std::string param_name;
    std::string param_value;
    double threshold = 0.0;
    double estimate = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::uint64_t trials = 0;
    std::uint64_t seed = 0;
};

struct RunOptions {
    unsigned workers = 1;  // overridden by the config's `workers` key when present
};

// Validates the config (required keys, unknown keys, value ranges) and
// runs it. Writes the module-level detail CSV when `detail_path` is set.
std::vector<ResultRow> run_experiment(const Config& config, const RunOptions& options = {});

// Header: experiment,n,N,param_name,param_value,threshold,estimate,ci_low,ci_high,trials,seed
void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows);

// "version=..., config_hash=<16 hex digits>, master_seed=..."
std::string metadata_line(const Config& config);

// Runs the config and writes the CSV to `output` (or the config's `output`
// key) plus `<output>.meta`. Returns the rows.
std::vector<ResultRow> run(const Config& config, const RunOptions& options = {});

}  // namespace rmt
