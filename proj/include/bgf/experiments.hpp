#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "bgf/config.hpp"
#include "json.hpp"

namespace bgf::experiments {

using nlohmann::json;

/// One registered tolerance check: passed iff |value - target| <= tolerance.
struct Gate {
    std::string name;
    double value = 0.0;
    double target = 0.0;
    double tolerance = 0.0;
    bool passed = false;
    std::string detail;
};

struct Report {
    std::string id;
    int criterion = 0;
    std::string anchor;
    std::string description;
    config::ExperimentConfig config;
    json inputs = json::object();
    json outputs = json::object();
    std::vector<Gate> gates;
    bool informational = false;
    double wall_seconds = 0.0;
    /// CSV artifacts: file name -> content.
    std::map<std::string, std::string> csv;

    /// All gates pass; informational reports always pass.
    bool passed() const;
    /// Adds a gate and returns whether it passed.
    bool gate(const std::string& name, double value, double target, double tolerance, const std::string& detail = "");
    /// Gate with a wall-clock value; excluded from the deterministic part of the report.
    bool timing_gate(const std::string& name, double seconds, double limit);
    json to_json(bool include_timing = true) const;
};

using RunFn = std::function<void(const config::ExperimentConfig&, Report&)>;

struct ExperimentSpec {
    std::string id;
    int criterion = 0;  ///< acceptance criterion number, 0 when not one of them
    std::string anchor;
    std::string description;
    std::vector<config::ParamSpec> params;
    std::uint64_t default_seed = 1;
    std::size_t default_replicates = 1;
    bool informational = false;
    RunFn run;
};

const std::vector<ExperimentSpec>& registry();
/// Throws ConfigError listing the registered ids.
const ExperimentSpec& find_experiment(const std::string& id);
config::ExperimentConfig default_config(const std::string& id);
/// Parses a config file against the schema of the experiment it names.
config::ExperimentConfig load_config(const std::string& text);

/// Runs the pipeline without touching the disk.
Report execute(const config::ExperimentConfig& config);

/// BGF_OUTPUT_ROOT if set, else "out".
std::filesystem::path output_root();
/// config.output_dir if set, else output_root() / id.
std::filesystem::path output_dir(const config::ExperimentConfig& config);

/// Executes, writes report.json, config.ini and CSV artifacts; returns 0 iff every gate passes.
int run_experiment(const config::ExperimentConfig& config, Report* report = nullptr);

struct TailFit {
    double slope = 0.0;
    double std_error = 0.0;
    double intercept = 0.0;
    std::size_t tail_count = 0;  ///< samples above r_lo
    std::vector<double> r;
    std::vector<double> survival;
};

/// Least-squares slope of log empirical survival against log r on a log-spaced grid over
/// [r_lo, r_hi], with a bootstrap standard error. Needs at least 100 samples above r_lo.
TailFit fit_tail_slope(const std::vector<double>& samples, double r_lo, double r_hi, std::size_t grid = 16,
                       std::size_t bootstrap = 200, std::uint64_t seed = 1);

struct TwoSampleReport {
    double ks = 0.0;
    double p_value = 1.0;
    std::size_t permutations = 0;
    std::vector<double> probabilities;
    std::vector<double> quantiles_a;
    std::vector<double> quantiles_b;
    json to_json() const;
};

/// KS statistic, seeded permutation p-value and summary quantiles.
TwoSampleReport two_sample_report(const std::vector<double>& a, const std::vector<double>& b,
                                  std::size_t permutations = 999, std::uint64_t seed = 1);

/// Hill estimate of the tail index from the k largest samples.
double hill_index(std::vector<double> samples, std::size_t k);

}  // namespace bgf::experiments
