#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "lasim/fqi.hpp"
#include "lasim/link_env.hpp"
#include "lasim/metrics.hpp"
#include "lasim/policy.hpp"
#include "lasim/ppo.hpp"

namespace lasim {

struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A full experiment description: channel source, link adaptation method,
/// observation setup, penalty gain, and the (seed x realization) evaluation
/// grid. Loadable from a flat key=value file with CLI overrides on top.
struct ExperimentConfig {
    std::string scenario = "paper-3ue";
    std::string trace_path;  // replaces the scenario generator when set
    std::string method = "olla";  // olla | salad | rl
    std::string predictor = "oracle";
    std::string setup;  // "", "A", "B"
    int n_cqi = 3;
    int n_harq = 10;
    int n_bler = 20;
    double k_e = 0.0;
    double tau = 0.1;
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    int realizations = 10;
    int episode_slots = 1000;
    std::string outdir = "out";
    std::string checkpoint;  // rl: evaluate this checkpoint instead of training
    bool write_slot_logs = true;
    int threads = 0;  // 0 = hardware concurrency
    TrainConfig train;
    BlerModel bler;
    FeedbackConfig feedback;
    SchedulerConfig scheduler;

    std::string label() const { return method == "rl" ? "rl-" + predictor : method; }
    void apply_setup();
    void validate() const;
    EnvConfig env_config() const;
    PredictorConfig predictor_config() const;
    /// Output directory with LASIM_OUTPUT_ROOT applied to relative paths.
    std::string resolved_outdir() const;

    static ExperimentConfig from_file(const std::string& path);
    void set_option(const std::string& key, const std::string& value);
};

struct RunResult {
    MetricsSummary summary;
    std::vector<std::uint64_t> trace_hashes;  // one per (seed, realization) cell
    std::vector<double> training_curve;       // rl only
    int state_dim = 0;
    std::string summary_path;
};

/// Executes the full pipeline for one configuration and writes summary,
/// CDF/histogram CSVs, per-slot logs, and run metadata under outdir.
RunResult run_experiment(const ExperimentConfig& cfg);

/// Builds an environment for the given evaluation cell. Shared by the runner
/// and by tests that need the exact experiment wiring.
LinkEnv make_cell_env(const ExperimentConfig& cfg, std::uint64_t seed, int realization);

/// Trains the agent for an rl config (fresh realization per episode, disjoint
/// from the evaluation grid).
TrainResult train_agent(const ExperimentConfig& cfg);

struct CompareRow {
    std::string label;
    MetricsSummary summary;
    double delta_se_pct = 0.0;
};

struct CompareResult {
    std::vector<CompareRow> rows;
    std::string csv_path;
};

/// Paired comparison: all configs must share scenario, seeds, realizations
/// and episode length; per-cell trace hashes are asserted identical.
CompareResult compare(const std::vector<ExperimentConfig>& configs, const std::string& reference_label,
                      const std::string& outdir);

struct SweepRow {
    double k_e = 0.0;
    MetricsSummary summary;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    std::string csv_path;
};

/// Trains/evaluates one agent per k_E value with shared seeds.
SweepResult sweep_ke(const ExperimentConfig& base, const std::vector<double>& ke_values);

struct FqiArtifacts {
    FqiResult result;
    PolicyHistograms policy;
    std::string curve_csv;
    std::string policy_csv;
};

FqiArtifacts run_fqi_experiment(const FqiDataset& data, const FqiConfig& cfg, const std::string& outdir);

/// Fixed-precision CSV double formatting shared by all writers.
std::string format_csv_double(double v);

} // namespace lasim
