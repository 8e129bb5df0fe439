// lasim: slot-level link adaptation experiments with OLLA/SALAD baselines,
// an online policy-gradient agent over six SINR estimation modes, and an
// offline fitted-Q trainer. Results are written as plot-ready CSV files.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>

#include "lasim/experiment.hpp"

using namespace lasim;

namespace {

struct CommonArgs {
    std::string config_file;
    std::vector<std::string> sets;
    std::string scenario, trace, method, predictor, setup, seeds, out, checkpoint;
    double ke = std::nan("");
    double tau = std::nan("");
    int realizations = -1;
    int slots = -1;
    int threads = -1;
    long long train_steps = -1;
    int train_seed = -1;
    bool no_slot_logs = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_file, "key=value config file applied before flags");
    cmd->add_option("--set", args.sets, "extra key=value override (repeatable)");
    cmd->add_option("--scenario", args.scenario, "named channel scenario (paper-3ue, single-10db)");
    cmd->add_option("--trace", args.trace, "CSV trace file replacing the scenario generator");
    cmd->add_option("--predictor", args.predictor, "rl SINR input: oracle|dcqi|kf|dt|rf|oco");
    cmd->add_option("--setup", args.setup, "observation size preset: A (3 CQI/10 HARQ) or B (1/1)");
    cmd->add_option("--ke", args.ke, "BLER penalty integral gain k_E");
    cmd->add_option("--tau", args.tau, "BLER target");
    cmd->add_option("--seeds", args.seeds, "seed count N (seeds 1..N) or comma list");
    cmd->add_option("--realizations", args.realizations, "channel realizations per seed");
    cmd->add_option("--slots", args.slots, "episode length in slots");
    cmd->add_option("--out", args.out, "output directory (relative paths resolve under $LASIM_OUTPUT_ROOT)");
    cmd->add_option("--threads", args.threads, "worker threads for evaluation cells (0 = all cores)");
    cmd->add_option("--train-steps", args.train_steps, "total UE-transitions collected during training");
    cmd->add_option("--train-seed", args.train_seed, "training RNG seed");
    cmd->add_flag("--no-slot-logs", args.no_slot_logs, "skip per-slot CSV logs");
}

ExperimentConfig build_config(const CommonArgs& args) {
    ExperimentConfig cfg;
    if (!args.config_file.empty()) {
        cfg = ExperimentConfig::from_file(args.config_file);
    }
    if (!args.scenario.empty()) cfg.set_option("scenario", args.scenario);
    if (!args.trace.empty()) cfg.set_option("trace", args.trace);
    if (!args.method.empty()) cfg.set_option("method", args.method);
    if (!args.predictor.empty()) cfg.set_option("predictor", args.predictor);
    if (!args.setup.empty()) cfg.set_option("setup", args.setup);
    if (!std::isnan(args.ke)) cfg.k_e = args.ke;
    if (!std::isnan(args.tau)) cfg.tau = args.tau;
    if (!args.seeds.empty()) cfg.set_option("seeds", args.seeds);
    if (args.realizations >= 0) cfg.realizations = args.realizations;
    if (args.slots >= 0) cfg.episode_slots = args.slots;
    if (!args.out.empty()) cfg.outdir = args.out;
    if (!args.checkpoint.empty()) cfg.checkpoint = args.checkpoint;
    if (args.threads >= 0) cfg.threads = args.threads;
    if (args.train_steps >= 0) cfg.train.total_transitions = args.train_steps;
    if (args.train_seed >= 0) cfg.train.seed = static_cast<std::uint64_t>(args.train_seed);
    if (args.no_slot_logs) cfg.write_slot_logs = false;
    for (const std::string& kv : args.sets) {
        const size_t eq = kv.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("--set expects key=value, got '" + kv + "'");
        }
        cfg.set_option(kv.substr(0, eq), kv.substr(eq + 1));
    }
    return cfg;
}

void print_summary(const std::string& label, const MetricsSummary& s) {
    std::printf("%-12s mean_se=%.4f median_se=%.4f mean_bler=%.4f median_bler=%.4f median_mcs=%.1f\n", label.c_str(),
                s.mean_se, s.median_se, s.mean_bler, s.median_bler, s.median_mcs);
}

ExperimentConfig config_for_label(const ExperimentConfig& base, const std::string& spec) {
    ExperimentConfig c = base;
    if (spec == "olla" || spec == "salad") {
        c.method = spec;
    } else if (spec.rfind("rl-", 0) == 0) {
        c.method = "rl";
        c.predictor = spec.substr(3);
    } else {
        throw ConfigError("method spec must be olla, salad or rl-<predictor>, got '" + spec + "'");
    }
    return c;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"slot-level link adaptation simulator"};
    app.require_subcommand(1);

    CommonArgs run_args, train_args, eval_args, cmp_args, sweep_args;

    auto* cmd_run = app.add_subcommand("run", "run one method over the evaluation grid and write metrics");
    add_common(cmd_run, run_args);
    cmd_run->add_option("--method", run_args.method, "olla | salad | rl");
    cmd_run->add_option("--checkpoint", run_args.checkpoint, "rl: evaluate this checkpoint instead of training");

    auto* cmd_train = app.add_subcommand("train", "train an rl agent and write checkpoint + training curve");
    add_common(cmd_train, train_args);

    auto* cmd_eval = app.add_subcommand("evaluate", "evaluate a saved rl checkpoint over the grid");
    add_common(cmd_eval, eval_args);
    cmd_eval->add_option("--checkpoint", eval_args.checkpoint, "policy checkpoint file")->required();

    auto* cmd_cmp = app.add_subcommand("compare", "paired comparison of several methods on shared seeds");
    add_common(cmd_cmp, cmp_args);
    std::string cmp_methods = "olla,rl-oracle";
    std::string cmp_reference = "rl-oracle";
    cmd_cmp->add_option("--methods", cmp_methods, "comma list: olla, salad, rl-<predictor>");
    cmd_cmp->add_option("--reference", cmp_reference, "label whose SE anchors the delta column");

    auto* cmd_sweep = app.add_subcommand("sweep-ke", "train/evaluate one rl agent per k_E value");
    add_common(cmd_sweep, sweep_args);
    std::string sweep_values = "0,0.025,0.1,0.5";
    cmd_sweep->add_option("--values", sweep_values, "comma list of k_E values");

    auto* cmd_fqi = app.add_subcommand("fqi", "offline fitted-Q iteration on a logged dataset");
    std::string fqi_input, fqi_out = "out_fqi", fqi_save_dataset, fqi_scenario = "paper-3ue";
    int fqi_synth = 0, fqi_iterations = 30, fqi_trees = 50, fqi_depth = 10;
    double fqi_gamma = 0.5;
    std::uint64_t fqi_seed = 1;
    cmd_fqi->add_option("--input", fqi_input, "logged dataset CSV");
    cmd_fqi->add_option("--synth", fqi_synth, "generate a synthetic dataset with this many slots instead");
    cmd_fqi->add_option("--scenario", fqi_scenario, "scenario for --synth");
    cmd_fqi->add_option("--save-dataset", fqi_save_dataset, "write the (synthetic) dataset here");
    cmd_fqi->add_option("--iterations", fqi_iterations, "Bellman iterations");
    cmd_fqi->add_option("--gamma", fqi_gamma, "discount factor");
    cmd_fqi->add_option("--trees", fqi_trees, "forest size");
    cmd_fqi->add_option("--depth", fqi_depth, "tree depth");
    cmd_fqi->add_option("--seed", fqi_seed, "rng seed");
    cmd_fqi->add_option("--out", fqi_out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (cmd_run->parsed()) {
            const ExperimentConfig cfg = build_config(run_args);
            const RunResult res = run_experiment(cfg);
            print_summary(cfg.label(), res.summary);
            std::printf("state_dim=%d cells=%zu summary=%s\n", res.state_dim, res.trace_hashes.size(),
                        res.summary_path.c_str());
        } else if (cmd_train->parsed()) {
            train_args.method = "rl";
            const ExperimentConfig cfg = build_config(train_args);
            cfg.validate();
            const std::string outdir = cfg.resolved_outdir();
            std::filesystem::create_directories(outdir);
            const TrainResult tr = train_agent(cfg);
            const std::string ckpt = (std::filesystem::path(outdir) / "checkpoint.txt").string();
            tr.net.save(ckpt, cfg.label());
            std::ofstream curve((std::filesystem::path(outdir) / "training_curve.csv").string());
            curve << "episode,mean_reward\n";
            for (size_t i = 0; i < tr.episode_mean_reward.size(); ++i) {
                curve << i << ',' << format_csv_double(tr.episode_mean_reward[i]) << '\n';
            }
            std::printf("trained %zu episodes, checkpoint=%s\n", tr.episode_mean_reward.size(), ckpt.c_str());
        } else if (cmd_eval->parsed()) {
            eval_args.method = "rl";
            const ExperimentConfig cfg = build_config(eval_args);
            const RunResult res = run_experiment(cfg);
            print_summary(cfg.label(), res.summary);
        } else if (cmd_cmp->parsed()) {
            ExperimentConfig base = build_config(cmp_args);
            std::vector<ExperimentConfig> configs;
            std::stringstream ss(cmp_methods);
            std::string item;
            while (std::getline(ss, item, ',')) {
                configs.push_back(config_for_label(base, item));
            }
            const CompareResult res = compare(configs, cmp_reference, base.outdir);
            for (const CompareRow& row : res.rows) {
                std::printf("%-12s mean_se=%.4f  dSE=%+.2f%%  mean_bler=%.4f\n", row.label.c_str(),
                            row.summary.mean_se, row.delta_se_pct, row.summary.mean_bler);
            }
            std::printf("table=%s\n", res.csv_path.c_str());
        } else if (cmd_sweep->parsed()) {
            sweep_args.method = "rl";
            ExperimentConfig base = build_config(sweep_args);
            if (base.predictor.empty()) {
                base.predictor = "dt";
            }
            std::vector<double> values;
            std::stringstream ss(sweep_values);
            std::string item;
            while (std::getline(ss, item, ',')) {
                values.push_back(std::stod(item));
            }
            const SweepResult res = sweep_ke(base, values);
            for (const SweepRow& row : res.rows) {
                std::printf("k_e=%-7g median_se=%.4f median_bler=%.4f median_mcs=%.1f\n", row.k_e,
                            row.summary.median_se, row.summary.median_bler, row.summary.median_mcs);
            }
            std::printf("table=%s\n", res.csv_path.c_str());
        } else if (cmd_fqi->parsed()) {
            FqiDataset data;
            if (fqi_synth > 0) {
                data = synth_dataset(ChannelScenario::named(fqi_scenario), fqi_synth, fqi_seed);
                if (!fqi_save_dataset.empty()) {
                    save_dataset(data, fqi_save_dataset);
                }
            } else if (!fqi_input.empty()) {
                data = load_dataset(fqi_input);
            } else {
                throw ConfigError("fqi: provide --input or --synth");
            }
            FqiConfig fc;
            fc.gamma = fqi_gamma;
            fc.iterations = fqi_iterations;
            fc.trees = fqi_trees;
            fc.max_depth = fqi_depth;
            fc.seed = fqi_seed;
            const FqiArtifacts art = run_fqi_experiment(data, fc, fqi_out);
            std::printf("samples=%zu dropped=%lld final_avg_q=%.4f tv=%.4f\n", data.samples.size(),
                        data.dropped_missing_successor, art.result.avg_q_curve.back(), art.policy.tv);
            std::printf("curve=%s policy=%s\n", art.curve_csv.c_str(), art.policy_csv.c_str());
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
