#include "lasim/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <thread>

#include "lasim/baselines.hpp"

namespace fs = std::filesystem;

namespace lasim {

namespace {

std::uint64_t mix64(std::uint64_t a, std::uint64_t b) {
    std::uint64_t x = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr int kTrainRealizationBase = 1000000;

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    size_t e = s.find_last_not_of(" \t\r\n");
    return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
}

double parse_num(const std::string& key, const std::string& value) {
    try {
        size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) {
            throw std::invalid_argument("trailing");
        }
        return v;
    } catch (...) {
        throw ConfigError("bad numeric value '" + value + "' for option '" + key + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "1" || value == "true" || value == "on") return true;
    if (value == "0" || value == "false" || value == "off") return false;
    throw ConfigError("bad boolean value '" + value + "' for option '" + key + "'");
}

} // namespace

std::string format_csv_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

void ExperimentConfig::apply_setup() {
    if (setup.empty()) {
        return;
    }
    if (setup == "A" || setup == "a") {
        n_cqi = 3;
        n_harq = 10;
    } else if (setup == "B" || setup == "b") {
        n_cqi = 1;
        n_harq = 1;
    } else {
        throw ConfigError("setup must be A or B, got '" + setup + "'");
    }
}

void ExperimentConfig::validate() const {
    if (method != "olla" && method != "salad" && method != "rl") {
        throw ConfigError("method must be one of olla|salad|rl, got '" + method + "'");
    }
    if (method == "rl") {
        try {
            Predictor::parse_mode(predictor);
        } catch (const std::exception& e) {
            throw ConfigError(e.what());
        }
        try {
            train.validate();
        } catch (const std::exception& e) {
            throw ConfigError(e.what());
        }
    }
    if (seeds.empty()) {
        throw ConfigError("at least one seed is required");
    }
    if (realizations < 1) {
        throw ConfigError("realizations must be >= 1");
    }
    if (episode_slots < 1) {
        throw ConfigError("episode_slots must be >= 1");
    }
    if (trace_path.empty()) {
        try {
            ChannelScenario::named(scenario);
        } catch (const std::exception& e) {
            throw ConfigError(e.what());
        }
    }
    try {
        env_config().validate();
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
}

EnvConfig ExperimentConfig::env_config() const {
    EnvConfig c;
    c.n_cqi = n_cqi;
    c.n_harq = n_harq;
    c.n_bler = n_bler;
    c.k_e = k_e;
    c.tau = tau;
    c.scheduler = scheduler;
    c.bler = bler;
    c.feedback = feedback;
    return c;
}

PredictorConfig ExperimentConfig::predictor_config() const {
    PredictorConfig pc;
    pc.bler = bler;
    pc.oco.tau = tau;
    const EnvConfig ec = env_config();
    pc.fallback_midpoint_db = 0.5 * (ec.sinr_norm_lo_db + ec.sinr_norm_hi_db);
    return pc;
}

std::string ExperimentConfig::resolved_outdir() const {
    fs::path p(outdir);
    if (p.is_relative()) {
        if (const char* root = std::getenv("LASIM_OUTPUT_ROOT")) {
            return (fs::path(root) / p).string();
        }
    }
    return p.string();
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file '" + path + "'");
    }
    ExperimentConfig cfg;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') {
            continue;
        }
        const size_t eq = t.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config '" + path + "': expected key=value at line " + std::to_string(line_no));
        }
        cfg.set_option(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
    }
    return cfg;
}

void ExperimentConfig::set_option(const std::string& key, const std::string& value) {
    if (key == "scenario") {
        scenario = value;
    } else if (key == "trace") {
        trace_path = value;
    } else if (key == "method") {
        method = value;
    } else if (key == "predictor") {
        predictor = value;
    } else if (key == "setup") {
        setup = value;
        apply_setup();
    } else if (key == "n_cqi") {
        n_cqi = static_cast<int>(parse_num(key, value));
    } else if (key == "n_harq") {
        n_harq = static_cast<int>(parse_num(key, value));
    } else if (key == "n_bler") {
        n_bler = static_cast<int>(parse_num(key, value));
    } else if (key == "k_e") {
        k_e = parse_num(key, value);
    } else if (key == "tau") {
        tau = parse_num(key, value);
    } else if (key == "seeds") {
        seeds.clear();
        if (value.find(',') == std::string::npos) {
            // A single integer N means seeds 1..N.
            const int n = static_cast<int>(parse_num(key, value));
            if (n < 1) {
    throw ConfigError("seeds count must be >= 1");
            }
            for (int i = 1; i <= n; ++i) {
                seeds.push_back(static_cast<std::uint64_t>(i));
            }
        } else {
            std::stringstream ss(value);
            std::string item;
            while (std::getline(ss, item, ',')) {
                seeds.push_back(static_cast<std::uint64_t>(parse_num(key, trim(item))));
            }
        }
    } else if (key == "realizations") {
        realizations = static_cast<int>(parse_num(key, value));
    } else if (key == "episode_slots") {
        episode_slots = static_cast<int>(parse_num(key, value));
    } else if (key == "outdir") {
        outdir = value;
    } else if (key == "checkpoint") {
        checkpoint = value;
    } else if (key == "write_slot_logs") {
        write_slot_logs = parse_bool(key, value);
    } else if (key == "threads") {
        threads = static_cast<int>(parse_num(key, value));
    } else if (key == "train.learning_rate") {
        train.learning_rate = parse_num(key, value);
    } else if (key == "train.clip_eps") {
        train.clip_eps = parse_num(key, value);
    } else if (key == "train.entropy_coef") {
        train.entropy_coef = parse_num(key, value);
    } else if (key == "train.vf_coef") {
        train.vf_coef = parse_num(key, value);
    } else if (key == "train.hidden") {
        train.hidden = static_cast<int>(parse_num(key, value));
    } else if (key == "train.rollout_len") {
        train.rollout_len = static_cast<int>(parse_num(key, value));
    } else if (key == "train.minibatch") {
        train.minibatch = static_cast<int>(parse_num(key, value));
    } else if (key == "train.epochs") {
        train.epochs = static_cast<int>(parse_num(key, value));
    } else if (key == "train.total_transitions") {
        train.total_transitions = static_cast<long long>(parse_num(key, value));
    } else if (key == "train.seed") {
        train.seed = static_cast<std::uint64_t>(parse_num(key, value));
    } else if (key == "train.per_ue_reward") {
        train.per_ue_reward = parse_bool(key, value);
    } else if (key == "bler.slope_per_db") {
        bler.slope_per_db = parse_num(key, value);
    } else if (key == "bler.impl_loss_db") {
        bler.impl_loss_db = parse_num(key, value);
    } else if (key == "feedback.report_delay_slots") {
        feedback.report_delay_slots = static_cast<int>(parse_num(key, value));
    } else if (key == "feedback.quant_step_db") {
        feedback.quant_step_db = parse_num(key, value);
    } else if (key == "scheduler") {
        if (value == "all") {
            scheduler.mode = SchedulerConfig::Mode::All;
        } else if (value == "pf") {
            scheduler.mode = SchedulerConfig::Mode::Pf;
        } else {
            throw ConfigError("scheduler must be all|pf, got '" + value + "'");
        }
    } else if (key == "scheduler.k") {
        scheduler.pf_k = static_cast<int>(parse_num(key, value));
    } else if (key == "scheduler.alpha") {
        scheduler.pf_alpha = parse_num(key, value);
    } else {
        throw ConfigError("unknown option '" + key + "'");
    }
}

namespace {

SinrTrace cell_trace(const ExperimentConfig& cfg, int realization) {
    if (!cfg.trace_path.empty()) {
        return load_trace(cfg.trace_path);
    }
    ChannelScenario scen = ChannelScenario::named(cfg.scenario);
    scen.num_slots = cfg.episode_slots;
    return generate(scen, realization);
}

} // namespace

LinkEnv make_cell_env(const ExperimentConfig& cfg, std::uint64_t seed, int realization) {
    const McsTable& table = McsTable::table1();
    SinrTrace trace = cell_trace(cfg, realization);
    const int num_ues = trace.num_ues();
    Predictor pred(cfg.method == "rl" ? Predictor::parse_mode(cfg.predictor) : Predictor::Mode::Dcqi,
                   cfg.predictor_config(), table, num_ues, mix64(seed, 0x70ULL + static_cast<std::uint64_t>(realization)));
    return LinkEnv(cfg.env_config(), table, std::move(trace), std::move(pred),
                   mix64(seed, 0xe0ULL + static_cast<std::uint64_t>(realization)));
}

TrainResult train_agent(const ExperimentConfig& cfg) {
    const McsTable& table = McsTable::table1();
    const EnvConfig env_cfg = cfg.env_config();
    const Predictor::Mode mode = Predictor::parse_mode(cfg.predictor);

    std::shared_ptr<SinrTrace> fixed;
    if (!cfg.trace_path.empty()) {
        fixed = std::make_shared<SinrTrace>(load_trace(cfg.trace_path));
    }
    const ExperimentConfig c = cfg;
    auto factory = [c, env_cfg, mode, fixed, &table](int episode) {
        SinrTrace trace;
        if (fixed) {
            trace = *fixed;
        } else {
            ChannelScenario scen = ChannelScenario::named(c.scenario);
            scen.num_slots = c.episode_slots;
            trace = generate(scen, kTrainRealizationBase + episode);
        }
        const int num_ues = trace.num_ues();
        Predictor pred(mode, c.predictor_config(), table, num_ues,
                       mix64(c.train.seed, 0x3000ULL + static_cast<std::uint64_t>(episode)));
        return LinkEnv(env_cfg, table, std::move(trace), std::move(pred),
                       mix64(c.train.seed, 0x5000ULL + static_cast<std::uint64_t>(episode)));
    };
    return train(factory, cfg.train);
}

namespace {

struct CellOutput {
    MetricsAccumulator acc;
    std::uint64_t trace_hash = 0;
};

void log_slot(std::ostream& out, const SlotResult& r) {
    for (size_t u = 0; u < r.ue.size(); ++u) {
        const UeSlotResult& ue = r.ue[u];
        out << r.slot << ',' << u << ',' << (ue.scheduled ? 1 : 0) << ',' << ue.mcs << ','
            << format_csv_double(ue.true_sinr_db) << ',' << format_csv_double(ue.est_sinr_db) << ',' << ue.harq << ','
            << format_csv_double(ue.se_achieved) << ',' << format_csv_double(r.reward) << ','
            << format_csv_double(ue.lambda) << '\n';
    }
}

CellOutput run_cell(const ExperimentConfig& cfg, const PolicyNet* net, std::uint64_t seed, int realization,
                    const std::string& log_path) {
    const McsTable& table = McsTable::table1();
    LinkEnv env = make_cell_env(cfg, seed, realization);
    const int num_ues = env.num_ues();

    CellOutput out;
    out.trace_hash = env.trace().content_hash();

    std::unique_ptr<std::ofstream> log;
    if (!log_path.empty()) {
        log = std::make_unique<std::ofstream>(log_path);
        if (!*log) {
            throw std::runtime_error("cannot write slot log '" + log_path + "'");
        }
        *log << "slot,ue,scheduled,mcs,sinr_true_db,sinr_est_db,ack,se_achieved,reward,lambda\n";
    }

    std::vector<OllaController> olla;
    std::vector<SaladController> salad;
    std::mt19937_64 ctrl_rng(mix64(seed, 0x11ULL + static_cast<std::uint64_t>(realization)));
    std::vector<int> salad_last_harq(static_cast<size_t>(num_ues), -1);
    std::vector<int> salad_last_mcs(static_cast<size_t>(num_ues), 0);

    std::vector<double> state = env.reset();
    if (cfg.method == "olla") {
        OllaConfig oc;
        oc.target_bler = cfg.tau;
        for (int u = 0; u < num_ues; ++u) {
            olla.emplace_back(oc, table, cfg.bler);
        }
    } else if (cfg.method == "salad") {
        SaladConfig sc;
        for (int u = 0; u < num_ues; ++u) {
            sc.init_est_db = env.last_report_db(u);
            salad.emplace_back(sc, table, cfg.bler);
        }
    }

    std::vector<double> window_bler(static_cast<size_t>(num_ues));
    while (!env.done()) {
        std::vector<int> action(static_cast<size_t>(num_ues), 0);
        if (cfg.method == "rl") {
            action = act(*net, state, num_ues, ctrl_rng, true);
        } else if (cfg.method == "olla") {
            for (int u = 0; u < num_ues; ++u) {
                action[static_cast<size_t>(u)] = olla[static_cast<size_t>(u)].select(env.last_report_db(u));
            }
        } else {
            for (int u = 0; u < num_ues; ++u) {
                action[static_cast<size_t>(u)] = salad[static_cast<size_t>(u)].step(
                    salad_last_harq[static_cast<size_t>(u)], salad_last_mcs[static_cast<size_t>(u)], ctrl_rng);
            }
        }

        StepOutput step = env.step(action);
        for (int u = 0; u < num_ues; ++u) {
            const UeSlotResult& r = step.result.ue[static_cast<size_t>(u)];
            window_bler[static_cast<size_t>(u)] = env.window_bler(u);
            if (!r.scheduled) {
                continue;
            }
            if (cfg.method == "olla") {
                olla[static_cast<size_t>(u)].update(r.harq == 1 ? Harq::Ack : Harq::Nack);
            } else if (cfg.method == "salad") {
                salad_last_harq[static_cast<size_t>(u)] = r.harq;
                salad_last_mcs[static_cast<size_t>(u)] = r.mcs;
            }
        }
        out.acc.add_slot(step.result, window_bler);
        if (log) {
            log_slot(*log, step.result);
        }
        state = std::move(step.state);
    }
    return out;
}

void write_cdf(const std::string& path, const CdfTable& cdf) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write '" + path + "'");
    }
    out << "value,cumulative_prob\n";
    for (size_t i = 0; i < cdf.value.size(); ++i) {
        out << format_csv_double(cdf.value[i]) << ',' << format_csv_double(cdf.cumulative_prob[i]) << '\n';
    }
}

void write_summary_csv(const std::string& path, const ExperimentConfig& cfg, const MetricsSummary& s, int state_dim,
                       std::uint64_t combined_hash) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write '" + path + "'");
    }
    out << "method,predictor,k_e,mean_se,median_se,mean_bler,median_bler,median_mcs,scheduled,slots,state_dim,"
           "trace_hash\n";
    char hash_hex[24];
    std::snprintf(hash_hex, sizeof(hash_hex), "%016llx", static_cast<unsigned long long>(combined_hash));
    out << cfg.method << ',' << (cfg.method == "rl" ? cfg.predictor : "-") << ',' << format_csv_double(cfg.k_e) << ','
        << format_csv_double(s.mean_se) << ',' << format_csv_double(s.median_se) << ','
        << format_csv_double(s.mean_bler) << ',' << format_csv_double(s.median_bler) << ','
        << format_csv_double(s.median_mcs) << ',' << s.scheduled << ',' << s.slots << ',' << state_dim << ','
        << hash_hex << '\n';
}

double recompute_mean_se_from_logs(const std::vector<std::string>& paths) {
    double total = 0.0;
    long long slots = 0;
    for (const std::string& path : paths) {
        std::ifstream in(path);
        if (!in) {
            throw std::runtime_error("cross-check: cannot reopen '" + path + "'");
        }
        std::string line;
        std::getline(in, line);  // header
        int cur_slot = -1;
        double se = 0.0;
        int sched = 0;
        auto flush = [&]() {
            if (cur_slot >= 0) {
                total += sched > 0 ? se / sched : 0.0;
                ++slots;
            }
        };
        while (std::getline(in, line)) {
            if (line.empty()) {
                continue;
            }
            std::istringstream ss(line);
            std::string cell;
            std::vector<std::string> cells;
            while (std::getline(ss, cell, ',')) {
                cells.push_back(cell);
            }
            const int slot = std::stoi(cells[0]);
            if (slot != cur_slot) {
                flush();
                cur_slot = slot;
                se = 0.0;
                sched = 0;
            }
            if (cells[2] == "1") {
                ++sched;
                se += std::stod(cells[7]);
            }
        }
        flush();
    }
    return slots > 0 ? total / static_cast<double>(slots) : 0.0;
}

} // namespace

RunResult run_experiment(const ExperimentConfig& raw) {
    ExperimentConfig cfg = raw;
    cfg.apply_setup();
    cfg.validate();

    const std::string outdir = cfg.resolved_outdir();
    fs::create_directories(outdir);

    RunResult result;

    // Resolve the policy first so evaluation cells can share it read-only.
    std::unique_ptr<PolicyNet> net;
    if (cfg.method == "rl") {
        if (!cfg.checkpoint.empty()) {
            net = std::make_unique<PolicyNet>(PolicyNet::load(cfg.checkpoint));
        } else {
            TrainResult tr = train_agent(cfg);
            result.training_curve = tr.episode_mean_reward;
            net = std::make_unique<PolicyNet>(std::move(tr.net));
            net->save((fs::path(outdir) / "checkpoint.txt").string(), cfg.label());
            std::ofstream curve((fs::path(outdir) / "training_curve.csv").string());
            curve << "episode,mean_reward\n";
            for (size_t i = 0; i < result.training_curve.size(); ++i) {
                curve << i << ',' << format_csv_double(result.training_curve[i]) << '\n';
            }
        }
        const EnvConfig ec = cfg.env_config();
        if (net->input_dim() != ec.per_ue_dim()) {
            throw ConfigError("checkpoint input dim " + std::to_string(net->input_dim()) +
                              " does not match configured observation size " + std::to_string(ec.per_ue_dim()));
        }
    }

    struct Cell {
        std::uint64_t seed;
        int realization;
        std::string log_path;
    };
    std::vector<Cell> cells;
    for (std::uint64_t seed : cfg.seeds) {
        for (int r = 0; r < cfg.realizations; ++r) {
            std::string log_path;
            if (cfg.write_slot_logs) {
                log_path = (fs::path(outdir) /
                            ("slots_" + cfg.label() + "_seed" + std::to_string(seed) + "_real" + std::to_string(r) +
                             ".csv"))
                               .string();
            }
            cells.push_back({seed, r, log_path});
        }
    }

    std::vector<CellOutput> outputs(cells.size());
    std::vector<std::exception_ptr> errors(cells.size());
    const int hw = static_cast<int>(std::thread::hardware_concurrency());
    const int nthreads = std::max(1, std::min<int>(cfg.threads > 0 ? cfg.threads : hw, static_cast<int>(cells.size())));
    std::atomic<size_t> next{0};
    auto worker = [&]() {
        while (true) {
            const size_t i = next.fetch_add(1);
            if (i >= cells.size()) {
                return;
            }
            try {
                outputs[i] = run_cell(cfg, net.get(), cells[i].seed, cells[i].realization, cells[i].log_path);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (int i = 0; i < nthreads; ++i) {
        pool.emplace_back(worker);
    }
    for (auto& t : pool) {
        t.join();
    }
    for (const auto& err : errors) {
        if (err) {
            std::rethrow_exception(err);
        }
    }

    MetricsAccumulator acc;
    std::uint64_t combined_hash = 1469598103934665603ULL;
    for (const CellOutput& cell : outputs) {
        acc.merge(cell.acc);
        result.trace_hashes.push_back(cell.trace_hash);
        combined_hash = mix64(combined_hash, cell.trace_hash);
    }
    result.summary = MetricsSummary::from(acc);

    SinrTrace probe = cell_trace(cfg, 0);
    result.state_dim = cfg.env_config().per_ue_dim() * probe.num_ues();

    const std::string summary_path = (fs::path(outdir) / "summary.csv").string();
    write_summary_csv(summary_path, cfg, result.summary, result.state_dim, combined_hash);
    result.summary_path = summary_path;

    write_cdf((fs::path(outdir) / "cdf_se.csv").string(), result.summary.se_cdf);
    write_cdf((fs::path(outdir) / "cdf_bler.csv").string(), result.summary.bler_cdf);
    write_cdf((fs::path(outdir) / "cdf_mcs.csv").string(), result.summary.mcs_cdf);

    {
        std::ofstream hist((fs::path(outdir) / "hist_mcs.csv").string());
        hist << "ue,mcs,fraction\n";
        for (size_t u = 0; u < result.summary.per_ue_mcs_hist.size(); ++u) {
            for (int m = 0; m < 29; ++m) {
                hist << u << ',' << m << ',' << format_csv_double(result.summary.per_ue_mcs_hist[u][static_cast<size_t>(m)])
                     << '\n';
            }
        }
    }
    {
        std::ofstream meta((fs::path(outdir) / "run_meta.txt").string());
        meta << "label=" << cfg.label() << '\n';
        meta << "method=" << cfg.method << '\n';
        meta << "predictor=" << (cfg.method == "rl" ? cfg.predictor : "-") << '\n';
        meta << "scenario=" << (cfg.trace_path.empty() ? cfg.scenario : ("trace:" + cfg.trace_path)) << '\n';
        meta << "setup=" << (cfg.setup.empty() ? "-" : cfg.setup) << '\n';
        meta << "n_cqi=" << cfg.n_cqi << "\nn_harq=" << cfg.n_harq << "\nn_bler=" << cfg.n_bler << '\n';
        meta << "k_e=" << format_csv_double(cfg.k_e) << "\ntau=" << format_csv_double(cfg.tau) << '\n';
        meta << "state_dim=" << result.state_dim << '\n';
        meta << "episode_slots=" << cfg.episode_slots << '\n';
        meta << "cells=" << cells.size() << '\n';
        char hex[24];
        for (size_t i = 0; i < cells.size(); ++i) {
            std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(result.trace_hashes[i]));
            meta << "trace_hash_seed" << cells[i].seed << "_real" << cells[i].realization << '=' << hex << '\n';
        }
    }

    if (cfg.write_slot_logs) {
        std::vector<std::string> log_paths;
        for (const Cell& c : cells) {
            log_paths.push_back(c.log_path);
        }
        const double recomputed = recompute_mean_se_from_logs(log_paths);
        if (std::abs(recomputed - result.summary.mean_se) > 1e-9 * std::max(1.0, std::abs(result.summary.mean_se))) {
            throw std::runtime_error("summary mean SE does not match per-slot logs (internal inconsistency)");
        }
    }
    return result;
}

CompareResult compare(const std::vector<ExperimentConfig>& configs, const std::string& reference_label,
                      const std::string& outdir_raw) {
    if (configs.size() < 2) {
        throw ConfigError("compare needs at least two configurations");
    }
    std::vector<ExperimentConfig> cfgs = configs;
    for (auto& c : cfgs) {
        c.apply_setup();
    }
    for (size_t i = 1; i < cfgs.size(); ++i) {
        if (cfgs[i].scenario != cfgs[0].scenario || cfgs[i].trace_path != cfgs[0].trace_path ||
            cfgs[i].seeds != cfgs[0].seeds || cfgs[i].realizations != cfgs[0].realizations ||
            cfgs[i].episode_slots != cfgs[0].episode_slots) {
            throw ConfigError("compare: all configurations must share scenario, seeds, realizations and episode length");
        }
    }
    std::vector<std::string> labels;
    for (const auto& c : cfgs) {
        const std::string l = c.label();
        if (std::find(labels.begin(), labels.end(), l) != labels.end()) {
            throw ConfigError("compare: duplicate method label '" + l + "'");
        }
        labels.push_back(l);
    }
    if (std::find(labels.begin(), labels.end(), reference_label) == labels.end()) {
        throw ConfigError("compare: reference '" + reference_label + "' is not among the configurations");
    }

    ExperimentConfig outdir_probe;
    outdir_probe.outdir = outdir_raw;
    const std::string outdir = outdir_probe.resolved_outdir();
    fs::create_directories(outdir);

    CompareResult result;
    std::vector<RunResult> runs;
    for (size_t i = 0; i < cfgs.size(); ++i) {
        ExperimentConfig c = cfgs[i];
        c.outdir = (fs::path(outdir_raw) / labels[i]).string();
        runs.push_back(run_experiment(c));
    }
    for (size_t i = 1; i < runs.size(); ++i) {
        if (runs[i].trace_hashes != runs[0].trace_hashes) {
            throw std::runtime_error("compare: paired traces differ across methods (seed discipline violated)");
        }
    }

    double ref_se = 0.0;
    for (size_t i = 0; i < runs.size(); ++i) {
        if (labels[i] == reference_label) {
            ref_se = runs[i].summary.mean_se;
        }
    }
    const std::string csv_path = (fs::path(outdir) / "comparison.csv").string();
    std::ofstream out(csv_path);
    out << "label,mean_se,delta_se_pct,mean_bler,median_se,median_bler,median_mcs\n";
    for (size_t i = 0; i < runs.size(); ++i) {
        CompareRow row;
        row.label = labels[i];
        row.summary = runs[i].summary;
        row.delta_se_pct = ref_se != 0.0 ? 100.0 * (row.summary.mean_se - ref_se) / ref_se : 0.0;
        out << row.label << ',' << format_csv_double(row.summary.mean_se) << ','
            << format_csv_double(row.delta_se_pct) << ',' << format_csv_double(row.summary.mean_bler) << ','
            << format_csv_double(row.summary.median_se) << ',' << format_csv_double(row.summary.median_bler) << ','
            << format_csv_double(row.summary.median_mcs) << '\n';
        result.rows.push_back(std::move(row));
    }
    result.csv_path = csv_path;
    return result;
}

SweepResult sweep_ke(const ExperimentConfig& base, const std::vector<double>& ke_values) {
    if (base.method != "rl") {
        throw ConfigError("sweep-ke requires method=rl");
    }
    if (ke_values.empty()) {
        throw ConfigError("sweep-ke: at least one k_E value required");
    }
    ExperimentConfig root = base;
    root.apply_setup();
    const std::string outdir = root.resolved_outdir();
    fs::create_directories(outdir);

    SweepResult result;
    for (double v : ke_values) {
        ExperimentConfig c = root;
        c.k_e = v;
        c.outdir = (fs::path(base.outdir) / ("ke_" + format_csv_double(v))).string();
        const RunResult run = run_experiment(c);
        result.rows.push_back({v, run.summary});
    }

    const std::string csv_path = (fs::path(outdir) / "sweep_ke.csv").string();
    std::ofstream out(csv_path);
    out << "k_e,median_se,median_bler,median_mcs,mean_se,mean_bler\n";
    for (const SweepRow& row : result.rows) {
        out << format_csv_double(row.k_e) << ',' << format_csv_double(row.summary.median_se) << ','
            << format_csv_double(row.summary.median_bler) << ',' << format_csv_double(row.summary.median_mcs) << ','
            << format_csv_double(row.summary.mean_se) << ',' << format_csv_double(row.summary.mean_bler) << '\n';
    }
    result.csv_path = csv_path;
    return result;
}

FqiArtifacts run_fqi_experiment(const FqiDataset& data, const FqiConfig& cfg, const std::string& outdir_raw) {
    ExperimentConfig probe;
    probe.outdir = outdir_raw;
    const std::string outdir = probe.resolved_outdir();
    fs::create_directories(outdir);

    FqiArtifacts art;
    art.result = fqi_train(data, cfg);
    art.policy = extract_policy(art.result.q, data);

    art.curve_csv = (fs::path(outdir) / "fqi_curve.csv").string();
    {
        std::ofstream out(art.curve_csv);
        out << "iteration,avg_q\n";
        for (size_t i = 0; i < art.result.avg_q_curve.size(); ++i) {
            out << i << ',' << format_csv_double(art.result.avg_q_curve[i]) << '\n';
        }
    }
    art.policy_csv = (fs::path(outdir) / "fqi_policy.csv").string();
    {
        std::ofstream out(art.policy_csv);
        out << "mcs,learned_pct,behavior_pct\n";
        for (int m = 0; m < 29; ++m) {
            out << m << ',' << format_csv_double(100.0 * art.policy.learned[static_cast<size_t>(m)]) << ','
                << format_csv_double(100.0 * art.policy.behavior[static_cast<size_t>(m)]) << '\n';
        }
    }
    return art;
}

} // namespace lasim
