#include "lasim/fqi.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "lasim/baselines.hpp"
#include "lasim/link_env.hpp"
#include "lasim/metrics.hpp"

namespace lasim {

namespace {

const std::vector<std::string>& dataset_columns() {
    static const std::vector<std::string> cols = {"cqi",      "rsrp",      "bler_inst", "mcs",      "reward",
                                                  "next_cqi", "next_rsrp", "next_bler", "direction"};
    return cols;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

bool parse_double(const std::string& s, double& out) {
    try {
        size_t pos = 0;
        out = std::stod(s, &pos);
        return pos == s.size() && std::isfinite(out);
    } catch (...) {
        return false;
    }
}

} // namespace

FqiDataset load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open dataset '" + path + "'");
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw std::runtime_error("dataset '" + path + "': empty file");
    }
    const std::vector<std::string> header = split_csv(line);
    std::vector<int> col_index(dataset_columns().size(), -1);
    std::string missing;
    for (size_t c = 0; c < dataset_columns().size(); ++c) {
        const auto it = std::find(header.begin(), header.end(), dataset_columns()[c]);
        if (it == header.end()) {
            missing += missing.empty() ? dataset_columns()[c] : ", " + dataset_columns()[c];
        } else {
            col_index[c] = static_cast<int>(it - header.begin());
        }
    }
    if (!missing.empty()) {
        throw std::runtime_error("dataset '" + path + "': missing columns: " + missing);
    }

    FqiDataset data;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        const std::vector<std::string> cells = split_csv(line);
        if (cells.size() < header.size()) {
            throw std::runtime_error("dataset '" + path + "': wrong cell count at line " + std::to_string(line_no));
        }
        auto cell = [&](int c) -> const std::string& { return cells[static_cast<size_t>(col_index[static_cast<size_t>(c)])]; };

        // Missing successor features -> the transition is unusable; drop it.
        if (cell(5).empty() || cell(6).empty() || cell(7).empty()) {
            ++data.dropped_missing_successor;
            continue;
        }

        LoggedSample s;
        double mcs_val = 0.0, dir_val = 0.0;
        const bool ok = parse_double(cell(0), s.cqi) && parse_double(cell(1), s.rsrp_dbm) &&
                        parse_double(cell(2), s.bler_inst) && parse_double(cell(3), mcs_val) &&
                        parse_double(cell(4), s.reward) && parse_double(cell(5), s.next_cqi) &&
                        parse_double(cell(6), s.next_rsrp_dbm) && parse_double(cell(7), s.next_bler) &&
                        parse_double(cell(8), dir_val);
        if (!ok) {
            throw std::runtime_error("dataset '" + path + "': malformed value at line " + std::to_string(line_no));
        }
        s.mcs = static_cast<int>(mcs_val);
        s.direction = static_cast<int>(dir_val);
        if (s.mcs < 0 || s.mcs > 28) {
            throw std::runtime_error("dataset '" + path + "': mcs out of [0,28] at line " + std::to_string(line_no));
        }
        if (s.reward < 0.0) {
            throw std::runtime_error("dataset '" + path + "': negative reward at line " + std::to_string(line_no));
        }
        if (s.bler_inst < 0.0 || s.bler_inst > 1.0) {
            throw std::runtime_error("dataset '" + path + "': bler_inst out of [0,1] at line " + std::to_string(line_no));
        }
        data.samples.push_back(s);
    }
    return data;
}

void save_dataset(const FqiDataset& data, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write dataset '" + path + "'");
    }
    out << "cqi,rsrp,bler_inst,mcs,reward,next_cqi,next_rsrp,next_bler,direction\n";
    char buf[256];
    for (const LoggedSample& s : data.samples) {
        std::snprintf(buf, sizeof(buf), "%.9g,%.9g,%.9g,%d,%.9g,%.9g,%.9g,%.9g,%d\n", s.cqi, s.rsrp_dbm, s.bler_inst,
                      s.mcs, s.reward, s.next_cqi, s.next_rsrp_dbm, s.next_bler, s.direction);
        out << buf;
    }
}

namespace {

Eigen::RowVectorXd q_features(double cqi, double rsrp, double bler, int action) {
    Eigen::RowVectorXd f(4);
    f << cqi, rsrp, bler, static_cast<double>(action);
    return f;
}

} // namespace

double QEnsemble::value(const LoggedSample& s, int action) const {
    return forest.predict(q_features(s.cqi, s.rsrp_dbm, s.bler_inst, action));
}

double QEnsemble::next_value(const LoggedSample& s, int action) const {
    return forest.predict(q_features(s.next_cqi, s.next_rsrp_dbm, s.next_bler, action));
}

int QEnsemble::greedy_action(const LoggedSample& s, int num_actions) const {
    int best = 0;
    double best_q = value(s, 0);
    for (int a = 1; a < num_actions; ++a) {
        const double q = value(s, a);
        if (q > best_q) {
            best_q = q;
            best = a;
        }
    }
    return best;
}

FqiResult fqi_train(const FqiDataset& data, const FqiConfig& cfg) {
    if (data.samples.empty()) {
        throw std::invalid_argument("fqi_train: empty dataset");
    }
    if (!(cfg.gamma >= 0.0 && cfg.gamma < 1.0)) {
        throw std::invalid_argument("fqi_train: gamma must be in [0,1)");
    }
    const int n = static_cast<int>(data.samples.size());
    constexpr int kActions = 29;

    Eigen::MatrixXd x(n, 4);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        const LoggedSample& s = data.samples[static_cast<size_t>(i)];
        x.row(i) = q_features(s.cqi, s.rsrp_dbm, s.bler_inst, s.mcs);
    }

    ForestParams fp;
    fp.tree.max_depth = cfg.max_depth;
    fp.tree.min_leaf = cfg.min_leaf;
    fp.tree.feature_subsample = 2;  // sqrt of 4 features
    fp.num_trees = cfg.trees;
    fp.bootstrap = true;

    FqiResult result;
    result.q.gamma = cfg.gamma;
    std::mt19937_64 rng(cfg.seed);

    for (int iter = 0; iter <= cfg.iterations; ++iter) {
        if (iter == 0) {
            for (int i = 0; i < n; ++i) {
                y(i) = data.samples[static_cast<size_t>(i)].reward;
            }
        } else {
            for (int i = 0; i < n; ++i) {
                const LoggedSample& s = data.samples[static_cast<size_t>(i)];
                double best = result.q.next_value(s, 0);
                for (int a = 1; a < kActions; ++a) {
                    best = std::max(best, result.q.next_value(s, a));
                }
                y(i) = s.reward + cfg.gamma * best;
            }
        }
        result.q.forest.fit(x, y, fp, rng);
        result.q.iterations_done = iter;

        double avg = 0.0;
        for (int i = 0; i < n; ++i) {
            const LoggedSample& s = data.samples[static_cast<size_t>(i)];
            double best = result.q.value(s, 0);
            for (int a = 1; a < kActions; ++a) {
                best = std::max(best, result.q.value(s, a));
            }
            avg += best;
        }
        result.avg_q_curve.push_back(avg / n);
    }
    return result;
}

PolicyHistograms extract_policy(const QEnsemble& q, const FqiDataset& data) {
    if (data.samples.empty()) {
        throw std::invalid_argument("extract_policy: empty dataset");
    }
    PolicyHistograms out;
    for (const LoggedSample& s : data.samples) {
        out.learned[static_cast<size_t>(q.greedy_action(s, 29))] += 1.0;
        out.behavior[static_cast<size_t>(s.mcs)] += 1.0;
    }
    const auto n = static_cast<double>(data.samples.size());
    for (size_t m = 0; m < 29; ++m) {
        out.learned[m] /= n;
        out.behavior[m] /= n;
    }
    out.tv = tv_distance(out.learned, out.behavior);
    return out;
}

FqiDataset synth_dataset(const ChannelScenario& scenario, int slots, std::uint64_t seed) {
    ChannelScenario s = scenario;
    s.num_slots = slots;
    const McsTable& table = McsTable::table1();

    EnvConfig env_cfg;
    env_cfg.k_e = 0.0;
    Predictor predictor(Predictor::Mode::Dcqi, PredictorConfig{}, table, s.num_ues, seed);
    LinkEnv env(env_cfg, table, generate(s, 0), std::move(predictor), seed);

    std::vector<OllaController> olla;
    for (int u = 0; u < s.num_ues; ++u) {
        olla.emplace_back(OllaConfig{}, table, env_cfg.bler);
    }

    // CQI proxy: quantized report mapped onto a 0..15 grid; RSRP proxy is an
    // affine shift of the reported SINR.
    auto pseudo_cqi = [](double report_db) { return std::clamp(std::round((report_db + 10.0) / 3.0), 0.0, 15.0); };
    auto pseudo_rsrp = [](double report_db) { return -110.0 + report_db; };

    FqiDataset data;
    std::vector<double> state = env.reset();
    struct Pending {
        bool valid = false;
        LoggedSample sample;
    };
    std::vector<Pending> pending(static_cast<size_t>(s.num_ues));

    while (!env.done()) {
        std::vector<int> action(static_cast<size_t>(s.num_ues));
        for (int u = 0; u < s.num_ues; ++u) {
            action[static_cast<size_t>(u)] = olla[static_cast<size_t>(u)].select(env.last_report_db(u));
        }
        StepOutput out = env.step(action);
        for (int u = 0; u < s.num_ues; ++u) {
            const UeSlotResult& r = out.result.ue[static_cast<size_t>(u)];
            if (!r.scheduled) {
                continue;
            }
            olla[static_cast<size_t>(u)].update(r.harq == 1 ? Harq::Ack : Harq::Nack);
            const double report = env.last_report_db(u);
            const double cqi = pseudo_cqi(report);
            const double rsrp = pseudo_rsrp(report);
            const double bler_est = env.window_bler(u);

            Pending& p = pending[static_cast<size_t>(u)];
            if (p.valid) {
                p.sample.next_cqi = cqi;
                p.sample.next_rsrp_dbm = rsrp;
                p.sample.next_bler = bler_est;
                data.samples.push_back(p.sample);
            }
            p.valid = true;
            p.sample = LoggedSample{};
            p.sample.cqi = cqi;
            p.sample.rsrp_dbm = rsrp;
            p.sample.bler_inst = bler_est;
            p.sample.mcs = r.mcs;
            p.sample.reward = r.se_achieved;
            p.sample.direction = u % 2;
        }
    }
    return data;
}

} // namespace lasim
