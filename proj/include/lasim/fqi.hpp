#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "lasim/cart.hpp"
#include "lasim/channel.hpp"
#include "lasim/mcs_table.hpp"

namespace lasim {

/// One logged transition from a testbed-style measurement CSV.
struct LoggedSample {
    double cqi = 0.0;
    double rsrp_dbm = 0.0;
    double bler_inst = 0.0;
    int mcs = 0;
    double reward = 0.0;
    double next_cqi = 0.0;
    double next_rsrp_dbm = 0.0;
    double next_bler = 0.0;
    int direction = 0;  // 0 = DL, 1 = UL
};

struct FqiDataset {
    std::vector<LoggedSample> samples;
    long long dropped_missing_successor = 0;
};

/// CSV columns: cqi,rsrp,bler_inst,mcs,reward,next_cqi,next_rsrp,next_bler,direction.
/// Rows whose successor cells are empty are dropped (counted); malformed or
/// out-of-range rows raise with their line number.
FqiDataset load_dataset(const std::string& path);
void save_dataset(const FqiDataset& data, const std::string& path);

struct FqiConfig {
    double gamma = 0.5;
    int iterations = 30;  // Bellman iterations after the reward-only fit
    int trees = 50;
    int max_depth = 10;
    int min_leaf = 5;
    std::uint64_t seed = 1;
};

/// Tree-ensemble Q-function over (cqi, rsrp, bler_inst, mcs).
struct QEnsemble {
    RandomForest forest;
    double gamma = 0.5;
    int iterations_done = 0;

    double value(const LoggedSample& s, int action) const;
    double next_value(const LoggedSample& s, int action) const;
    int greedy_action(const LoggedSample& s, int num_actions) const;  // ties -> lowest index
};

struct FqiResult {
    QEnsemble q;
    std::vector<double> avg_q_curve;  // dataset-average max_a Q_i(s,a), one entry per fit
};

FqiResult fqi_train(const FqiDataset& data, const FqiConfig& cfg);

struct PolicyHistograms {
    std::array<double, 29> learned{};
    std::array<double, 29> behavior{};
    double tv = 0.0;
};

PolicyHistograms extract_policy(const QEnsemble& q, const FqiDataset& data);

/// Synthetic logged dataset sampled from the simulator's own per-slot logs:
/// an OLLA controller runs on a generated channel and each scheduled slot is
/// logged with a pseudo-CQI, an RSRP proxy, the sliding-window BLER, the
/// selected MCS, and the delivered SE as the throughput-proxy reward.
FqiDataset synth_dataset(const ChannelScenario& scenario, int slots, std::uint64_t seed);

} // namespace lasim
