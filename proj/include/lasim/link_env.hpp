#pragma once

#include <cstdint>
#include <deque>
#include <random>
#include <vector>

#include "lasim/channel.hpp"
#include "lasim/mcs_table.hpp"
#include "lasim/phy_abstraction.hpp"
#include "lasim/predictors.hpp"

namespace lasim {

struct SchedulerConfig {
    enum class Mode { All, Pf };
    Mode mode = Mode::All;
    int pf_k = 1;
    double pf_alpha = 0.05;
};

struct EnvConfig {
    int n_cqi = 3;
    int n_harq = 10;
    int n_bler = 20;
    double k_e = 0.0;  // penalty integral gain
    double tau = 0.1;  // BLER target of the penalty controller
    SchedulerConfig scheduler;
    double sinr_norm_lo_db = -10.0;
    double sinr_norm_hi_db = 40.0;
    BlerModel bler;
    FeedbackConfig feedback;

    int per_ue_dim() const { return n_cqi + n_harq + 5; }
    void validate() const;

    static EnvConfig setup_a() { EnvConfig c; c.n_cqi = 3; c.n_harq = 10; return c; }
    static EnvConfig setup_b() { EnvConfig c; c.n_cqi = 1; c.n_harq = 1; return c; }
};

struct UeSlotResult {
    bool scheduled = false;
    int mcs = 0;
    double true_sinr_db = 0.0;
    double est_sinr_db = 0.0;  // the current-slot estimate the action was based on
    int harq = -1;             // -1 unscheduled, 0 NACK, 1 ACK
    double se_achieved = 0.0;
    double lambda = 0.0;       // penalty weight applied to this slot's reward
};

struct SlotResult {
    int slot = 0;
    std::vector<UeSlotResult> ue;
    double reward = 0.0;
};

struct StepOutput {
    std::vector<double> state;
    double reward = 0.0;
    SlotResult result;
    bool done = false;
};

/// Slot-stepped link adaptation environment. Each step schedules a UE subset,
/// applies the per-UE MCS action, samples HARQ outcomes from the PHY
/// abstraction at the true SINR, computes the (optionally BLER-penalized)
/// delivered-SE reward, and advances every feedback window and accumulator.
///
/// Per-UE observation layout (concatenated over UEs):
///   [sinr_post_est, cqi window (newest first), harq window (newest first),
///    last_mcs/28, window_bler, offset_accum/5 clamped, episode_ack_rate]
class LinkEnv {
public:
    LinkEnv(EnvConfig cfg, const McsTable& table, SinrTrace trace, Predictor predictor, std::uint64_t seed);

    std::vector<double> reset();
    StepOutput step(const std::vector<int>& action);

    bool done() const { return slot_ >= trace_.num_slots(); }
    int slot() const { return slot_; }
    int num_ues() const { return trace_.num_ues(); }
    int state_dim() const { return cfg_.per_ue_dim() * num_ues(); }
    int num_slots() const { return trace_.num_slots(); }
    const EnvConfig& config() const { return cfg_; }
    const SinrTrace& trace() const { return trace_; }
    const McsTable& table() const { return *table_; }

    /// Diagnostic: closed-form expected slot reward for fixed true SINRs and
    /// action, excluding the penalty term.
    double expected_reward(const std::vector<double>& true_sinr_db, const std::vector<int>& action) const;

    // Controller-facing views.
    double last_report_db(int ue) const;
    double window_bler(int ue) const;
    double lambda(int ue) const;
    double offset_accum(int ue) const;
    double ack_rate(int ue) const;

private:
    struct UeState {
        std::deque<double> cqi_window;  // normalized, newest first
        std::deque<int> harq_window;    // newest first
        int last_mcs = 0;
        std::deque<int> bler_window;    // 1 = NACK on a scheduled slot
        double offset_accum = 0.0;
        long long acks = 0;
        long long scheduled = 0;
        double penalty_integral = 0.0;
        double lambda = 0.0;
        double pf_avg_se = 1e-3;
        double last_report_db = 0.0;
        double post_est_db = 0.0;
    };

    double normalize(double sinr_db) const;
    std::vector<int> scheduled_subset() const;
    std::vector<double> assemble_state() const;
    void refresh_post_estimates();

    EnvConfig cfg_;
    const McsTable* table_;
    SinrTrace trace_;
    Predictor predictor_;
    std::mt19937_64 rng_;
    std::vector<UeState> ues_;
    int slot_ = 0;
    bool started_ = false;
};

} // namespace lasim
