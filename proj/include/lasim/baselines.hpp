#pragma once

#include <deque>
#include <random>

#include "lasim/phy_abstraction.hpp"

namespace lasim {

struct OllaConfig {
    double delta_ack_db = 0.1;
    double target_bler = 0.1;
    double offset_min_db = -15.0;
    double offset_max_db = 15.0;
};

/// Outer-loop link adaptation: per-UE SINR offset driven by ACK/NACK with the
/// step ratio delta_nack/delta_ack = (1-tau)/tau, selecting the highest MCS
/// whose predicted BLER at (report + offset) stays under the target.
class OllaController {
public:
    OllaController(const OllaConfig& cfg, const McsTable& table, const BlerModel& model);

    int select(double reported_sinr_db) const;
    void update(Harq harq);

    double offset_db() const { return offset_db_; }
    double delta_ack_db() const { return cfg_.delta_ack_db; }
    double delta_nack_db() const { return delta_nack_db_; }

private:
    OllaConfig cfg_;
    const McsTable* table_;
    BlerModel model_;
    double delta_nack_db_;
    double offset_db_ = 0.0;
};

struct SaladConfig {
    double learning_rate = 1.2;     // epsilon
    double bias_threshold = 0.25;   // rho
    int score_window = 15;          // T
    double probe_prob = 0.15;
    double probe_target = 0.95;
    double integral_gain = 0.05;    // k_E
    double bler_target_base = 0.1;  // tau the integral loop regulates toward
    double tau_init = 0.1;
    double tau_min = 0.01;
    double tau_max = 0.3;
    double init_est_db = 15.0;
    double est_min_db = -10.0;
    double est_max_db = 50.0;
};

/// Self-adapting link adaptation reconstructed from its described components:
/// recursive ACK/NACK-driven SINR estimate, bias score over a sliding window,
/// integral control of the BLER target, and random aggressive probing.
/// The original scheme's exact update rule is not public; this follows the
/// published hyperparameters and component descriptions.
class SaladController {
public:
    SaladController(const SaladConfig& cfg, const McsTable& table, const BlerModel& model);

    /// Consumes the HARQ outcome of the previous transmission (pass -1 when
    /// there was none) and returns the MCS for the next transmission.
    int step(int harq, int last_mcs, std::mt19937_64& rng);

    double sinr_est_db() const { return est_db_; }
    double bler_target() const { return tau_t_; }

private:
    int select(double target) const;

    SaladConfig cfg_;
    const McsTable* table_;
    BlerModel model_;
    double est_db_;
    double tau_t_;
    std::deque<int> outcomes_;  // 1 = NACK, 0 = ACK, newest front
};

} // namespace lasim
