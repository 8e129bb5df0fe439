#include "lasim/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lasim {

OllaController::OllaController(const OllaConfig& cfg, const McsTable& table, const BlerModel& model)
    : cfg_(cfg), table_(&table), model_(model) {
    if (!(cfg.target_bler > 0.0 && cfg.target_bler < 1.0)) {
        throw std::invalid_argument("olla: target_bler must be in (0,1)");
    }
    if (cfg.delta_ack_db <= 0.0) {
        throw std::invalid_argument("olla: delta_ack_db must be > 0");
    }
    delta_nack_db_ = cfg.delta_ack_db * (1.0 - cfg.target_bler) / cfg.target_bler;
}

int OllaController::select(double reported_sinr_db) const {
    const double sinr = reported_sinr_db + offset_db_;
    int best = 0;
    for (int m = 0; m <= table_->max_index(); ++m) {
        if (bler(model_, *table_, m, sinr) <= cfg_.target_bler) {
            best = m;
        }
    }
    return best;
}

void OllaController::update(Harq harq) {
    if (harq == Harq::Ack) {
        offset_db_ += cfg_.delta_ack_db;
    } else {
        offset_db_ -= delta_nack_db_;
    }
    offset_db_ = std::clamp(offset_db_, cfg_.offset_min_db, cfg_.offset_max_db);
}

SaladController::SaladController(const SaladConfig& cfg, const McsTable& table, const BlerModel& model)
    : cfg_(cfg), table_(&table), model_(model), est_db_(cfg.init_est_db), tau_t_(cfg.tau_init) {
    if (cfg.score_window < 1) {
        throw std::invalid_argument("salad: score_window must be >= 1");
    }
}

int SaladController::select(double target) const {
    int best = 0;
    for (int m = 0; m <= table_->max_index(); ++m) {
        if (bler(model_, *table_, m, est_db_) <= target) {
            best = m;
        }
    }
    return best;
}

int SaladController::step(int harq, int last_mcs, std::mt19937_64& rng) {
    (void)last_mcs;
    if (harq == 0 || harq == 1) {
        // Bias score over the window before this outcome; a persistent
        // mismatch scales the effective step.
        double score = 0.0;
        if (!outcomes_.empty()) {
            for (int nack : outcomes_) {
                score += static_cast<double>(nack) - tau_t_;
            }
            score /= static_cast<double>(outcomes_.size());
        }
        const double step_scale = std::abs(score) > cfg_.bias_threshold ? 1.0 + std::abs(score) : 1.0;

        if (harq == 1) {
            est_db_ += step_scale * cfg_.learning_rate * tau_t_;
        } else {
            est_db_ -= step_scale * cfg_.learning_rate * (1.0 - tau_t_);
        }
        est_db_ = std::clamp(est_db_, cfg_.est_min_db, cfg_.est_max_db);

        outcomes_.push_front(harq == 0 ? 1 : 0);
        while (static_cast<int>(outcomes_.size()) > cfg_.score_window) {
            outcomes_.pop_back();
        }

        double window_bler = 0.0;
        for (int nack : outcomes_) {
            window_bler += static_cast<double>(nack);
        }
        window_bler /= static_cast<double>(outcomes_.size());
        tau_t_ = std::clamp(tau_t_ - cfg_.integral_gain * (window_bler - cfg_.bler_target_base), cfg_.tau_min,
                            cfg_.tau_max);
    }

    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const bool probe = unif(rng) < cfg_.probe_prob;
    return select(probe ? cfg_.probe_target : tau_t_);
}

} // namespace lasim
