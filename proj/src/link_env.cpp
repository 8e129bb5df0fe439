#include "lasim/link_env.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace lasim {

void EnvConfig::validate() const {
    if (n_cqi < 1 || n_harq < 1 || n_bler < 1) {
        throw std::invalid_argument("env: window lengths must be >= 1");
    }
    if (k_e < 0.0) {
        throw std::invalid_argument("env: k_e must be >= 0");
    }
    if (!(tau > 0.0 && tau < 1.0)) {
        throw std::invalid_argument("env: tau must be in (0,1)");
    }
    if (!(sinr_norm_lo_db < sinr_norm_hi_db)) {
        throw std::invalid_argument("env: sinr normalization range must have lo < hi");
    }
    feedback.validate();
}

LinkEnv::LinkEnv(EnvConfig cfg, const McsTable& table, SinrTrace trace, Predictor predictor, std::uint64_t seed)
    : cfg_(cfg), table_(&table), trace_(std::move(trace)), predictor_(std::move(predictor)), rng_(seed) {
    cfg_.validate();
    if (trace_.num_ues() < 1 || trace_.num_slots() < 1) {
        throw std::invalid_argument("env: empty trace");
    }
    if (predictor_.num_ues() != trace_.num_ues()) {
        throw std::invalid_argument("env: predictor UE count does not match trace");
    }
    if (cfg_.scheduler.mode == SchedulerConfig::Mode::Pf &&
        (cfg_.scheduler.pf_k < 1 || cfg_.scheduler.pf_k > trace_.num_ues())) {
        throw std::invalid_argument("env: pf_k must be in [1, num_ues]");
    }
}

double LinkEnv::normalize(double sinr_db) const {
    const double t = (sinr_db - cfg_.sinr_norm_lo_db) / (cfg_.sinr_norm_hi_db - cfg_.sinr_norm_lo_db);
    return std::clamp(t, 0.0, 1.0);
}

std::vector<double> LinkEnv::reset() {
    slot_ = 0;
    started_ = true;
    ues_.assign(static_cast<size_t>(num_ues()), UeState{});
    for (int u = 0; u < num_ues(); ++u) {
        UeState& s = ues_[static_cast<size_t>(u)];
        const double report0 = report_effective_sinr(trace_, cfg_.feedback, 0, u);
        s.last_report_db = report0;
        s.cqi_window.assign(static_cast<size_t>(cfg_.n_cqi), normalize(report0));
        s.harq_window.assign(static_cast<size_t>(cfg_.n_harq), -1);
    }
    refresh_post_estimates();
    return assemble_state();
}

void LinkEnv::refresh_post_estimates() {
    const int t = std::min(slot_, trace_.num_slots() - 1);
    for (int u = 0; u < num_ues(); ++u) {
        UeState& s = ues_[static_cast<size_t>(u)];
        FeedbackView view;
        view.true_sinr_db = trace_.sinr_db[static_cast<size_t>(u)][static_cast<size_t>(t)];
        view.has_report = true;
        view.last_report_db = s.last_report_db;
        s.post_est_db = predictor_.predict(u, view);
    }
}

std::vector<double> LinkEnv::assemble_state() const {
    std::vector<double> state;
    state.reserve(static_cast<size_t>(state_dim()));
    for (int u = 0; u < num_ues(); ++u) {
        const UeState& s = ues_[static_cast<size_t>(u)];
        state.push_back(normalize(s.post_est_db));
        for (double v : s.cqi_window) {
            state.push_back(v);
        }
        for (int h : s.harq_window) {
            state.push_back(static_cast<double>(h));
        }
        state.push_back(static_cast<double>(s.last_mcs) / static_cast<double>(table_->max_index()));
        state.push_back(window_bler(u));
        state.push_back(std::clamp(s.offset_accum, -5.0, 5.0) / 5.0);
        state.push_back(s.scheduled > 0 ? static_cast<double>(s.acks) / static_cast<double>(s.scheduled) : 0.0);
    }
    return state;
}

std::vector<int> LinkEnv::scheduled_subset() const {
    std::vector<int> subset;
    if (cfg_.scheduler.mode == SchedulerConfig::Mode::All) {
        subset.resize(static_cast<size_t>(num_ues()));
        std::iota(subset.begin(), subset.end(), 0);
        return subset;
    }
    // PF: rank by instantaneous achievable SE at the last report over the
    // exponentially averaged delivered SE.
    std::vector<std::pair<double, int>> ranked;
    ranked.reserve(static_cast<size_t>(num_ues()));
    for (int u = 0; u < num_ues(); ++u) {
        const UeState& s = ues_[static_cast<size_t>(u)];
        double inst = 0.0;
        for (int m = 0; m <= table_->max_index(); ++m) {
            inst = std::max(inst, table_->se_nom(m) * (1.0 - bler(cfg_.bler, *table_, m, s.last_report_db)));
        }
        ranked.emplace_back(inst / std::max(s.pf_avg_se, 1e-9), u);
    }
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    for (int i = 0; i < cfg_.scheduler.pf_k; ++i) {
        subset.push_back(ranked[static_cast<size_t>(i)].second);
    }
    std::sort(subset.begin(), subset.end());
    return subset;
}

StepOutput LinkEnv::step(const std::vector<int>& action) {
    if (!started_) {
        throw std::logic_error("env: step before reset");
    }
    if (done()) {
        throw std::logic_error("env: episode is finished");
    }
    if (static_cast<int>(action.size()) != num_ues()) {
        throw std::invalid_argument("env: action length must equal num_ues");
    }
    for (int a : action) {
        if (a < 0 || a > table_->max_index()) {
            throw std::out_of_range("env: action " + std::to_string(a) + " outside MCS range");
        }
    }

    const std::vector<int> subset = scheduled_subset();
    std::vector<bool> is_scheduled(static_cast<size_t>(num_ues()), false);
    for (int u : subset) {
        is_scheduled[static_cast<size_t>(u)] = true;
    }

    StepOutput out;
    out.result.slot = slot_;
    out.result.ue.resize(static_cast<size_t>(num_ues()));

    double reward = 0.0;
    for (int u = 0; u < num_ues(); ++u) {
        UeState& s = ues_[static_cast<size_t>(u)];
        UeSlotResult& r = out.result.ue[static_cast<size_t>(u)];
        r.scheduled = is_scheduled[static_cast<size_t>(u)];
        r.true_sinr_db = trace_.sinr_db[static_cast<size_t>(u)][static_cast<size_t>(slot_)];
        r.est_sinr_db = s.post_est_db;
        r.mcs = action[static_cast<size_t>(u)];
        r.lambda = s.lambda;
        if (!r.scheduled) {
            r.harq = -1;
            continue;
        }
        const Harq h = sample_harq(cfg_.bler, *table_, r.mcs, r.true_sinr_db, rng_);
        r.harq = h == Harq::Ack ? 1 : 0;
        if (h == Harq::Ack) {
            r.se_achieved = table_->se_nom(r.mcs);
            reward += r.se_achieved;
        } else {
            reward -= s.lambda;
        }
    }
    out.reward = reward;
    out.result.reward = reward;

    // Advance feedback state. The report that becomes available with the next
    // state is the (delayed, quantized) measurement indexed by this slot.
    for (int u = 0; u < num_ues(); ++u) {
        UeState& s = ues_[static_cast<size_t>(u)];
        const UeSlotResult& r = out.result.ue[static_cast<size_t>(u)];
        const double report = report_effective_sinr(trace_, cfg_.feedback, slot_, u);

        s.cqi_window.push_front(normalize(report));
        s.cqi_window.pop_back();
        s.harq_window.push_front(r.harq);
        s.harq_window.pop_back();
        s.last_report_db = report;

        if (r.scheduled) {
            s.last_mcs = r.mcs;
            s.scheduled += 1;
            const bool nack = r.harq == 0;
            if (nack) {
                s.offset_accum -= 0.9;
            } else {
                s.offset_accum += 0.1;
                s.acks += 1;
            }
            s.bler_window.push_front(nack ? 1 : 0);
            while (static_cast<int>(s.bler_window.size()) > cfg_.n_bler) {
                s.bler_window.pop_back();
            }
            s.penalty_integral += (nack ? 1.0 : 0.0) - cfg_.tau;
            s.lambda = std::max(0.0, cfg_.k_e * s.penalty_integral);
        }

        s.pf_avg_se = (1.0 - cfg_.scheduler.pf_alpha) * s.pf_avg_se + cfg_.scheduler.pf_alpha * r.se_achieved;

        PredictorObservation obs;
        obs.has_report = true;
        obs.reported_sinr_db = report;
        obs.harq = r.harq;
        obs.last_mcs = s.last_mcs;
        predictor_.update(u, obs);
    }

    ++slot_;
    out.done = done();
    refresh_post_estimates();
    out.state = assemble_state();
    return out;
}

double LinkEnv::expected_reward(const std::vector<double>& true_sinr_db, const std::vector<int>& action) const {
    if (true_sinr_db.size() != action.size()) {
        throw std::invalid_argument("expected_reward: mismatched vector lengths");
    }
    double total = 0.0;
    for (size_t u = 0; u < action.size(); ++u) {
        const int m = action[u];
        if (m < 0 || m > table_->max_index()) {
            throw std::out_of_range("expected_reward: action outside MCS range");
        }
        total += table_->se_nom(m) * (1.0 - bler(cfg_.bler, *table_, m, true_sinr_db[u]));
    }
    return total;
}

double LinkEnv::last_report_db(int ue) const { return ues_.at(static_cast<size_t>(ue)).last_report_db; }
double LinkEnv::lambda(int ue) const { return ues_.at(static_cast<size_t>(ue)).lambda; }
double LinkEnv::offset_accum(int ue) const { return ues_.at(static_cast<size_t>(ue)).offset_accum; }

double LinkEnv::ack_rate(int ue) const {
    const UeState& s = ues_.at(static_cast<size_t>(ue));
    return s.scheduled > 0 ? static_cast<double>(s.acks) / static_cast<double>(s.scheduled) : 0.0;
}

double LinkEnv::window_bler(int ue) const {
    const UeState& s = ues_.at(static_cast<size_t>(ue));
    if (s.bler_window.empty()) {
        return 0.0;
    }
    double nacks = 0.0;
    for (int v : s.bler_window) {
        nacks += static_cast<double>(v);
    }
    return nacks / static_cast<double>(s.bler_window.size());
}

} // namespace lasim
