#include "lasim/predictors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lasim {

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t x = seed ^ (salt * 0x9e3779b97f4a7c15ULL + 0x7f4a7c15ULL);
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

} // namespace

double mcs_sinr_threshold_db(const BlerModel& model, const McsTable& table, int mcs, double tau) {
    return gamma50_db(model, table, mcs) - std::log(1.0 / tau - 1.0) / model.slope_per_db;
}

const std::array<double, 4>& Predictor::oco_eta_grid() {
    static const std::array<double, 4> grid{0.5, 1.0, 2.0, 3.0};
    return grid;
}

const std::array<double, 3>& Predictor::oco_beta_grid() {
    static const std::array<double, 3> grid{0.0, 0.15, 0.3};
    return grid;
}

Predictor::Mode Predictor::parse_mode(const std::string& name) {
    if (name == "oracle") return Mode::Oracle;
    if (name == "dcqi") return Mode::Dcqi;
    if (name == "kf") return Mode::Kf;
    if (name == "dt") return Mode::Dt;
    if (name == "rf") return Mode::Rf;
    if (name == "oco") return Mode::Oco;
    throw std::invalid_argument("unknown predictor mode '" + name + "'");
}

std::string Predictor::mode_name(Mode mode) {
    switch (mode) {
        case Mode::Oracle: return "oracle";
        case Mode::Dcqi: return "dcqi";
        case Mode::Kf: return "kf";
        case Mode::Dt: return "dt";
        case Mode::Rf: return "rf";
        case Mode::Oco: return "oco";
    }
    return "?";
}

Predictor::Predictor(Mode mode, PredictorConfig cfg, const McsTable& table, int num_ues, std::uint64_t seed)
    : mode_(mode), cfg_(std::move(cfg)), table_(&table) {
    if (num_ues < 1) {
        throw std::invalid_argument("Predictor: num_ues must be >= 1");
    }
    ues_.resize(static_cast<size_t>(num_ues));
    for (int u = 0; u < num_ues; ++u) {
        UeState& s = ues_[static_cast<size_t>(u)];
        s.rng.seed(mix_seed(seed, static_cast<std::uint64_t>(u) + 17));
        s.oco_estimates.fill(cfg_.oco.init_estimate_db);
        s.oco_weights.fill(1.0 / kOcoExperts);
    }
}

int Predictor::checked(int ue) const {
    if (ue < 0 || ue >= num_ues()) {
        throw std::out_of_range("Predictor: ue index out of range");
    }
    return ue;
}

Eigen::RowVectorXd Predictor::build_features(const UeState& s) const {
    const int w = cfg_.dtrf.history;
    Eigen::RowVectorXd f(w + 1);
    const double pad = s.report_history.empty() ? cfg_.fallback_midpoint_db : s.report_history.back();
    for (int i = 0; i < w; ++i) {
        f(i) = i < static_cast<int>(s.report_history.size()) ? s.report_history[static_cast<size_t>(i)] : pad;
    }
    f(w) = std::clamp(s.harq_accum, -5.0, 5.0) / 5.0;
    return f;
}

double Predictor::predict(int ue, const FeedbackView& view) const {
    const UeState& s = ues_[static_cast<size_t>(checked(ue))];
    const double fallback = view.has_report ? view.last_report_db : cfg_.fallback_midpoint_db;
    switch (mode_) {
        case Mode::Oracle:
            return view.true_sinr_db;
        case Mode::Dcqi:
            return fallback;
        case Mode::Kf: {
            if (!s.kf_initialized) {
                return fallback;
            }
            return s.kf_mean(0) + s.kf_mean(1);  // one-step-ahead level
        }
        case Mode::Dt:
        case Mode::Rf: {
            if (!s.model_ready) {
                return fallback;
            }
            const Eigen::RowVectorXd f = build_features(s);
            return mode_ == Mode::Dt ? s.dt_model.predict(f) : s.rf_model.predict(f);
        }
        case Mode::Oco: {
            double est = 0.0;
            for (int e = 0; e < kOcoExperts; ++e) {
                est += s.oco_weights[static_cast<size_t>(e)] * s.oco_estimates[static_cast<size_t>(e)];
            }
            return est;
        }
    }
    return fallback;
}

void Predictor::update(int ue, const PredictorObservation& obs) {
    UeState& s = ues_[static_cast<size_t>(checked(ue))];
    switch (mode_) {
        case Mode::Oracle:
        case Mode::Dcqi:
            return;
        case Mode::Kf:
            kf_update(s, obs);
            return;
        case Mode::Dt:
        case Mode::Rf:
            tree_update(s, obs);
            return;
        case Mode::Oco:
            oco_update(s, obs);
            return;
    }
}

void Predictor::kf_update(UeState& s, const PredictorObservation& obs) {
    const KfConfig& kf = cfg_.kf;
    if (obs.has_report) {
        if (!s.kf_initialized) {
            s.kf_mean << obs.reported_sinr_db, 0.0;
            s.kf_cov << kf.init_level_var, 0.0, 0.0, kf.init_vel_var;
            s.kf_initialized = true;
        } else {
            Eigen::Matrix2d f;
            f << 1.0, 1.0, 0.0, 1.0;
            // Discrete white-noise acceleration, dt = 1 slot.
            Eigen::Matrix2d q_base;
            q_base << 0.25, 0.5, 0.5, 1.0;

            const double scale =
                std::clamp(1.0 + s.kf_innov_ewma / std::sqrt(kf.meas_noise_var), 1.0, kf.noise_scale_max);
            s.kf_mean = f * s.kf_mean;
            s.kf_cov = f * s.kf_cov * f.transpose() + (kf.process_noise * scale) * q_base;

            const double innovation = obs.reported_sinr_db - s.kf_mean(0);
            const double innov_var = s.kf_cov(0, 0) + kf.meas_noise_var;
            if (std::abs(innovation) <= kf.gate_sigma * std::sqrt(innov_var)) {
                const Eigen::Vector2d gain = s.kf_cov.col(0) / innov_var;
                s.kf_mean += gain * innovation;
                // Joseph form keeps the covariance symmetric positive-definite.
                Eigen::Matrix2d ikh = Eigen::Matrix2d::Identity();
                ikh(0, 0) -= gain(0);
                ikh(1, 0) -= gain(1);
                s.kf_cov = ikh * s.kf_cov * ikh.transpose() + kf.meas_noise_var * gain * gain.transpose();
                s.kf_innov_ewma = kf.noise_ewma * s.kf_innov_ewma + (1.0 - kf.noise_ewma) * std::abs(innovation);
            }
        }
    }
    if (obs.harq == 0 && s.kf_initialized) {
        s.kf_mean(0) -= kf.nack_bias_db;
    }
}

void Predictor::tree_update(UeState& s, const PredictorObservation& obs) {
    const TreePredictorConfig& tp = cfg_.dtrf;
    if (obs.harq == 1) {
        s.harq_accum += 0.1;
    } else if (obs.harq == 0) {
        s.harq_accum -= 0.9;
    }
    if (!obs.has_report) {
        return;
    }
    if (s.pending_valid) {
        if (static_cast<int>(s.buffer_x.size()) >= tp.buffer_cap) {
            s.buffer_x.erase(s.buffer_x.begin());
            s.buffer_y.erase(s.buffer_y.begin());
        }
        s.buffer_x.push_back(s.pending_features);
        s.buffer_y.push_back(obs.reported_sinr_db);
        ++s.samples_since_fit;
        if (s.samples_since_fit >= tp.retrain_every) {
            s.samples_since_fit = 0;
            const int n = static_cast<int>(s.buffer_x.size());
            Eigen::MatrixXd x(n, tp.history + 1);
            Eigen::VectorXd y(n);
            for (int i = 0; i < n; ++i) {
                x.row(i) = s.buffer_x[static_cast<size_t>(i)];
                y(i) = s.buffer_y[static_cast<size_t>(i)];
            }
            if (mode_ == Mode::Dt) {
                s.dt_model.fit(x, y, tp.tree, &s.rng);
            } else {
                ForestParams fp;
                fp.tree = tp.tree;
                if (tp.rf_feature_subsample) {
                    fp.tree.feature_subsample =
                        std::max(1, static_cast<int>(std::sqrt(static_cast<double>(tp.history + 1))));
                }
                fp.num_trees = tp.rf_trees;
                fp.bootstrap = tp.rf_bootstrap;
                s.rf_model.fit(x, y, fp, s.rng);
            }
            s.model_ready = true;
        }
    }
    s.report_history.push_front(obs.reported_sinr_db);
    while (static_cast<int>(s.report_history.size()) > tp.history) {
        s.report_history.pop_back();
    }
    s.pending_features = build_features(s);
    s.pending_valid = true;
}

void Predictor::oco_update(UeState& s, const PredictorObservation& obs) {
    if (obs.harq != 0 && obs.harq != 1) {
        return;  // HARQ-only scheme
    }
    const OcoConfig& oc = cfg_.oco;
    const bool ack = obs.harq == 1;
    const double theta = mcs_sinr_threshold_db(cfg_.bler, *table_, obs.last_mcs, oc.tau);

    std::array<double, 12> losses{};
    int e = 0;
    for (double eta : oco_eta_grid()) {
        for (double beta : oco_beta_grid()) {
            double& est = s.oco_estimates[static_cast<size_t>(e)];
            if (ack) {
                est += eta * oc.tau * (1.0 + beta);
            } else {
                est -= eta * (1.0 - oc.tau) * (1.0 - beta);
            }
            est = std::clamp(est, oc.est_min_db, oc.est_max_db);
            losses[static_cast<size_t>(e)] =
                ack ? std::max(0.0, theta - est) : std::max(0.0, est - theta);
            ++e;
        }
    }

    double norm = 0.0;
    for (int i = 0; i < kOcoExperts; ++i) {
        s.oco_weights[static_cast<size_t>(i)] *= std::exp(-oc.hedge_rate * losses[static_cast<size_t>(i)]);
        norm += s.oco_weights[static_cast<size_t>(i)];
    }
    for (int i = 0; i < kOcoExperts; ++i) {
        double& w = s.oco_weights[static_cast<size_t>(i)];
        w = (1.0 - oc.share_rate) * (w / norm) + oc.share_rate / kOcoExperts;
    }
}

bool Predictor::tree_trained(int ue) const {
    return ues_[static_cast<size_t>(checked(ue))].model_ready;
}

} // namespace lasim
