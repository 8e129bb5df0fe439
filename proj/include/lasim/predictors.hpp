#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <deque>
#include <string>
#include <vector>

#include "lasim/cart.hpp"
#include "lasim/phy_abstraction.hpp"

namespace lasim {

/// Per-slot inputs available to a predictor when asked for the current
/// slot's SINR estimate.
struct FeedbackView {
    double true_sinr_db = 0.0;  // consumed by oracle mode only
    bool has_report = false;
    double last_report_db = 0.0;
};

/// Feedback delivered to a predictor after a slot completes.
struct PredictorObservation {
    bool has_report = false;
    double reported_sinr_db = 0.0;
    int harq = -1;  // -1 none/unscheduled, 0 NACK, 1 ACK
    int last_mcs = 0;
};

struct KfConfig {
    double init_level_var = 25.0;
    double init_vel_var = 1.0;
    double meas_noise_var = 1.0;
    double process_noise = 0.05;       // white-noise-acceleration intensity
    double gate_sigma = 4.0;           // skip update when |innovation| > gate_sigma*sqrt(S)
    double nack_bias_db = 1.0;         // level pulled down on NACK
    double noise_ewma = 0.9;           // smoothing of |innovation| for adaptive process noise
    double noise_scale_max = 10.0;
};

struct TreePredictorConfig {
    int history = 5;        // recent reports used as features
    int buffer_cap = 500;
    int retrain_every = 50;
    TreeParams tree{6, 5, 0};
    int rf_trees = 10;
    bool rf_bootstrap = true;
    bool rf_feature_subsample = true;
};

struct OcoConfig {
    double tau = 0.1;
    double hedge_rate = 0.1;  // exponential-weights learning rate
    double share_rate = 0.0;  // Fixed-Share mixing weight (0 = pure Hedge)
    double init_estimate_db = 15.0;
    double est_min_db = -10.0;
    double est_max_db = 50.0;
};

struct PredictorConfig {
    BlerModel bler;
    double fallback_midpoint_db = 15.0;
    KfConfig kf;
    TreePredictorConfig dtrf;
    OcoConfig oco;
};

/// gamma50-based MCS threshold used by the OCO expert loss: the SINR at
/// which bler(mcs, sinr) equals tau.
double mcs_sinr_threshold_db(const BlerModel& model, const McsTable& table, int mcs, double tau);

/// Current-slot SINR estimator behind a single handle. Modes:
///   oracle - true current-slot SINR (simulation upper bound)
///   dcqi   - most recent report, current-slot estimate effectively removed
///   kf     - constant-velocity Kalman filter on the report series
///   dt/rf  - regression tree(s) on recent reports + HARQ accumulator
///   oco    - mirror-descent experts with Fixed-Share mixing, HARQ-only
class Predictor {
public:
    enum class Mode { Oracle, Dcqi, Kf, Dt, Rf, Oco };

    static Mode parse_mode(const std::string& name);
    static std::string mode_name(Mode mode);

    Predictor(Mode mode, PredictorConfig cfg, const McsTable& table, int num_ues, std::uint64_t seed);

    double predict(int ue, const FeedbackView& view) const;
    void update(int ue, const PredictorObservation& obs);

    Mode mode() const { return mode_; }
    int num_ues() const { return static_cast<int>(ues_.size()); }

    // Introspection used by tests.
    const Eigen::Vector2d& kf_mean(int ue) const { return ues_[checked(ue)].kf_mean; }
    const Eigen::Matrix2d& kf_cov(int ue) const { return ues_[checked(ue)].kf_cov; }
    bool kf_initialized(int ue) const { return ues_[checked(ue)].kf_initialized; }
    const std::array<double, 12>& oco_weights(int ue) const { return ues_[checked(ue)].oco_weights; }
    const std::array<double, 12>& oco_estimates(int ue) const { return ues_[checked(ue)].oco_estimates; }
    bool tree_trained(int ue) const;
    static constexpr int kOcoExperts = 12;
    static const std::array<double, 4>& oco_eta_grid();
    static const std::array<double, 3>& oco_beta_grid();

private:
    struct UeState {
        // kf
        bool kf_initialized = false;
        Eigen::Vector2d kf_mean = Eigen::Vector2d::Zero();
        Eigen::Matrix2d kf_cov = Eigen::Matrix2d::Zero();
        double kf_innov_ewma = 0.0;
        // dt/rf
        std::deque<double> report_history;  // newest first
        double harq_accum = 0.0;
        std::vector<Eigen::RowVectorXd> buffer_x;
        std::vector<double> buffer_y;
        Eigen::RowVectorXd pending_features;
        bool pending_valid = false;
        int samples_since_fit = 0;
        RegressionTree dt_model;
        RandomForest rf_model;
        bool model_ready = false;
        std::mt19937_64 rng;
        // oco
        std::array<double, 12> oco_estimates{};
        std::array<double, 12> oco_weights{};
    };

    int checked(int ue) const;
    Eigen::RowVectorXd build_features(const UeState& s) const;
    void kf_update(UeState& s, const PredictorObservation& obs);
    void tree_update(UeState& s, const PredictorObservation& obs);
    void oco_update(UeState& s, const PredictorObservation& obs);

    Mode mode_;
    PredictorConfig cfg_;
    const McsTable* table_;
    std::vector<UeState> ues_;
};

} // namespace lasim
