#pragma once

#include <functional>

#include "lasim/link_env.hpp"
#include "lasim/policy.hpp"

namespace lasim {

struct TrainConfig {
    double learning_rate = 3e-4;
    double clip_eps = 0.2;
    double entropy_coef = 0.05;
    double vf_coef = 0.5;
    double discount = 0.0;  // contextual bandit; anything else is rejected
    int hidden = 64;
    int rollout_len = 2048;
    int minibatch = 256;
    int epochs = 10;
    long long total_transitions = 90000;
    std::uint64_t seed = 0;
    bool per_ue_reward = true;  // credit each UE its own reward term instead of the slot sum

    void validate() const;
};

/// Per-UE transitions of one rollout; with discount 0 the return of a
/// transition is exactly its immediate reward.
struct RolloutBatch {
    Eigen::MatrixXd features;   // N x F
    Eigen::VectorXi actions;    // N
    Eigen::VectorXd logp_old;   // N
    Eigen::VectorXd returns;    // N (immediate rewards)
    Eigen::VectorXd advantages; // N (filled by normalization step)
};

/// In-place per-batch advantage normalization to zero mean / unit std.
void normalize_advantages(Eigen::VectorXd& adv);

/// Clipped-surrogate loss (minimized): -E[min(r*A, clip(r)*A)]
/// + vf_coef * 0.5*E[(V-R)^2] - entropy_coef * E[H].
double ppo_loss(const PolicyNet& net, const RolloutBatch& batch, const TrainConfig& cfg);

/// Analytic gradient of ppo_loss w.r.t. the flat parameter vector.
Eigen::VectorXd ppo_grad(const PolicyNet& net, const RolloutBatch& batch, const TrainConfig& cfg,
                         double* loss_out = nullptr);

class AdamOptimizer {
public:
    AdamOptimizer(Eigen::Index size, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);
    void step(Eigen::VectorXd& params, const Eigen::VectorXd& grad);

private:
    double lr_, beta1_, beta2_, eps_;
    long long t_ = 0;
    Eigen::VectorXd m_, v_;
};

struct TrainResult {
    PolicyNet net;
    std::vector<double> episode_mean_reward;  // env scalar reward averaged per episode
};

/// Online training loop: episodes come from env_factory(episode_index), each
/// drawing a fresh channel realization; PPO updates run every rollout_len
/// collected UE-transitions. Throws if the loss turns non-finite.
TrainResult train(const std::function<LinkEnv(int)>& env_factory, const TrainConfig& cfg);

} // namespace lasim
