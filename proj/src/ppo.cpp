#include "lasim/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace lasim {

void TrainConfig::validate() const {
    if (discount != 0.0) {
        throw std::invalid_argument("train: discount must be 0 (contextual bandit)");
    }
    if (clip_eps <= 0.0) {
        throw std::invalid_argument("train: clip_eps must be > 0");
    }
    if (rollout_len < 2 || minibatch < 1 || epochs < 1 || hidden < 1) {
        throw std::invalid_argument("train: bad loop sizes");
    }
    if (total_transitions < 1) {
        throw std::invalid_argument("train: total_transitions must be >= 1");
    }
}

void normalize_advantages(Eigen::VectorXd& adv) {
    if (adv.size() < 2) {
        return;
    }
    const double mean = adv.mean();
    adv.array() -= mean;
    const double std = std::sqrt(adv.squaredNorm() / static_cast<double>(adv.size()));
    adv /= (std + 1e-8);
}

namespace {

struct LossTerms {
    double loss = 0.0;
    Eigen::MatrixXd d_logits;  // dLoss/dlogits
    Eigen::VectorXd d_values;  // dLoss/dvalues
};

LossTerms ppo_loss_terms(const PolicyNet& net, const PolicyNet::Eval& eval, const RolloutBatch& batch,
                         const TrainConfig& cfg, bool want_grad) {
    const Eigen::Index n = batch.features.rows();
    const int a = net.num_actions();
    const Eigen::MatrixXd logp_all = log_softmax(eval.logits);
    const Eigen::MatrixXd probs = logp_all.array().exp();

    LossTerms out;
    if (want_grad) {
        out.d_logits = Eigen::MatrixXd::Zero(n, a);
        out.d_values = Eigen::VectorXd::Zero(n);
    }

    double policy_loss = 0.0, value_loss = 0.0, entropy = 0.0;
    const double inv_n = 1.0 / static_cast<double>(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const int act_i = batch.actions(i);
        const double adv = batch.advantages(i);
        const double logp = logp_all(i, act_i);
        const double ratio = std::exp(logp - batch.logp_old(i));
        const double clipped = std::clamp(ratio, 1.0 - cfg.clip_eps, 1.0 + cfg.clip_eps);
        const double surr1 = ratio * adv;
        const double surr2 = clipped * adv;
        policy_loss -= std::min(surr1, surr2) * inv_n;

        const double v_err = eval.values(i) - batch.returns(i);
        value_loss += 0.5 * v_err * v_err * inv_n;

        const double h_i = -(probs.row(i).array() * logp_all.row(i).array()).sum();
        entropy += h_i * inv_n;

        if (want_grad) {
            // d/dlogp of min(surr1, surr2): zero only when the clipped branch
            // is strictly active.
            double g = 0.0;
            if (surr1 <= surr2 || (ratio > 1.0 - cfg.clip_eps && ratio < 1.0 + cfg.clip_eps)) {
                g = ratio * adv;
            }
            for (int j = 0; j < a; ++j) {
                const double indicator = j == act_i ? 1.0 : 0.0;
                double d = -inv_n * g * (indicator - probs(i, j));
                d += cfg.entropy_coef * inv_n * probs(i, j) * (logp_all(i, j) + h_i);
                out.d_logits(i, j) = d;
            }
            out.d_values(i) = cfg.vf_coef * v_err * inv_n;
        }
    }
    out.loss = policy_loss + cfg.vf_coef * value_loss - cfg.entropy_coef * entropy;
    return out;
}

RolloutBatch slice(const RolloutBatch& full, const std::vector<int>& idx, int begin, int end) {
    RolloutBatch b;
    const int n = end - begin;
    b.features.resize(n, full.features.cols());
    b.actions.resize(n);
    b.logp_old.resize(n);
    b.returns.resize(n);
    b.advantages.resize(n);
    for (int i = 0; i < n; ++i) {
        const int src = idx[static_cast<size_t>(begin + i)];
        b.features.row(i) = full.features.row(src);
        b.actions(i) = full.actions(src);
        b.logp_old(i) = full.logp_old(src);
        b.returns(i) = full.returns(src);
        b.advantages(i) = full.advantages(src);
    }
    return b;
}

} // namespace

double ppo_loss(const PolicyNet& net, const RolloutBatch& batch, const TrainConfig& cfg) {
    const PolicyNet::Eval eval = net.forward(batch.features);
    return ppo_loss_terms(net, eval, batch, cfg, false).loss;
}

Eigen::VectorXd ppo_grad(const PolicyNet& net, const RolloutBatch& batch, const TrainConfig& cfg, double* loss_out) {
    const PolicyNet::Eval eval = net.forward(batch.features);
    LossTerms terms = ppo_loss_terms(net, eval, batch, cfg, true);
    if (loss_out != nullptr) {
        *loss_out = terms.loss;
    }
    return net.backward(eval, terms.d_logits, terms.d_values);
}

AdamOptimizer::AdamOptimizer(Eigen::Index size, double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps), m_(Eigen::VectorXd::Zero(size)),
      v_(Eigen::VectorXd::Zero(size)) {}

void AdamOptimizer::step(Eigen::VectorXd& params, const Eigen::VectorXd& grad) {
    ++t_;
    m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
    v_ = beta2_ * v_.array() + (1.0 - beta2_) * grad.array().square();
    const double bias1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bias2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    params.array() -= lr_ * (m_.array() / bias1) / ((v_.array() / bias2).sqrt() + eps_);
}

TrainResult train(const std::function<LinkEnv(int)>& env_factory, const TrainConfig& cfg) {
    cfg.validate();

    LinkEnv env = env_factory(0);
    const int feat_dim = env.config().per_ue_dim();
    const int num_actions = env.table().size();

    PolicyNet net(feat_dim, cfg.hidden, num_actions, cfg.seed ^ 0x9e3779b97f4a7c15ULL);
    AdamOptimizer adam(net.num_params(), cfg.learning_rate);
    std::mt19937_64 rng(cfg.seed);

    // Growing rollout store, flushed through PPO whenever it reaches
    // rollout_len transitions.
    std::vector<Eigen::RowVectorXd> feats;
    std::vector<int> acts;
    std::vector<double> logps, rewards;
    feats.reserve(static_cast<size_t>(cfg.rollout_len));

    auto run_update = [&]() {
        const int n = static_cast<int>(feats.size());
        RolloutBatch full;
        full.features.resize(n, feat_dim);
        full.actions.resize(n);
        full.logp_old.resize(n);
        full.returns.resize(n);
        for (int i = 0; i < n; ++i) {
            full.features.row(i) = feats[static_cast<size_t>(i)];
            full.actions(i) = acts[static_cast<size_t>(i)];
            full.logp_old(i) = logps[static_cast<size_t>(i)];
            full.returns(i) = rewards[static_cast<size_t>(i)];
        }
        // Baseline: value head at collection-time parameters.
        const PolicyNet::Eval eval = net.forward(full.features);
        full.advantages = full.returns - eval.values;
        normalize_advantages(full.advantages);

        std::vector<int> idx(static_cast<size_t>(n));
        std::iota(idx.begin(), idx.end(), 0);
        Eigen::VectorXd params = net.params();
        for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
            std::shuffle(idx.begin(), idx.end(), rng);
            for (int begin = 0; begin < n; begin += cfg.minibatch) {
                const int end = std::min(n, begin + cfg.minibatch);
                const RolloutBatch mb = slice(full, idx, begin, end);
                double loss = 0.0;
                const Eigen::VectorXd grad = ppo_grad(net, mb, cfg, &loss);
                if (!std::isfinite(loss)) {
                    throw std::runtime_error("train: loss diverged (non-finite)");
                }
                adam.step(params, grad);
                net.set_params(params);
            }
        }
        feats.clear();
        acts.clear();
        logps.clear();
        rewards.clear();
    };

    std::vector<double> curve;
    long long collected = 0;
    int episode = 0;
    while (collected < cfg.total_transitions) {
        if (episode > 0) {
            env = env_factory(episode);
        }
        std::vector<double> state = env.reset();
        const int num_ues = env.num_ues();
        double episode_reward = 0.0;
        int episode_slots = 0;

        while (!env.done() && collected < cfg.total_transitions) {
            std::vector<double> logp, value;
            const std::vector<int> action = act(net, state, num_ues, rng, false, &logp, &value);
            StepOutput out = env.step(action);
            episode_reward += out.reward;
            ++episode_slots;

            for (int u = 0; u < num_ues; ++u) {
                const UeSlotResult& r = out.result.ue[static_cast<size_t>(u)];
                if (!r.scheduled) {
                    continue;
                }
                double reward_u = r.se_achieved - (r.harq == 0 ? r.lambda : 0.0);
                if (!cfg.per_ue_reward) {
                    reward_u = out.reward;
                }
                Eigen::RowVectorXd row(feat_dim);
                for (int i = 0; i < feat_dim; ++i) {
                    row(i) = state[static_cast<size_t>(u * feat_dim + i)];
                }
                feats.push_back(std::move(row));
                acts.push_back(action[static_cast<size_t>(u)]);
                logps.push_back(logp[static_cast<size_t>(u)]);
                rewards.push_back(reward_u);
                ++collected;
            }
            state = std::move(out.state);

            if (static_cast<int>(feats.size()) >= cfg.rollout_len) {
                run_update();
            }
        }
        if (episode_slots > 0) {
            curve.push_back(episode_reward / episode_slots);
        }
        ++episode;
    }
    return TrainResult{std::move(net), std::move(curve)};
}

} // namespace lasim
