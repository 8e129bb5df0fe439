#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace lasim {

/// Two-layer tanh MLP applied independently to each UE's feature slice,
/// producing MCS logits plus a scalar value head off the shared trunk.
/// Parameters live in one flat vector (double precision) so the optimizer,
/// checkpointing and finite-difference checks all see the same layout.
class PolicyNet {
public:
    PolicyNet(int input_dim, int hidden, int num_actions, std::uint64_t seed);

    struct Eval {
        Eigen::MatrixXd x;       // B x F
        Eigen::MatrixXd a1, a2;  // B x H
        Eigen::MatrixXd logits;  // B x A
        Eigen::VectorXd values;  // B
    };

    Eval forward(const Eigen::MatrixXd& x) const;

    /// Backpropagates dL/dlogits and dL/dvalues into a flat gradient.
    Eigen::VectorXd backward(const Eval& eval, const Eigen::MatrixXd& d_logits,
                             const Eigen::VectorXd& d_values) const;

    int input_dim() const { return input_dim_; }
    int hidden() const { return hidden_; }
    int num_actions() const { return num_actions_; }
    Eigen::Index num_params() const { return params_.size(); }
    const Eigen::VectorXd& params() const { return params_; }
    void set_params(const Eigen::VectorXd& p);

    void save(const std::string& path, const std::string& config_tag) const;
    static PolicyNet load(const std::string& path, std::string* config_tag = nullptr);

private:
    struct Views;
    Views views() const;

    int input_dim_, hidden_, num_actions_;
    Eigen::VectorXd params_;
};

/// Row-wise log-softmax.
Eigen::MatrixXd log_softmax(const Eigen::MatrixXd& logits);

/// Applies the shared network to each UE slice of the flat state. Stochastic
/// mode samples from the softmax; deterministic takes the argmax. Optionally
/// returns per-UE log-probabilities of the chosen actions and values.
std::vector<int> act(const PolicyNet& net, const std::vector<double>& state, int num_ues, std::mt19937_64& rng,
                     bool deterministic, std::vector<double>* logp_out = nullptr,
                     std::vector<double>* value_out = nullptr);

} // namespace lasim
