#include "lasim/policy.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace lasim {

struct PolicyNet::Views {
    Eigen::Map<const Eigen::MatrixXd> w1, w2, wp;
    Eigen::Map<const Eigen::VectorXd> b1, b2, bp, wv;
    double bv;
};

namespace {

struct Layout {
    int f, h, a;
    Eigen::Index w1, b1, w2, b2, wp, bp, wv, bv, total;
    explicit Layout(int input, int hidden, int actions) : f(input), h(hidden), a(actions) {
        w1 = 0;
        b1 = w1 + static_cast<Eigen::Index>(f) * h;
        w2 = b1 + h;
        b2 = w2 + static_cast<Eigen::Index>(h) * h;
        wp = b2 + h;
        bp = wp + static_cast<Eigen::Index>(h) * a;
        wv = bp + a;
        bv = wv + h;
        total = bv + 1;
    }
};

} // namespace

PolicyNet::PolicyNet(int input_dim, int hidden, int num_actions, std::uint64_t seed)
    : input_dim_(input_dim), hidden_(hidden), num_actions_(num_actions) {
    if (input_dim < 1 || hidden < 1 || num_actions < 2) {
        throw std::invalid_argument("PolicyNet: bad dimensions");
    }
    const Layout l(input_dim_, hidden_, num_actions_);
    params_ = Eigen::VectorXd::Zero(l.total);

    // Xavier-uniform trunk; zero heads so the initial policy is exactly
    // uniform and the initial value is zero.
    std::mt19937_64 rng(seed);
    auto fill = [&rng](Eigen::Ref<Eigen::VectorXd> block, int fan_in, int fan_out) {
        const double limit = std::sqrt(6.0 / (fan_in + fan_out));
        std::uniform_real_distribution<double> unif(-limit, limit);
        for (Eigen::Index i = 0; i < block.size(); ++i) {
            block(i) = unif(rng);
        }
    };
    fill(params_.segment(l.w1, static_cast<Eigen::Index>(l.f) * l.h), l.f, l.h);
    fill(params_.segment(l.w2, static_cast<Eigen::Index>(l.h) * l.h), l.h, l.h);
}

PolicyNet::Views PolicyNet::views() const {
    const Layout l(input_dim_, hidden_, num_actions_);
    const double* p = params_.data();
    return Views{
        {p + l.w1, l.f, l.h}, {p + l.w2, l.h, l.h}, {p + l.wp, l.h, l.a},
        {p + l.b1, l.h},      {p + l.b2, l.h},      {p + l.bp, l.a},
        {p + l.wv, l.h},      params_(l.bv),
    };
}

PolicyNet::Eval PolicyNet::forward(const Eigen::MatrixXd& x) const {
    if (x.cols() != input_dim_) {
        throw std::invalid_argument("PolicyNet::forward: feature dimension mismatch");
    }
    const Views v = views();
    Eval e;
    e.x = x;
    e.a1 = ((x * v.w1).rowwise() + v.b1.transpose()).array().tanh();
    e.a2 = ((e.a1 * v.w2).rowwise() + v.b2.transpose()).array().tanh();
    e.logits = (e.a2 * v.wp).rowwise() + v.bp.transpose();
    e.values = (e.a2 * v.wv).array() + v.bv;
    return e;
}

Eigen::VectorXd PolicyNet::backward(const Eval& eval, const Eigen::MatrixXd& d_logits,
                                    const Eigen::VectorXd& d_values) const {
    const Layout l(input_dim_, hidden_, num_actions_);
    const Views v = views();
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(l.total);
    double* g = grad.data();

    Eigen::Map<Eigen::MatrixXd> d_w1(g + l.w1, l.f, l.h);
    Eigen::Map<Eigen::VectorXd> d_b1(g + l.b1, l.h);
    Eigen::Map<Eigen::MatrixXd> d_w2(g + l.w2, l.h, l.h);
    Eigen::Map<Eigen::VectorXd> d_b2(g + l.b2, l.h);
    Eigen::Map<Eigen::MatrixXd> d_wp(g + l.wp, l.h, l.a);
    Eigen::Map<Eigen::VectorXd> d_bp(g + l.bp, l.a);
    Eigen::Map<Eigen::VectorXd> d_wv(g + l.wv, l.h);

    d_wp = eval.a2.transpose() * d_logits;
    d_bp = d_logits.colwise().sum();
    d_wv = eval.a2.transpose() * d_values;
    grad(l.bv) = d_values.sum();

    Eigen::MatrixXd d_a2 = d_logits * v.wp.transpose();
    d_a2.noalias() += d_values * v.wv.transpose();
    const Eigen::MatrixXd d_z2 = d_a2.array() * (1.0 - eval.a2.array().square());
    d_w2 = eval.a1.transpose() * d_z2;
    d_b2 = d_z2.colwise().sum();

    const Eigen::MatrixXd d_a1 = d_z2 * v.w2.transpose();
    const Eigen::MatrixXd d_z1 = d_a1.array() * (1.0 - eval.a1.array().square());
    d_w1 = eval.x.transpose() * d_z1;
    d_b1 = d_z1.colwise().sum();

    return grad;
}

void PolicyNet::set_params(const Eigen::VectorXd& p) {
    if (p.size() != params_.size()) {
        throw std::invalid_argument("PolicyNet::set_params: size mismatch");
    }
    params_ = p;
}

void PolicyNet::save(const std::string& path, const std::string& config_tag) const {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write checkpoint '" + path + "'");
    }
    out << "lasim-policy v1\n";
    out << input_dim_ << ' ' << hidden_ << ' ' << num_actions_ << '\n';
    out << "tag " << (config_tag.empty() ? "-" : config_tag) << '\n';
    out << params_.size() << '\n';
    char buf[40];
    for (Eigen::Index i = 0; i < params_.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g\n", params_(i));
        out << buf;
    }
}

PolicyNet PolicyNet::load(const std::string& path, std::string* config_tag) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open checkpoint '" + path + "'");
    }
    std::string magic, version;
    in >> magic >> version;
    if (magic != "lasim-policy" || version != "v1") {
        throw std::runtime_error("checkpoint '" + path + "': unrecognized format");
    }
    int f = 0, h = 0, a = 0;
    in >> f >> h >> a;
    std::string tag_key, tag;
    in >> tag_key >> tag;
    if (tag_key != "tag") {
        throw std::runtime_error("checkpoint '" + path + "': missing tag line");
    }
    Eigen::Index count = 0;
    in >> count;
    PolicyNet net(f, h, a, 0);
    if (count != net.num_params()) {
        throw std::runtime_error("checkpoint '" + path + "': parameter count mismatch");
    }
    Eigen::VectorXd p(count);
    for (Eigen::Index i = 0; i < count; ++i) {
        if (!(in >> p(i))) {
            throw std::runtime_error("checkpoint '" + path + "': truncated parameters");
        }
    }
    net.set_params(p);
    if (config_tag != nullptr) {
        *config_tag = tag == "-" ? "" : tag;
    }
    return net;
}

Eigen::MatrixXd log_softmax(const Eigen::MatrixXd& logits) {
    Eigen::MatrixXd out(logits.rows(), logits.cols());
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
        const double m = logits.row(i).maxCoeff();
        const double lse = m + std::log((logits.row(i).array() - m).exp().sum());
        out.row(i) = logits.row(i).array() - lse;
    }
    return out;
}

std::vector<int> act(const PolicyNet& net, const std::vector<double>& state, int num_ues, std::mt19937_64& rng,
                     bool deterministic, std::vector<double>* logp_out, std::vector<double>* value_out) {
    const int f = net.input_dim();
    if (num_ues < 1 || static_cast<int>(state.size()) != num_ues * f) {
        throw std::invalid_argument("act: state length must be num_ues * input_dim");
    }
    Eigen::MatrixXd x(num_ues, f);
    for (int u = 0; u < num_ues; ++u) {
        for (int i = 0; i < f; ++i) {
            x(u, i) = state[static_cast<size_t>(u * f + i)];
        }
    }
    const PolicyNet::Eval eval = net.forward(x);
    const Eigen::MatrixXd logp = log_softmax(eval.logits);

    std::vector<int> actions(static_cast<size_t>(num_ues));
    if (logp_out != nullptr) logp_out->resize(static_cast<size_t>(num_ues));
    if (value_out != nullptr) value_out->resize(static_cast<size_t>(num_ues));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int u = 0; u < num_ues; ++u) {
        int choice = 0;
        if (deterministic) {
            logp.row(u).maxCoeff(&choice);
        } else {
            double target = unif(rng);
            double cum = 0.0;
            choice = net.num_actions() - 1;
            for (int j = 0; j < net.num_actions(); ++j) {
                cum += std::exp(logp(u, j));
                if (target <= cum) {
                    choice = j;
                    break;
                }
            }
        }
        actions[static_cast<size_t>(u)] = choice;
        if (logp_out != nullptr) (*logp_out)[static_cast<size_t>(u)] = logp(u, choice);
        if (value_out != nullptr) (*value_out)[static_cast<size_t>(u)] = eval.values(u);
    }
    return actions;
}

} // namespace lasim
