#include "lasim/cart.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace lasim {

void RegressionTree::fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const TreeParams& params,
                         std::mt19937_64* rng) {
    std::vector<int> rows(static_cast<size_t>(x.rows()));
    std::iota(rows.begin(), rows.end(), 0);
    fit_rows(x, y, std::move(rows), params, rng);
}

void RegressionTree::fit_rows(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::vector<int> rows,
                              const TreeParams& params, std::mt19937_64* rng) {
    if (rows.empty()) {
        throw std::invalid_argument("RegressionTree::fit: empty training set");
    }
    if (params.feature_subsample > 0 && rng == nullptr) {
        throw std::invalid_argument("RegressionTree::fit: feature subsampling requires an rng");
    }
    nodes_.clear();
    num_features_ = static_cast<int>(x.cols());
    build(x, y, rows, 0, static_cast<int>(rows.size()), 0, params, rng);
}

int RegressionTree::build(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::vector<int>& rows, int begin,
                          int end, int depth, const TreeParams& params, std::mt19937_64* rng) {
    const int n = end - begin;
    double sum = 0.0, sum_sq = 0.0;
    for (int i = begin; i < end; ++i) {
        const double v = y(rows[static_cast<size_t>(i)]);
        sum += v;
        sum_sq += v * v;
    }
    const double mean = sum / n;
    const double sse = sum_sq - sum * sum / n;

    const int node_id = static_cast<int>(nodes_.size());
    nodes_.push_back(Node{});
    nodes_[static_cast<size_t>(node_id)].value = mean;

    if (depth >= params.max_depth || n < 2 * params.min_leaf || sse <= 1e-12) {
        return node_id;
    }

    // Candidate features: all, or a random subset without replacement.
    std::vector<int> features(static_cast<size_t>(num_features_));
    std::iota(features.begin(), features.end(), 0);
    int num_candidates = num_features_;
    if (params.feature_subsample > 0 && params.feature_subsample < num_features_) {
        num_candidates = params.feature_subsample;
        for (int i = 0; i < num_candidates; ++i) {
            std::uniform_int_distribution<int> pick(i, num_features_ - 1);
            std::swap(features[static_cast<size_t>(i)], features[static_cast<size_t>(pick(*rng))]);
        }
        std::sort(features.begin(), features.begin() + num_candidates);
    }

    int best_feature = -1;
    double best_threshold = 0.0;
    double best_score = sum * sum / n;  // score = sum_l^2/n_l + sum_r^2/n_r; parent value as baseline
    std::vector<int> sorted(rows.begin() + begin, rows.begin() + end);

    for (int fi = 0; fi < num_candidates; ++fi) {
        const int f = features[static_cast<size_t>(fi)];
        std::sort(sorted.begin(), sorted.end(), [&](int a, int b) {
            const double xa = x(a, f), xb = x(b, f);
            if (xa != xb) return xa < xb;
            return a < b;
        });
        double left_sum = 0.0;
        for (int i = 0; i < n - 1; ++i) {
            left_sum += y(sorted[static_cast<size_t>(i)]);
            const int nl = i + 1, nr = n - nl;
            if (nl < params.min_leaf || nr < params.min_leaf) {
                continue;
            }
            const double xl = x(sorted[static_cast<size_t>(i)], f);
            const double xr = x(sorted[static_cast<size_t>(i + 1)], f);
            if (!(xl < xr)) {
                continue;
            }
            const double right_sum = sum - left_sum;
            const double score = left_sum * left_sum / nl + right_sum * right_sum / nr;
            if (score > best_score + 1e-12) {
                best_score = score;
                best_feature = f;
                best_threshold = 0.5 * (xl + xr);
            }
        }
    }

    if (best_feature < 0) {
        return node_id;
    }

    const auto mid = std::partition(rows.begin() + begin, rows.begin() + end,
                                    [&](int r) { return x(r, best_feature) <= best_threshold; });
    const int split = static_cast<int>(mid - rows.begin());
    if (split == begin || split == end) {
        return node_id;  // numerically degenerate split
    }

    nodes_[static_cast<size_t>(node_id)].feature = best_feature;
    nodes_[static_cast<size_t>(node_id)].threshold = best_threshold;
    const int left = build(x, y, rows, begin, split, depth + 1, params, rng);
    nodes_[static_cast<size_t>(node_id)].left = left;
    const int right = build(x, y, rows, split, end, depth + 1, params, rng);
    nodes_[static_cast<size_t>(node_id)].right = right;
    return node_id;
}

double RegressionTree::predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
    if (nodes_.empty()) {
        throw std::logic_error("RegressionTree::predict called before fit");
    }
    if (x.size() != num_features_) {
        throw std::invalid_argument("RegressionTree::predict: feature dimension mismatch");
    }
    int id = 0;
    while (nodes_[static_cast<size_t>(id)].feature >= 0) {
        const Node& node = nodes_[static_cast<size_t>(id)];
        id = x(node.feature) <= node.threshold ? node.left : node.right;
    }
    return nodes_[static_cast<size_t>(id)].value;
}

int RegressionTree::num_leaves() const {
    int count = 0;
    for (const Node& node : nodes_) {
        if (node.feature < 0) {
            ++count;
        }
    }
    return count;
}

void RandomForest::fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const ForestParams& params,
                       std::mt19937_64& rng) {
    trees_.assign(static_cast<size_t>(params.num_trees), RegressionTree{});
    const int n = static_cast<int>(x.rows());
    for (auto& tree : trees_) {
        if (params.bootstrap) {
            std::vector<int> rows(static_cast<size_t>(n));
            std::uniform_int_distribution<int> pick(0, n - 1);
            for (int& r : rows) {
                r = pick(rng);
            }
            tree.fit_rows(x, y, std::move(rows), params.tree, &rng);
        } else {
            tree.fit(x, y, params.tree, &rng);
        }
    }
}

double RandomForest::predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
    if (trees_.empty()) {
        throw std::logic_error("RandomForest::predict called before fit");
    }
    double sum = 0.0;
    for (const auto& tree : trees_) {
        sum += tree.predict(x);
    }
    return sum / static_cast<double>(trees_.size());
}

} // namespace lasim
