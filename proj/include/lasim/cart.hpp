#pragma once

#include <Eigen/Dense>
#include <random>
#include <vector>

namespace lasim {

struct TreeParams {
    int max_depth = 6;
    int min_leaf = 5;
    int feature_subsample = 0;  // 0 = consider all features at each split
};

/// CART regression tree with variance-reduction splits. Deterministic given
/// the data (and rng when feature subsampling is enabled).
class RegressionTree {
public:
    void fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const TreeParams& params,
             std::mt19937_64* rng = nullptr);
    void fit_rows(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::vector<int> rows,
                  const TreeParams& params, std::mt19937_64* rng = nullptr);

    double predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
    bool trained() const { return !nodes_.empty(); }
    int num_leaves() const;
    int num_features() const { return num_features_; }

private:
    struct Node {
        int feature = -1;  // -1 for leaves
        double threshold = 0.0;
        double value = 0.0;
        int left = -1, right = -1;
    };
    std::vector<Node> nodes_;
    int num_features_ = 0;

    int build(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::vector<int>& rows, int begin, int end,
              int depth, const TreeParams& params, std::mt19937_64* rng);
};

struct ForestParams {
    TreeParams tree;
    int num_trees = 10;
    bool bootstrap = true;
};

/// Bagged ensemble of regression trees; prediction is the tree mean.
class RandomForest {
public:
    void fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const ForestParams& params, std::mt19937_64& rng);
    double predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
    bool trained() const { return !trees_.empty(); }
    const std::vector<RegressionTree>& trees() const { return trees_; }

private:
    std::vector<RegressionTree> trees_;
};

} // namespace lasim
