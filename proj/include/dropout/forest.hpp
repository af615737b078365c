#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace dropout {

struct ForestParams {
  int n_trees = 200;
  int max_depth = 8;
  int features_per_split = 0;  // 0 selects ceil(sqrt(d))
};

/// Every node keeps the positive-class frequency of its bootstrap sample, so
/// a tree can be evaluated as if it had been grown to a smaller depth.
struct TreeNode {
  int feature = -1;  // -1 for a leaf
  double threshold = 0.0;  // x[feature] <= threshold goes left
  int left = -1;
  int right = -1;
  double positive_rate = 0.0;
  int depth = 0;
  int samples = 0;

  [[nodiscard]] bool is_leaf() const noexcept { return feature < 0; }
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  [[nodiscard]] double predict(const Eigen::Ref<const Eigen::VectorXd>& x, int depth_limit) const;
  [[nodiscard]] int depth() const;
};

struct ForestModel {
  ForestParams params;
  std::uint64_t seed = 0;
  int n_features = 0;
  std::vector<DecisionTree> trees;
};

int resolved_features_per_split(const ForestParams& params, Eigen::Index n_features);

/// Gini random forest on bootstrap resamples. Each node draws its candidate
/// features from a stream keyed by (seed, tree, node position), which makes
/// a forest grown to depth D, cut at depth d, identical to one grown to d.
/// Split ties go to the lowest feature index, then the lowest threshold.
/// Throws std::invalid_argument on single-class labels or bad parameters.
ForestModel train_forest(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                         const ForestParams& params, std::uint64_t seed);

/// Mean of per-tree leaf frequencies; depth_limit < 0 uses the full trees.
double forest_predict(const ForestModel& m, const Eigen::VectorXd& x, int depth_limit = -1);
Eigen::VectorXd forest_predict_all(const ForestModel& m, const Eigen::MatrixXd& X, int depth_limit = -1);

}  // namespace dropout
