#include "dropout/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "dropout/random.hpp"

namespace dropout {

namespace {

constexpr int kMaxSupportedDepth = 62;  // node keys are heap positions in 64 bits

// Sum over children of n * 2p(1 - p); lower is better.
double weighted_gini(double n, double pos) { return n > 0.0 ? 2.0 * pos * (n - pos) / n : 0.0; }

class TreeGrower {
 public:
  TreeGrower(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, int max_depth, int mtry,
             std::uint64_t tree_seed)
      : X_(X), y_(y), max_depth_(max_depth), mtry_(mtry), seed_(tree_seed) {
    features_.resize(static_cast<std::size_t>(X.cols()));
  }

  DecisionTree grow(std::vector<int> samples) {
    tree_.nodes.clear();
    build(samples, 0, 1);
    return std::move(tree_);
  }

 private:
  int build(std::vector<int>& samples, int depth, std::uint64_t key) {
    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    double pos = 0.0;
    for (int i : samples) pos += y_[i];
    const double n = static_cast<double>(samples.size());
    {
      auto& node = tree_.nodes.back();
      node.positive_rate = pos / n;
      node.depth = depth;
      node.samples = static_cast<int>(samples.size());
    }
    if (depth >= max_depth_ || pos == 0.0 || pos == n) return id;

    Rng rng(derive_seed(seed_, key));
    std::iota(features_.begin(), features_.end(), 0);
    const auto d = features_.size();
    for (std::size_t i = 0; i < static_cast<std::size_t>(mtry_); ++i) {
      std::swap(features_[i], features_[i + rng.index(d - i)]);
    }
    std::vector<int> chosen(features_.begin(), features_.begin() + mtry_);
    std::sort(chosen.begin(), chosen.end());

    int best_feature = -1;
    double best_threshold = 0.0;
    double best_score = std::numeric_limits<double>::infinity();
    for (int f : chosen) {
      scratch_.clear();
      for (int i : samples) scratch_.emplace_back(X_(i, f), y_[i]);
      std::sort(scratch_.begin(), scratch_.end());
      double left_pos = 0.0;
      for (std::size_t i = 0; i + 1 < scratch_.size(); ++i) {
        left_pos += scratch_[i].second;
        const double a = scratch_[i].first;
        const double b = scratch_[i + 1].first;
        if (!(a < b)) continue;
        const double nl = static_cast<double>(i + 1);
        const double score = weighted_gini(nl, left_pos) + weighted_gini(n - nl, pos - left_pos);
        if (score < best_score) {
          double threshold = a + (b - a) / 2.0;
          if (!(threshold < b)) threshold = a;
          best_score = score;
          best_feature = f;
          best_threshold = threshold;
        }
      }
    }
    if (best_feature < 0) return id;

    std::vector<int> left, right;
    for (int i : samples) (X_(i, best_feature) <= best_threshold ? left : right).push_back(i);
    samples.clear();
    samples.shrink_to_fit();
    const int l = build(left, depth + 1, 2 * key);
    const int r = build(right, depth + 1, 2 * key + 1);
    auto& node = tree_.nodes[static_cast<std::size_t>(id)];
    node.feature = best_feature;
    node.threshold = best_threshold;
    node.left = l;
    node.right = r;
    return id;
  }

  const Eigen::MatrixXd& X_;
  const Eigen::VectorXd& y_;
  int max_depth_;
  int mtry_;
  std::uint64_t seed_;
  DecisionTree tree_;
  std::vector<int> features_;
  std::vector<std::pair<double, double>> scratch_;
};

}  // namespace

double DecisionTree::predict(const Eigen::Ref<const Eigen::VectorXd>& x, int depth_limit) const {
  const TreeNode* node = &nodes.front();
  while (!node->is_leaf() && (depth_limit < 0 || node->depth < depth_limit)) {
    node = &nodes[static_cast<std::size_t>(x[node->feature] <= node->threshold ? node->left : node->right)];
  }
  return node->positive_rate;
}

int DecisionTree::depth() const {
  int d = 0;
  for (const auto& n : nodes) d = std::max(d, n.depth);
  return d;
}

int resolved_features_per_split(const ForestParams& params, Eigen::Index n_features) {
  if (params.features_per_split > 0) {
    return static_cast<int>(std::min<Eigen::Index>(params.features_per_split, n_features));
  }
  return static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n_features))));
}

ForestModel train_forest(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                         const ForestParams& params, std::uint64_t seed) {
  if (X.rows() != y.size()) throw std::invalid_argument("forest: rows(X) and len(y) differ");
  if (X.rows() < 2 || X.cols() < 1) throw std::invalid_argument("forest: need >= 2 rows and >= 1 feature");
  if (params.n_trees < 1) throw std::invalid_argument("forest: n_trees must be positive");
  if (params.max_depth < 1 || params.max_depth > kMaxSupportedDepth) {
    throw std::invalid_argument("forest: max_depth must be in [1, 62]");
  }
  if (!X.allFinite()) throw std::invalid_argument("forest: non-finite training data");
  bool pos = false, neg = false;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y[i] == 1.0) pos = true;
    else if (y[i] == 0.0) neg = true;
    else throw std::invalid_argument("forest: labels must be 0 or 1");
  }
  if (!pos || !neg) throw std::invalid_argument("forest: both classes are required");

  ForestModel m;
  m.params = params;
  m.params.features_per_split = resolved_features_per_split(params, X.cols());
  m.seed = seed;
  m.n_features = static_cast<int>(X.cols());
  m.trees.reserve(static_cast<std::size_t>(params.n_trees));
  const auto n = static_cast<std::size_t>(X.rows());
  for (int t = 0; t < params.n_trees; ++t) {
    const std::uint64_t tree_seed = derive_seed(seed, static_cast<std::uint64_t>(t));
    Rng rng(tree_seed);
    std::vector<int> bootstrap(n);
    for (auto& i : bootstrap) i = static_cast<int>(rng.index(n));
    TreeGrower grower(X, y, params.max_depth, m.params.features_per_split, tree_seed);
    m.trees.push_back(grower.grow(std::move(bootstrap)));
  }
  return m;
}

double forest_predict(const ForestModel& m, const Eigen::VectorXd& x, int depth_limit) {
  if (x.size() != m.n_features) throw std::invalid_argument("forest: feature length mismatch");
  double total = 0.0;
  for (const auto& t : m.trees) total += t.predict(x, depth_limit);
  return total / static_cast<double>(m.trees.size());
}

Eigen::VectorXd forest_predict_all(const ForestModel& m, const Eigen::MatrixXd& X, int depth_limit) {
  Eigen::VectorXd out(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) out[i] = forest_predict(m, X.row(i).transpose(), depth_limit);
  return out;
}

}  // namespace dropout
