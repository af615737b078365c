#include "dropout/knn.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace dropout {

KnnModel fit_knn(Eigen::MatrixXd X, Eigen::VectorXd y, int k) {
  if (X.rows() != y.size()) throw std::invalid_argument("knn: rows(X) and len(y) differ");
  if (k < 1 || k % 2 == 0) throw std::invalid_argument("knn: k must be a positive odd integer");
  if (k > X.rows()) throw std::invalid_argument("knn: k exceeds the training size");
  return {std::move(X), std::move(y), k};
}

std::vector<Eigen::Index> nearest_neighbors(const Eigen::MatrixXd& points,
                                            const Eigen::VectorXd& query, Eigen::Index count) {
  if (query.size() != points.cols()) throw std::invalid_argument("knn: feature length mismatch");
  const Eigen::VectorXd dist = (points.rowwise() - query.transpose()).rowwise().squaredNorm();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(points.rows()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  count = std::min(count, points.rows());
  std::partial_sort(order.begin(), order.begin() + count, order.end(),
                    [&](Eigen::Index a, Eigen::Index b) {
                      return dist[a] < dist[b] || (dist[a] == dist[b] && a < b);
                    });
  order.resize(static_cast<std::size_t>(count));
  return order;
}

double knn_predict(const KnnModel& m, const Eigen::VectorXd& x) {
  const auto nn = nearest_neighbors(m.points, x, m.k);
  double positives = 0.0;
  for (auto i : nn) positives += m.labels[i];
  return positives / static_cast<double>(m.k);
}

Eigen::VectorXd knn_predict_all(const KnnModel& m, const Eigen::MatrixXd& X) {
  Eigen::VectorXd out(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) out[i] = knn_predict(m, X.row(i).transpose());
  return out;
}

}  // namespace dropout
