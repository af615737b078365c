#pragma once

#include <vector>

#include <Eigen/Dense>

namespace dropout {

/// Brute-force k-nearest-neighbours over stored (standardized) rows.
struct KnnModel {
  Eigen::MatrixXd points;
  Eigen::VectorXd labels;  // 0/1
  int k = 1;
};

/// Throws std::invalid_argument unless k is positive, odd and <= rows(X).
KnnModel fit_knn(Eigen::MatrixXd X, Eigen::VectorXd y, int k);

/// The `count` training rows closest to `query` in Euclidean distance;
/// equal distances are ordered by lower row index.
std::vector<Eigen::Index> nearest_neighbors(const Eigen::MatrixXd& points,
                                            const Eigen::VectorXd& query, Eigen::Index count);

/// Fraction of positive labels among the k nearest rows.
double knn_predict(const KnnModel& m, const Eigen::VectorXd& x);
Eigen::VectorXd knn_predict_all(const KnnModel& m, const Eigen::MatrixXd& X);

}  // namespace dropout
