#pragma once

// Reference implementations used only by tests. They are deliberately
// naive and share no code with the library.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace oracles {

/// P(score_pos > score_neg) + 0.5 P(equal), by enumerating every pair.
inline double mann_whitney(const std::vector<double>& scores, const std::vector<int>& labels) {
  long double wins = 0;
  long long pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      ++pairs;
      if (scores[i] > scores[j]) wins += 1;
      else if (scores[i] == scores[j]) wins += 0.5L;
    }
  }
  return static_cast<double>(wins / pairs);
}

/// Central finite differences of f at theta.
inline Eigen::VectorXd finite_difference(const std::function<double(const Eigen::VectorXd&)>& f,
                                         const Eigen::VectorXd& theta, double h) {
  Eigen::VectorXd g(theta.size());
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    Eigen::VectorXd up = theta, down = theta;
    up[i] += h;
    down[i] -= h;
    g[i] = (f(up) - f(down)) / (2 * h);
  }
  return g;
}

/// Direct evaluation of mean log-loss + (lambda/2)||w||^2, written out
/// term by term from the definition.
inline double logistic_loss(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                            const Eigen::VectorXd& w, double b, double lambda) {
  double total = 0;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    double z = b;
    for (Eigen::Index j = 0; j < X.cols(); ++j) z += X(i, j) * w[j];
    const double p = 1.0 / (1.0 + std::exp(-z));
    total += -(y[i] * std::log(p) + (1 - y[i]) * std::log(1 - p));
  }
  double penalty = 0;
  for (Eigen::Index j = 0; j < w.size(); ++j) penalty += w[j] * w[j];
  return total / X.rows() + lambda / 2 * penalty;
}

/// Ridge with an unpenalised intercept via the centred normal equations
/// (Xc'Xc + n lambda I) w = Xc'yc, b = mean(y) - mean(X) w.
inline std::pair<Eigen::VectorXd, double> ridge_normal_equations(const Eigen::MatrixXd& X,
                                                                 const Eigen::VectorXd& y,
                                                                 double lambda) {
  const auto n = static_cast<double>(X.rows());
  const Eigen::RowVectorXd xbar = X.colwise().mean();
  const double ybar = y.mean();
  const Eigen::MatrixXd Xc = X.rowwise() - xbar;
  const Eigen::VectorXd yc = y.array() - ybar;
  Eigen::MatrixXd A = Xc.transpose() * Xc;
  A.diagonal().array() += n * lambda;
  const Eigen::VectorXd w = A.fullPivLu().solve(Xc.transpose() * yc);
  return {w, ybar - xbar.dot(w)};
}

/// kNN vote computed from a fully sorted list of every distance.
inline double knn_vote(const Eigen::MatrixXd& points, const Eigen::VectorXd& labels,
                       const Eigen::VectorXd& query, int k) {
  std::vector<std::pair<long double, Eigen::Index>> d;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    long double s = 0;
    for (Eigen::Index j = 0; j < points.cols(); ++j) {
      const long double diff = points(i, j) - query[j];
      s += diff * diff;
    }
    d.emplace_back(s, i);
  }
  std::sort(d.begin(), d.end());
  double pos = 0;
  for (int i = 0; i < k; ++i) pos += labels[d[static_cast<std::size_t>(i)].second];
  return pos / k;
}

/// Best training accuracy over every axis-aligned stump (any feature, any
/// cut between distinct values, either labelling of the two sides).
inline double best_stump_accuracy(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  const auto n = X.rows();
  double best = 0;
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    std::vector<double> values(X.col(j).data(), X.col(j).data() + n);
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    std::vector<double> cuts{values.front() - 1};
    for (std::size_t v = 0; v + 1 < values.size(); ++v) cuts.push_back((values[v] + values[v + 1]) / 2);
    for (double cut : cuts) {
      for (int left_label = 0; left_label < 2; ++left_label) {
        for (int right_label = 0; right_label < 2; ++right_label) {
          int correct = 0;
          for (Eigen::Index i = 0; i < n; ++i) {
            const int pred = X(i, j) <= cut ? left_label : right_label;
            correct += pred == static_cast<int>(y[i]);
          }
          best = std::max(best, static_cast<double>(correct) / n);
        }
      }
    }
  }
  return best;
}

}  // namespace oracles
