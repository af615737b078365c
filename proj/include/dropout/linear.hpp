#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

namespace dropout {

/// Numerically stable logistic function.
template <typename Scalar>
Scalar sigmoid(Scalar z) {
  if (z >= Scalar(0)) return Scalar(1) / (Scalar(1) + std::exp(-z));
  const Scalar e = std::exp(z);
  return e / (Scalar(1) + e);
}

/// log(1 + exp(z)) without overflow.
template <typename Scalar>
Scalar softplus(Scalar z) {
  return std::max(z, Scalar(0)) + std::log1p(std::exp(-std::abs(z)));
}

/// Mean log-loss plus (lambda / 2) * ||w||^2, given the linear predictor z = Xw + b.
template <typename DerivedZ, typename DerivedY, typename DerivedW>
typename DerivedZ::Scalar logistic_objective_at(const Eigen::MatrixBase<DerivedZ>& z,
                                                const Eigen::MatrixBase<DerivedY>& y,
                                                const Eigen::MatrixBase<DerivedW>& w,
                                                typename DerivedZ::Scalar lambda) {
  using Scalar = typename DerivedZ::Scalar;
  Scalar total(0);
  for (Eigen::Index i = 0; i < z.size(); ++i) total += softplus(z[i]) - y[i] * z[i];
  return total / static_cast<Scalar>(z.size()) + lambda / Scalar(2) * w.squaredNorm();
}

/// Gradient of logistic_objective_at with respect to (w, b).
template <typename DerivedX, typename DerivedZ, typename DerivedY, typename DerivedW,
          typename DerivedG>
void logistic_gradient_at(const Eigen::MatrixBase<DerivedX>& X, const Eigen::MatrixBase<DerivedZ>& z,
                          const Eigen::MatrixBase<DerivedY>& y, const Eigen::MatrixBase<DerivedW>& w,
                          typename DerivedX::Scalar lambda, Eigen::MatrixBase<DerivedG>& grad_w,
                          typename DerivedX::Scalar& grad_b) {
  using Scalar = typename DerivedX::Scalar;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> r(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) r[i] = sigmoid(z[i]) - y[i];
  const auto n = static_cast<Scalar>(X.rows());
  grad_w.noalias() = X.transpose() * r / n;
  grad_w += lambda * w;
  grad_b = r.sum() / n;
}

/// Mean squared error plus lambda * ||w||^2, given z = Xw + b.
template <typename DerivedZ, typename DerivedY, typename DerivedW>
typename DerivedZ::Scalar ridge_objective_at(const Eigen::MatrixBase<DerivedZ>& z,
                                             const Eigen::MatrixBase<DerivedY>& y,
                                             const Eigen::MatrixBase<DerivedW>& w,
                                             typename DerivedZ::Scalar lambda) {
  using Scalar = typename DerivedZ::Scalar;
  return (z - y).squaredNorm() / static_cast<Scalar>(z.size()) + lambda * w.squaredNorm();
}

template <typename DerivedX, typename DerivedZ, typename DerivedY, typename DerivedW,
          typename DerivedG>
void ridge_gradient_at(const Eigen::MatrixBase<DerivedX>& X, const Eigen::MatrixBase<DerivedZ>& z,
                       const Eigen::MatrixBase<DerivedY>& y, const Eigen::MatrixBase<DerivedW>& w,
                       typename DerivedX::Scalar lambda, Eigen::MatrixBase<DerivedG>& grad_w,
                       typename DerivedX::Scalar& grad_b) {
  using Scalar = typename DerivedX::Scalar;
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> r = z - y;
  const auto n = static_cast<Scalar>(X.rows());
  grad_w.noalias() = Scalar(2) / n * (X.transpose() * r);
  grad_w += Scalar(2) * lambda * w;
  grad_b = Scalar(2) * r.sum() / n;
}

template <typename DerivedX, typename DerivedW>
Eigen::Matrix<typename DerivedX::Scalar, Eigen::Dynamic, 1> linear_predictor(
    const Eigen::MatrixBase<DerivedX>& X, const Eigen::MatrixBase<DerivedW>& w,
    typename DerivedX::Scalar b) {
  return (X * w).array() + b;
}

template <typename DerivedX, typename DerivedY, typename DerivedW>
typename DerivedX::Scalar logistic_objective(const Eigen::MatrixBase<DerivedX>& X,
                                             const Eigen::MatrixBase<DerivedY>& y,
                                             const Eigen::MatrixBase<DerivedW>& w,
                                             typename DerivedX::Scalar b,
                                             typename DerivedX::Scalar lambda) {
  return logistic_objective_at(linear_predictor(X, w, b), y, w, lambda);
}

template <typename DerivedX, typename DerivedY, typename DerivedW, typename DerivedG>
void logistic_gradient(const Eigen::MatrixBase<DerivedX>& X, const Eigen::MatrixBase<DerivedY>& y,
                       const Eigen::MatrixBase<DerivedW>& w, typename DerivedX::Scalar b,
                       typename DerivedX::Scalar lambda, Eigen::MatrixBase<DerivedG>& grad_w,
                       typename DerivedX::Scalar& grad_b) {
  logistic_gradient_at(X, linear_predictor(X, w, b), y, w, lambda, grad_w, grad_b);
}

template <typename DerivedX, typename DerivedY, typename DerivedW>
typename DerivedX::Scalar ridge_objective(const Eigen::MatrixBase<DerivedX>& X,
                                          const Eigen::MatrixBase<DerivedY>& y,
                                          const Eigen::MatrixBase<DerivedW>& w,
                                          typename DerivedX::Scalar b,
                                          typename DerivedX::Scalar lambda) {
  return ridge_objective_at(linear_predictor(X, w, b), y, w, lambda);
}

template <typename DerivedX, typename DerivedY, typename DerivedW, typename DerivedG>
void ridge_gradient(const Eigen::MatrixBase<DerivedX>& X, const Eigen::MatrixBase<DerivedY>& y,
                    const Eigen::MatrixBase<DerivedW>& w, typename DerivedX::Scalar b,
                    typename DerivedX::Scalar lambda, Eigen::MatrixBase<DerivedG>& grad_w,
                    typename DerivedX::Scalar& grad_b) {
  ridge_gradient_at(X, linear_predictor(X, w, b), y, w, lambda, grad_w, grad_b);
}

enum class LinearTask { Classification, Regression };

struct LinearModel {
  Eigen::VectorXd weights;
  double intercept = 0.0;
  double lambda = 0.0;
  LinearTask task = LinearTask::Classification;
};

struct DescentOptions {
  double tolerance = 1e-6;  // on the gradient infinity-norm
  int max_iterations = 10000;
  bool record_objective = false;
};

struct DescentTrace {
  int iterations = 0;
  bool converged = false;
  double gradient_norm = 0.0;
  std::vector<double> objective;  // one entry per accepted iterate, when recorded
};

/// Batch gradient descent from zero with a backtracking (Armijo) line search,
/// diagonally preconditioned by per-coordinate curvature bounds. Each trial
/// step starts from the Barzilai-Borwein estimate of the previous pair of
/// iterates. Throws std::invalid_argument on single-class labels,
/// non-finite inputs or mismatched shapes.
LinearModel train_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda,
                           const DescentOptions& opts = {}, DescentTrace* trace = nullptr);

/// Same solver on mean squared error + lambda * ||w||^2.
LinearModel train_ridge(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda,
                        const DescentOptions& opts = {}, DescentTrace* trace = nullptr);

/// sigmoid(w.x + b). Throws std::invalid_argument on length mismatch.
double predict_proba(const LinearModel& m, const Eigen::VectorXd& x);
Eigen::VectorXd predict_proba_all(const LinearModel& m, const Eigen::MatrixXd& X);

/// w.x + b for regression models.
double predict_value(const LinearModel& m, const Eigen::VectorXd& x);
Eigen::VectorXd predict_values(const LinearModel& m, const Eigen::MatrixXd& X);

}  // namespace dropout
