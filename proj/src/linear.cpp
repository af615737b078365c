#include "dropout/linear.hpp"

#include <stdexcept>

namespace dropout {

namespace {

constexpr double kArmijo = 1e-4;
constexpr int kMaxBacktracks = 60;

void check_inputs(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda) {
  if (X.rows() != y.size()) throw std::invalid_argument("rows(X) and len(y) differ");
  if (X.rows() < 2) throw std::invalid_argument("need at least two training rows");
  if (!X.allFinite() || !y.allFinite()) throw std::invalid_argument("non-finite training data");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("regularization strength must be finite and >= 0");
  }
}

// Per-coordinate curvature bounds used as a diagonal preconditioner:
// curvature * mean(x_j^2) + penalty for weights, curvature for the intercept.
// Without it the unpenalised intercept crawls when lambda is large.
struct Preconditioner {
  Eigen::VectorXd w;
  double b = 1.0;
};

Preconditioner diagonal_bounds(const Eigen::MatrixXd& X, double curvature, double penalty) {
  Preconditioner d;
  d.w = curvature * X.colwise().squaredNorm().transpose() / static_cast<double>(X.rows());
  d.w.array() += penalty;
  d.w = (d.w.array() > 0.0).select(d.w, 1.0);
  d.b = curvature;
  return d;
}

// Shared descent loop. `value` returns the objective given the linear
// predictor; `grad` consumes that predictor.
template <typename Objective, typename Gradient>
void descend(const Eigen::MatrixXd& X, const Preconditioner& D, const DescentOptions& opts,
             DescentTrace* trace, Objective value, Gradient grad, Eigen::VectorXd& w, double& b) {
  const auto p = X.cols();
  w = Eigen::VectorXd::Zero(p);
  b = 0.0;
  Eigen::VectorXd z = Eigen::VectorXd::Zero(X.rows());
  double f = value(z, w);
  Eigen::VectorXd gw(p);
  double gb = 0.0;
  grad(z, w, gw, gb);

  Eigen::VectorXd w_prev, gw_prev;
  double b_prev = 0.0, gb_prev = 0.0;
  double step = 1.0;
  DescentTrace local;
  if (opts.record_objective) local.objective.push_back(f);

  int it = 0;
  for (; it < opts.max_iterations; ++it) {
    const double gnorm = std::max(gw.lpNorm<Eigen::Infinity>(), std::abs(gb));
    local.gradient_norm = gnorm;
    if (gnorm < opts.tolerance) {
      local.converged = true;
      break;
    }
    if (it > 0) {
      // Barzilai-Borwein step in the preconditioned metric.
      const Eigen::VectorXd sw = w - w_prev;
      const double sb = b - b_prev;
      const double sds = sw.dot(D.w.cwiseProduct(sw)) + D.b * sb * sb;
      const double sy = sw.dot(gw - gw_prev) + sb * (gb - gb_prev);
      step = (sy > 0.0 && std::isfinite(sds / sy)) ? sds / sy : 2.0 * step;
    }
    const Eigen::VectorXd dw = gw.cwiseQuotient(D.w);
    const double db = gb / D.b;
    const double decrease = gw.dot(dw) + gb * db;
    Eigen::VectorXd w_new(p);
    Eigen::VectorXd z_new(X.rows());
    double b_new = 0.0;
    double f_new = f;
    bool accepted = false;
    for (int k = 0; k < kMaxBacktracks; ++k) {
      w_new = w - step * dw;
      b_new = b - step * db;
      z_new = (X * w_new).array() + b_new;
      f_new = value(z_new, w_new);
      if (std::isfinite(f_new) && f_new <= f - kArmijo * step * decrease) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // no representable descent step left

    w_prev = w;
    gw_prev = gw;
    b_prev = b;
    gb_prev = gb;
    w = std::move(w_new);
    b = b_new;
    z = std::move(z_new);
    f = f_new;
    grad(z, w, gw, gb);
    if (opts.record_objective) local.objective.push_back(f);
  }
  local.iterations = it;
  if (trace) *trace = std::move(local);
}

}  // namespace

LinearModel train_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda,
                           const DescentOptions& opts, DescentTrace* trace) {
  check_inputs(X, y, lambda);
  bool pos = false, neg = false;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y[i] == 1.0) pos = true;
    else if (y[i] == 0.0) neg = true;
    else throw std::invalid_argument("logistic labels must be 0 or 1");
  }
  if (!pos || !neg) throw std::invalid_argument("logistic regression needs both classes");

  auto value = [&](const Eigen::VectorXd& z, const Eigen::VectorXd& w) {
    return logistic_objective_at(z, y, w, lambda);
  };
  auto grad = [&](const Eigen::VectorXd& z, const Eigen::VectorXd& w, Eigen::VectorXd& gw, double& gb) {
    logistic_gradient_at(X, z, y, w, lambda, gw, gb);
  };

  LinearModel m;
  m.lambda = lambda;
  m.task = LinearTask::Classification;
  descend(X, diagonal_bounds(X, 0.25, lambda), opts, trace, value, grad, m.weights, m.intercept);
  return m;
}

LinearModel train_ridge(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda,
                        const DescentOptions& opts, DescentTrace* trace) {
  check_inputs(X, y, lambda);
  auto value = [&](const Eigen::VectorXd& z, const Eigen::VectorXd& w) {
    return ridge_objective_at(z, y, w, lambda);
  };
  auto grad = [&](const Eigen::VectorXd& z, const Eigen::VectorXd& w, Eigen::VectorXd& gw, double& gb) {
    ridge_gradient_at(X, z, y, w, lambda, gw, gb);
  };

  LinearModel m;
  m.lambda = lambda;
  m.task = LinearTask::Regression;
  descend(X, diagonal_bounds(X, 2.0, 2.0 * lambda), opts, trace, value, grad, m.weights, m.intercept);
  return m;
}

double predict_proba(const LinearModel& m, const Eigen::VectorXd& x) {
  if (x.size() != m.weights.size()) throw std::invalid_argument("feature length mismatch");
  return sigmoid(m.weights.dot(x) + m.intercept);
}

Eigen::VectorXd predict_proba_all(const LinearModel& m, const Eigen::MatrixXd& X) {
  if (X.cols() != m.weights.size()) throw std::invalid_argument("feature length mismatch");
  Eigen::VectorXd z = (X * m.weights).array() + m.intercept;
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = sigmoid(z[i]);
  return z;
}

double predict_value(const LinearModel& m, const Eigen::VectorXd& x) {
  if (x.size() != m.weights.size()) throw std::invalid_argument("feature length mismatch");
  return m.weights.dot(x) + m.intercept;
}

Eigen::VectorXd predict_values(const LinearModel& m, const Eigen::MatrixXd& X) {
  if (X.cols() != m.weights.size()) throw std::invalid_argument("feature length mismatch");
  return (X * m.weights).array() + m.intercept;
}

}  // namespace dropout
