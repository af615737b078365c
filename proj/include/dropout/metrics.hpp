#pragma once

#include <vector>

#include <Eigen/Dense>

namespace dropout {

using VectorRef = Eigen::Ref<const Eigen::VectorXd>;

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  double threshold = 0.0;  // predict positive when score >= threshold; +inf at (0, 0)
};

struct RocCurve {
  std::vector<RocPoint> points;  // (0,0) first, (1,1) last
  double auc = 0.0;
};

/// Sweeps every distinct score as a threshold; AUC by the trapezoid rule,
/// which equals the Mann-Whitney statistic with ties counted one half.
/// Throws std::invalid_argument if either class is absent.
RocCurve roc_and_auc(VectorRef scores, VectorRef labels);

/// Fraction of rows where (score >= threshold) matches the 0/1 label.
double accuracy(VectorRef scores, VectorRef labels, double threshold = 0.5);

double rmse(VectorRef predictions, VectorRef targets);

/// RMSE after discarding floor(drop_fraction * n) rows with the largest
/// absolute error.
double trimmed_rmse(VectorRef errors, double drop_fraction);

}  // namespace dropout
