#include "dropout/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace dropout {

RocCurve roc_and_auc(VectorRef scores, VectorRef labels) {
  if (scores.size() != labels.size()) throw std::invalid_argument("roc: length mismatch");
  if (!scores.allFinite()) throw std::invalid_argument("roc: non-finite score");
  double positives = 0.0;
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0.0 && labels[i] != 1.0) throw std::invalid_argument("roc: labels must be 0 or 1");
    positives += labels[i];
  }
  const double negatives = static_cast<double>(labels.size()) - positives;
  if (positives == 0.0 || negatives == 0.0) {
    throw std::invalid_argument("roc: both classes are required");
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(scores.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return scores[a] > scores[b]; });

  RocCurve curve;
  curve.points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
  double tp = 0.0, fp = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    const double threshold = scores[order[i]];
    for (; i < order.size() && scores[order[i]] == threshold; ++i) {
      (labels[order[i]] == 1.0 ? tp : fp) += 1.0;
    }
    const RocPoint next{fp / negatives, tp / positives, threshold};
    const auto& prev = curve.points.back();
    curve.auc += (next.fpr - prev.fpr) * (next.tpr + prev.tpr) / 2.0;
    curve.points.push_back(next);
  }
  return curve;
}

double accuracy(VectorRef scores, VectorRef labels, double threshold) {
  if (scores.size() != labels.size()) throw std::invalid_argument("accuracy: length mismatch");
  if (scores.size() == 0) throw std::invalid_argument("accuracy: empty input");
  Eigen::Index correct = 0;
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    const double predicted = scores[i] >= threshold ? 1.0 : 0.0;
    if (predicted == labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(scores.size());
}

double rmse(VectorRef predictions, VectorRef targets) {
  if (predictions.size() != targets.size()) throw std::invalid_argument("rmse: length mismatch");
  if (predictions.size() == 0) throw std::invalid_argument("rmse: empty input");
  return std::sqrt((predictions - targets).squaredNorm() / static_cast<double>(predictions.size()));
}

double trimmed_rmse(VectorRef errors, double drop_fraction) {
  if (!(drop_fraction >= 0.0 && drop_fraction < 1.0)) {
    throw std::invalid_argument("trimmed_rmse: drop fraction must be in [0, 1)");
  }
  std::vector<double> abs_err(static_cast<std::size_t>(errors.size()));
  for (Eigen::Index i = 0; i < errors.size(); ++i) abs_err[static_cast<std::size_t>(i)] = std::abs(errors[i]);
  std::sort(abs_err.begin(), abs_err.end());
  // The epsilon keeps exact fractions such as 3 * (1/3) from flooring down.
  const auto drop = static_cast<std::size_t>(
      std::floor(drop_fraction * static_cast<double>(abs_err.size()) + 1e-9));
  const std::size_t keep = abs_err.size() - drop;
  if (keep == 0) throw std::invalid_argument("trimmed_rmse: nothing left after trimming");
  double total = 0.0;
  for (std::size_t i = 0; i < keep; ++i) total += abs_err[i] * abs_err[i];
  return std::sqrt(total / static_cast<double>(keep));
}

}  // namespace dropout
