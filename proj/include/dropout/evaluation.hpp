#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "dropout/features.hpp"
#include "dropout/labeling.hpp"
#include "dropout/linear.hpp"
#include "dropout/metrics.hpp"

namespace dropout {

// ---------------------------------------------------------------------------
// Partitioning

struct IndexSplit {
  std::vector<std::size_t> train;  // ascending
  std::vector<std::size_t> test;   // ascending
};

/// Uniform random partition; the test side gets floor(n * test_fraction) rows.
/// Throws std::invalid_argument for a fraction outside (0, 1) or n < 10.
IndexSplit split_indices(std::size_t n, double test_fraction, std::uint64_t seed);

struct DatasetSplit {
  LabeledDataset train;
  LabeledDataset test;
  IndexSplit indices;
};

DatasetSplit split(const LabeledDataset& ds, double test_fraction, std::uint64_t seed);

/// Seeded shuffle, then contiguous blocks; the first n % folds blocks get
/// one extra row. Returns validation index sets.
std::vector<std::vector<std::size_t>> cv_folds(std::size_t n, int folds, std::uint64_t seed);

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& X, std::span<const std::size_t> rows);
Eigen::VectorXd take_rows(const Eigen::VectorXd& y, std::span<const std::size_t> rows);

// ---------------------------------------------------------------------------
// Cross-validated tuning

enum class ModelKind { Logistic, Knn, Forest, Ridge };
std::string_view to_string(ModelKind k);
ModelKind parse_model_kind(std::string_view text);

struct CvOptions {
  int folds = 10;
  std::uint64_t seed = 2;
  DescentOptions descent;
  int forest_trees = 200;
  std::uint64_t forest_seed = 5;
};

struct CvResult {
  double best = 0.0;
  std::vector<double> grid;
  std::vector<double> mean_score;  // validation AUC (classifiers) or RMSE (ridge)
};

/// Classifiers maximise mean validation AUC, ridge minimises mean validation
/// RMSE; exact ties go to the smaller grid value.
CvResult cv_tune(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, ModelKind kind,
                 std::span<const double> grid, const CvOptions& opts);

// ---------------------------------------------------------------------------
// Reports

struct ModelEvaluation {
  std::string model;
  std::string hyperparameter_name;
  double hyperparameter = 0.0;
  double accuracy = 0.0;
  double auc = 0.0;
  std::vector<RocPoint> roc;
  CvResult cv;
};

struct EvalReport {
  std::vector<ModelEvaluation> models;
  std::uint64_t split_seed = 0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
};

ModelEvaluation evaluate_scores(std::string model, VectorRef scores, VectorRef labels);

struct ScreenRow {
  std::string feature;  // schema name
  std::string label;    // report label
  double accuracy = 0.0;
  double auc = 0.5;
  bool degenerate = false;  // constant on the training rows
};

/// One univariate logistic regression (plus intercept) per schema column of
/// the standardized matrices; sorted by test AUC, descending, stable.
std::vector<ScreenRow> screen_features(const Eigen::MatrixXd& X_train, const Eigen::VectorXd& y_train,
                                       const Eigen::MatrixXd& X_test, const Eigen::VectorXd& y_test,
                                       const FeatureSchema& schema, double lambda = 1e-4,
                                       const DescentOptions& descent = {});

struct TimingOptions {
  double test_fraction = 0.30;
  std::uint64_t split_seed = 1;
  int folds = 10;
  std::uint64_t cv_seed = 2;
  DescentOptions descent;
};

struct TimingReport {
  double rmse = 0.0;
  double rmse_drop5 = 0.0;
  double rmse_drop10 = 0.0;
  double mean_target = 0.0;  // over every row supplied
  double sd_target = 0.0;
  double lambda = 0.0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  CvResult cv;
};

inline constexpr std::size_t kMinTimingRows = 20;

/// Ridge regression of quarters enrolled: 70/30 split, lambda tuned by k-fold
/// CV on the training side, RMSE and trimmed RMSE on the test side.
TimingReport timing_experiment(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                               std::span<const double> grid, const TimingOptions& opts);

/// As above on non-completion records; the feature schema is fitted on the
/// training side of the split only.
TimingReport timing_experiment(const LabeledDataset& ncs, const FeatureConfig& features,
                               std::span<const double> grid, const TimingOptions& opts);

nlohmann::json to_json(const CvResult& cv);
nlohmann::json to_json(const EvalReport& report);
nlohmann::json to_json(const TimingReport& report);
nlohmann::json to_json(const std::vector<ScreenRow>& rows);

}  // namespace dropout
