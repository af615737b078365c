#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <variant>

#include <json.hpp>

#include "dropout/evaluation.hpp"
#include "dropout/features.hpp"
#include "dropout/forest.hpp"
#include "dropout/knn.hpp"
#include "dropout/linear.hpp"

namespace dropout {

/// A fitted model bound to the schema it was trained against.
struct StoredModel {
  ModelKind kind = ModelKind::Logistic;
  std::uint64_t schema_hash = 0;
  std::variant<LinearModel, KnnModel, ForestModel> model;
  CvResult cv;
};

/// Scaling a model kind consumes: forests see raw values, the rest z-scores.
Scaling scaling_for(ModelKind kind);

nlohmann::json to_json(const StoredModel& m);
StoredModel stored_model_from_json(const nlohmann::json& j);

void save_model(const std::filesystem::path& file, const StoredModel& m);
StoredModel load_model(const std::filesystem::path& file);

std::string hash_hex(std::uint64_t h);

class SchemaMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Classifier scores (probability of non-completion) or regression values
/// for encoded rows. Throws SchemaMismatch if the schema hash differs.
Eigen::VectorXd predict_scores(const StoredModel& m, const FeatureSchema& schema,
                               const Eigen::MatrixXd& X);

}  // namespace dropout
