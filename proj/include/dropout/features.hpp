#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "dropout/labeling.hpp"
#include "dropout/records.hpp"

namespace dropout {

enum class ImputationMode { Regression, Mean };
std::string_view to_string(ImputationMode m);
ImputationMode parse_imputation_mode(std::string_view text);

/// One gatekeeper group: entry-level courses of one department.
struct GatekeeperGroup {
  std::string name;  // "math", "chemistry", ...
  std::string department;
  int course_min = 100;
  int course_max = 199;

  friend bool operator==(const GatekeeperGroup&, const GatekeeperGroup&) = default;
};

std::vector<GatekeeperGroup> default_gatekeeper_groups(int course_min = 100, int course_max = 199);

struct FeatureConfig {
  std::size_t major_vocab_size = 150;
  std::vector<GatekeeperGroup> gatekeepers = default_gatekeeper_groups();
  ImputationMode imputation = ImputationMode::Regression;
  ResidencyLabels residency_labels = default_residency_labels();
};

enum class FeatureKind { Dummy, Numeric, DepartmentComponent };

struct FeatureDescriptor {
  std::string name;   // stable machine name, e.g. "dept:MATH:gpa"
  std::string label;  // report label, e.g. "GPA in MATH Classes"
  FeatureKind kind = FeatureKind::Dummy;
  std::string source;     // block the feature belongs to
  bool standardized = false;  // z-scored in Scaling::Standardized encodings
};

/// Summary of a student's first-term classes in one department.
struct DepartmentTuple {
  bool took = false;
  double credits = 0.0;
  int classes = 0;
  std::optional<double> gpa;  // credit-weighted over graded entries; none if no graded entry
};

/// Entries are expected to come from a single (the first) term.
DepartmentTuple department_tuple(std::span<const TranscriptEntry> entries, std::string_view dept);
DepartmentTuple gatekeeper_tuple(std::span<const TranscriptEntry> entries,
                                 const GatekeeperGroup& group);

/// Least-squares imputation of one test score. Stage one regresses on
/// demographic/entry dummies; stage two adds the other score and is used
/// when that score is observed.
struct ScoreImputer {
  double mean = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  Eigen::VectorXd base;        // empty in mean mode
  Eigen::VectorXd with_other;  // empty when stage two could not be fitted
};

struct Imputer {
  ImputationMode mode = ImputationMode::Regression;
  ScoreImputer sat;
  ScoreImputer act;

  [[nodiscard]] double sat_score(const StudentRecord& s) const;
  [[nodiscard]] double act_score(const StudentRecord& s) const;
};

/// Fits on rows with an observed target only. Throws std::invalid_argument
/// if a target is never observed, or observed fewer than twice in regression mode.
Imputer fit_imputer(std::span<const StudentRecord> train, ImputationMode mode);
Imputer fit_imputer(const LabeledDataset& train, ImputationMode mode);

enum class Scaling { Raw, Standardized };

struct FeatureSchema {
  FeatureConfig config;
  std::vector<FeatureDescriptor> features;
  std::vector<std::string> majors;
  std::vector<std::string> departments;
  std::vector<double> department_gpa_fill;  // training mean GPA per department
  std::vector<double> gatekeeper_gpa_fill;
  Imputer imputer;
  Eigen::VectorXd mean;  // training mean of raw encodings (0 for unscaled features)
  Eigen::VectorXd sd;    // training SD of raw encodings (1 for unscaled features)

  [[nodiscard]] std::size_t size() const noexcept { return features.size(); }
  [[nodiscard]] std::size_t index_of(std::string_view name) const;
  /// FNV-1a over the canonical JSON form.
  [[nodiscard]] std::uint64_t hash() const;
};

/// Fits vocabularies, GPA fills, the imputer and standardization statistics
/// on the training rows. Throws std::invalid_argument on an empty set.
FeatureSchema fit_schema(std::span<const StudentRecord> train, const FeatureConfig& config);
FeatureSchema fit_schema(const LabeledDataset& train, const FeatureConfig& config);

Eigen::VectorXd encode(const StudentRecord& s, const FeatureSchema& schema,
                       Scaling scaling = Scaling::Standardized);
Eigen::MatrixXd encode_all(std::span<const StudentRecord> students, const FeatureSchema& schema,
                           Scaling scaling = Scaling::Standardized);
Eigen::MatrixXd encode_all(const LabeledDataset& ds, const FeatureSchema& schema,
                           Scaling scaling = Scaling::Standardized);

/// 1 for non-completion, 0 for graduation.
Eigen::VectorXd dropout_labels(const LabeledDataset& ds);
Eigen::VectorXd quarters_enrolled(const LabeledDataset& ds);

nlohmann::json schema_to_json(const FeatureSchema& schema);
FeatureSchema schema_from_json(const nlohmann::json& j);

std::uint64_t fnv1a(std::string_view bytes);

}  // namespace dropout
