#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dropout/features.hpp"
#include "dropout/records.hpp"
#include "dropout/synth.hpp"

namespace dropout {

inline constexpr const char* kVersion = "0.1.0";

struct Grids {
  std::vector<double> logistic_lambda{1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0};
  std::vector<double> knn_k = odd_range(1, 51);
  std::vector<double> forest_depth{2, 4, 6, 8, 12, 16};
  std::vector<double> timing_lambda{0.0, 1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0};

  static std::vector<double> odd_range(int lo, int hi);
};

struct Seeds {
  std::uint64_t split = 1;
  std::uint64_t cv = 2;
  std::uint64_t sampling = 3;
  std::uint64_t synth = 7;
  std::uint64_t forest = 5;

  void set_all(std::uint64_t seed) { split = cv = sampling = synth = forest = seed; }
};

struct RunConfig {
  std::filesystem::path data_dir;  // empty: <out_dir>/data
  std::filesystem::path out_dir = "run";
  double degree_credits = 180.0;
  ImputationMode imputation = ImputationMode::Regression;
  Grids grids;
  Seeds seeds;
  int forest_trees = 200;
  int cv_folds = 10;
  double test_fraction = 0.30;
  double screen_lambda = 1e-4;
  int gatekeeper_course_min = 100;
  int gatekeeper_course_max = 199;
  // (group name, department code), e.g. ("math", "MATH")
  std::vector<std::pair<std::string, std::string>> gatekeeper_departments = default_gatekeeper_departments();
  std::size_t major_vocab_size = 150;
  ResidencyLabels residency_labels = default_residency_labels();
  SynthConfig synth;

  static std::vector<std::pair<std::string, std::string>> default_gatekeeper_departments();

  [[nodiscard]] std::filesystem::path data_path() const {
    return data_dir.empty() ? out_dir / "data" : data_dir;
  }
  [[nodiscard]] FeatureConfig feature_config() const;
  /// Throws std::invalid_argument on an inconsistent configuration.
  void validate() const;
};

nlohmann::json to_json(const RunConfig& cfg);
/// Missing keys keep their defaults; unknown keys are rejected.
RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& file);

/// A stage input is missing; names the subcommand that produces it.
class PrerequisiteError : public std::runtime_error {
 public:
  PrerequisiteError(std::string stage, std::string prerequisite, std::filesystem::path missing);
  std::string stage;
  std::string prerequisite;
  std::filesystem::path missing;
};

inline constexpr std::string_view kSubcommands[] = {"generate", "label",  "featurize", "train",
                                                    "evaluate", "screen", "timing",    "pipeline"};

/// Runs one stage (or the whole chain for "pipeline"), writing its artifacts,
/// a manifest line and the resolved configuration under cfg.out_dir.
void run_subcommand(std::string_view name, const RunConfig& cfg, std::ostream* log = nullptr);

}  // namespace dropout
