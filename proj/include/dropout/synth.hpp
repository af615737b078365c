#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "dropout/records.hpp"

namespace dropout {

/// Parameters of the synthetic cohort generator.
///
/// Latent logit = logit(dropout_base_rate) + sum of signal_weights[k] * z_k.
/// Recognised signal names:
///   "gpa:<DEPT>"      first-term GPA in DEPT, centred on the department's
///                     nominal mean and scaled by 0.7 grade points (0 when
///                     the student has no graded class there)
///   "prev:<KIND>"     indicator for previous schooling (Transfer2Yr, ...)
///   "entry_year"      entry year rescaled to [-1, 1] over entry_year_range
///   "remedial", "fig" first-term indicators
///   "ability"         the unobserved ability draw (standard normal)
struct SynthConfig {
  int n_students = 5000;
  int n_departments = 12;
  int n_majors = 20;
  int entry_year_first = 1998;
  int entry_year_last = 2006;
  double dropout_base_rate = 0.5;
  std::map<std::string, double> signal_weights = {
      {"gpa:MATH", -1.6}, {"gpa:ENGL", -0.7},        {"gpa:CHEM", -0.6},
      {"gpa:PSYCH", -0.5}, {"prev:Transfer4Yr", 0.5}, {"entry_year", -0.3},
      {"remedial", 0.4},   {"fig", -0.3},
  };
  // dropout timing = clamp(round(a + b * risk + N(0, sd)), 1, 24)
  double timing_intercept = 16.0;
  double timing_slope = -14.0;
  double timing_noise_sd = 5.7;
  double grade_noise_sd = 0.5;
  double degree_credits = 180.0;
  double late_degree_fraction = 0.15;  // share of NCs awarded a degree after the window
  std::uint64_t seed = 7;

  /// Throws std::invalid_argument on out-of-range fields or unknown signals.
  void validate() const;
};

void to_json(nlohmann::json& j, const SynthConfig& cfg);
void from_json(const nlohmann::json& j, SynthConfig& cfg);  // missing keys keep defaults

struct GroundTruth {
  std::string student_id;
  double latent_risk = 0.0;  // dropout probability the label was drawn from
  bool dropout = false;
  std::optional<int> quarters_enrolled;  // present iff dropout

  friend bool operator==(const GroundTruth&, const GroundTruth&) = default;
};

struct Cohort {
  std::vector<StudentRecord> records;
  std::vector<GroundTruth> truth;  // aligned with records
  std::vector<std::string> departments;
};

/// Department codes used by a configuration, most popular first.
std::vector<std::string> cohort_departments(const SynthConfig& cfg);

/// Deterministic in cfg.seed. Each student draws from its own derived stream,
/// and every draw that precedes the label is consumed regardless of the
/// signal weights, so changing a weight changes only risk-dependent values.
Cohort generate_cohort(const SynthConfig& cfg);

inline constexpr const char* kGroundTruthFile = "ground_truth.csv";

/// Writes students/transcripts/degrees plus ground_truth.csv into `dir`.
void write_cohort(std::span<const StudentRecord> records, std::span<const GroundTruth> truth,
                  const std::filesystem::path& dir,
                  const ResidencyLabels& residency_labels = default_residency_labels());

std::vector<GroundTruth> read_ground_truth(const std::filesystem::path& file);

}  // namespace dropout
