#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dropout/records.hpp"

namespace dropout {

/// Six calendar years of quarters after the first enrolled quarter.
inline constexpr int kCompletionWindowQuarters = 24;
/// Quarters in a four-year, no-summer degree; sets the per-quarter credit pace.
inline constexpr int kNominalDegreeQuarters = 12;
inline constexpr double kDefaultDegreeCredits = 180.0;

/// 24 minus transferred credits expressed in quarters of nominal pace,
/// rounded half-up, floored at 1.
int window_allowance(double transfer_credits, double degree_credits);
int window_allowance(const StudentRecord& s, double degree_credits);

/// Distinct terms with at least one enrollment-establishing entry, ascending.
std::vector<Term> enrollment_terms(const StudentRecord& s);

struct OutcomeLabel {
  bool graduated = false;
  int quarters_enrolled = 0;
  int window_allowance = kCompletionWindowQuarters;

  [[nodiscard]] bool non_completion() const noexcept { return !graduated; }
  friend bool operator==(const OutcomeLabel&, const OutcomeLabel&) = default;
};

OutcomeLabel label_outcome(const StudentRecord& s, double degree_credits = kDefaultDegreeCredits);

struct LabeledRecord {
  StudentRecord student;
  OutcomeLabel label;
};

struct LabeledDataset {
  std::vector<LabeledRecord> records;
  bool balanced = false;
  std::optional<std::uint64_t> sampling_seed;

  [[nodiscard]] std::size_t size() const noexcept { return records.size(); }
  [[nodiscard]] std::size_t graduates() const noexcept;
  [[nodiscard]] std::size_t non_completions() const noexcept { return size() - graduates(); }
};

LabeledDataset label_all(std::span<const StudentRecord> students,
                         double degree_credits = kDefaultDegreeCredits);

/// Keeps the minority class whole and samples the majority class uniformly
/// without replacement down to the minority size. Retained records keep
/// their input order. Throws std::invalid_argument if a class is empty.
LabeledDataset balance(const LabeledDataset& ds, std::uint64_t seed);

/// Rows with graduated == false, in input order.
LabeledDataset non_completions_only(const LabeledDataset& ds);

inline constexpr const char* kLabelsFile = "labels.csv";

/// labels.csv: student_id, graduated (0/1), quarters_enrolled, window_allowance.
void write_labels(const std::filesystem::path& file, const LabeledDataset& ds);
std::map<std::string, OutcomeLabel> read_labels(const std::filesystem::path& file);

}  // namespace dropout
