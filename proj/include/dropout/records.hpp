#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dropout/term.hpp"

namespace dropout {

enum class Race : std::uint8_t {
  AfricanAmerican,
  AmericanIndian,
  Asian,
  Caucasian,
  HawaiianPacificIslander,
  OtherUnknown,
};
inline constexpr std::size_t kRaceCount = 6;

enum class Gender : std::uint8_t { Female, Male, OtherUnknown };
inline constexpr std::size_t kGenderCount = 3;

enum class PreviousSchooling : std::uint8_t { Freshman, Transfer2Yr, Transfer4Yr };
inline constexpr std::size_t kSchoolingCount = 3;

inline constexpr std::size_t kResidencySlots = 7;
using ResidencyLabels = std::array<std::string, kResidencySlots>;

/// Residency codes are registrar-specific; these labels are the defaults and
/// can be replaced through configuration.
const ResidencyLabels& default_residency_labels();

std::string_view to_string(Race r);
std::string_view to_string(Gender g);
std::string_view to_string(PreviousSchooling p);
Race parse_race(std::string_view text);
Gender parse_gender(std::string_view text);
PreviousSchooling parse_schooling(std::string_view text);

struct Demographics {
  Race race = Race::OtherUnknown;
  Gender gender = Gender::OtherUnknown;
  bool hispanic = false;
  std::uint8_t residency = 0;  // slot into ResidencyLabels
  int birth_year = 1980;

  friend bool operator==(const Demographics&, const Demographics&) = default;
};

struct EntryInfo {
  PreviousSchooling previous_schooling = PreviousSchooling::Freshman;
  std::optional<int> sat_score;  // [400, 1600]
  std::optional<int> act_score;  // [1, 36]
  double transfer_credits = 0.0;
  std::vector<std::string> first_term_majors;
  bool fig_member = false;

  friend bool operator==(const EntryInfo&, const EntryInfo&) = default;
};

struct TranscriptEntry {
  std::string student_id;
  Term term;
  std::string department;
  int course_number = 0;
  double credits = 0.0;
  std::optional<double> grade;  // absent for non-numeric marks
  std::string mark;             // letter or P/NP when grade is absent
  bool remedial = false;

  /// True when the entry carries a grade or a mark and has positive credit,
  /// i.e. it establishes enrollment in its term.
  [[nodiscard]] bool counts_for_enrollment() const noexcept {
    return credits > 0.0 && (grade.has_value() || !mark.empty());
  }

  friend bool operator==(const TranscriptEntry&, const TranscriptEntry&) = default;
};

/// Canonical transcript order: term, then course number, then department.
bool transcript_order(const TranscriptEntry& a, const TranscriptEntry& b);
void sort_transcript(std::vector<TranscriptEntry>& entries);

struct StudentRecord {
  std::string student_id;
  Demographics demographics;
  EntryInfo entry;
  Term first_term;
  std::vector<TranscriptEntry> transcript;  // canonical order
  std::vector<Term> degree_terms;           // ascending

  /// Entries from the first term only.
  [[nodiscard]] std::vector<TranscriptEntry> first_term_entries() const;

  friend bool operator==(const StudentRecord&, const StudentRecord&) = default;
};

/// Minimum term over enrollment-establishing entries, if any.
std::optional<Term> derive_first_term(const std::vector<TranscriptEntry>& entries);

}  // namespace dropout
