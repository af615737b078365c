#include "dropout/records.hpp"

#include <algorithm>
#include <stdexcept>

namespace dropout {

const ResidencyLabels& default_residency_labels() {
  static const ResidencyLabels labels = {
      "resident",         "resident_immigrant", "nonresident", "nonresident_immigrant",
      "student_visa",     "out_of_country",     "unknown",
  };
  return labels;
}

std::string_view to_string(Race r) {
  switch (r) {
    case Race::AfricanAmerican: return "AfricanAmerican";
    case Race::AmericanIndian: return "AmericanIndian";
    case Race::Asian: return "Asian";
    case Race::Caucasian: return "Caucasian";
    case Race::HawaiianPacificIslander: return "HawaiianPacificIslander";
    case Race::OtherUnknown: return "OtherUnknown";
  }
  throw std::invalid_argument("invalid race");
}

std::string_view to_string(Gender g) {
  switch (g) {
    case Gender::Female: return "Female";
    case Gender::Male: return "Male";
    case Gender::OtherUnknown: return "OtherUnknown";
  }
  throw std::invalid_argument("invalid gender");
}

std::string_view to_string(PreviousSchooling p) {
  switch (p) {
    case PreviousSchooling::Freshman: return "Freshman";
    case PreviousSchooling::Transfer2Yr: return "Transfer2Yr";
    case PreviousSchooling::Transfer4Yr: return "Transfer4Yr";
  }
  throw std::invalid_argument("invalid schooling");
}

Race parse_race(std::string_view text) {
  for (std::size_t i = 0; i < kRaceCount; ++i) {
    auto r = static_cast<Race>(i);
    if (to_string(r) == text) return r;
  }
  throw std::invalid_argument("unknown race '" + std::string(text) + "'");
}

Gender parse_gender(std::string_view text) {
  for (std::size_t i = 0; i < kGenderCount; ++i) {
    auto g = static_cast<Gender>(i);
    if (to_string(g) == text) return g;
  }
  throw std::invalid_argument("unknown gender '" + std::string(text) + "'");
}

PreviousSchooling parse_schooling(std::string_view text) {
  for (std::size_t i = 0; i < kSchoolingCount; ++i) {
    auto p = static_cast<PreviousSchooling>(i);
    if (to_string(p) == text) return p;
  }
  throw std::invalid_argument("unknown previous_schooling '" + std::string(text) + "'");
}

bool transcript_order(const TranscriptEntry& a, const TranscriptEntry& b) {
  if (a.term != b.term) return a.term < b.term;
  if (a.course_number != b.course_number) return a.course_number < b.course_number;
  return a.department < b.department;
}

void sort_transcript(std::vector<TranscriptEntry>& entries) {
  std::stable_sort(entries.begin(), entries.end(), transcript_order);
}

std::vector<TranscriptEntry> StudentRecord::first_term_entries() const {
  std::vector<TranscriptEntry> out;
  for (const auto& e : transcript) {
    if (e.term == first_term) out.push_back(e);
  }
  return out;
}

std::optional<Term> derive_first_term(const std::vector<TranscriptEntry>& entries) {
  std::optional<Term> first;
  for (const auto& e : entries) {
    if (!e.counts_for_enrollment()) continue;
    if (!first || e.term < *first) first = e.term;
  }
  return first;
}

}  // namespace dropout
