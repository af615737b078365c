#include "dropout/labeling.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "dropout/csv.hpp"
#include "dropout/random.hpp"

namespace dropout {

int window_allowance(double transfer_credits, double degree_credits) {
  if (!(degree_credits > 0.0)) throw std::invalid_argument("degree_credits must be positive");
  const double per_quarter = degree_credits / kNominalDegreeQuarters;
  const auto transfer_quarters =
      static_cast<long long>(std::floor(transfer_credits / per_quarter + 0.5));
  const long long allowance = kCompletionWindowQuarters - transfer_quarters;
  return static_cast<int>(std::clamp<long long>(allowance, 1, kCompletionWindowQuarters));
}

int window_allowance(const StudentRecord& s, double degree_credits) {
  return window_allowance(s.entry.transfer_credits, degree_credits);
}

std::vector<Term> enrollment_terms(const StudentRecord& s) {
  std::vector<Term> terms;
  for (const auto& e : s.transcript) {
    if (e.counts_for_enrollment()) terms.push_back(e.term);
  }
  std::sort(terms.begin(), terms.end());
  terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
  return terms;
}

OutcomeLabel label_outcome(const StudentRecord& s, double degree_credits) {
  OutcomeLabel label;
  label.window_allowance = window_allowance(s, degree_credits);
  label.quarters_enrolled = static_cast<int>(enrollment_terms(s).size());
  for (const auto& d : s.degree_terms) {
    if (quarters_between(s.first_term, d) <= label.window_allowance) label.graduated = true;
  }
  return label;
}

std::size_t LabeledDataset::graduates() const noexcept {
  return static_cast<std::size_t>(std::count_if(
      records.begin(), records.end(), [](const LabeledRecord& r) { return r.label.graduated; }));
}

LabeledDataset label_all(std::span<const StudentRecord> students, double degree_credits) {
  LabeledDataset ds;
  ds.records.reserve(students.size());
  for (const auto& s : students) ds.records.push_back({s, label_outcome(s, degree_credits)});
  return ds;
}

LabeledDataset balance(const LabeledDataset& ds, std::uint64_t seed) {
  std::vector<std::size_t> grads;
  std::vector<std::size_t> ncs;
  for (std::size_t i = 0; i < ds.records.size(); ++i) {
    (ds.records[i].label.graduated ? grads : ncs).push_back(i);
  }
  if (grads.empty() || ncs.empty()) {
    throw std::invalid_argument("balance: both graduates and non-completions are required");
  }
  auto& majority = grads.size() >= ncs.size() ? grads : ncs;
  const auto& minority = grads.size() >= ncs.size() ? ncs : grads;

  // Partial Fisher-Yates: the first |minority| slots are a uniform sample.
  Rng rng(seed);
  for (std::size_t i = 0; i < minority.size(); ++i) {
    std::size_t j = i + rng.index(majority.size() - i);
    std::swap(majority[i], majority[j]);
  }
  std::vector<std::size_t> keep(minority.begin(), minority.end());
  keep.insert(keep.end(), majority.begin(),
              majority.begin() + static_cast<std::ptrdiff_t>(minority.size()));
  std::sort(keep.begin(), keep.end());

  LabeledDataset out;
  out.records.reserve(keep.size());
  for (auto i : keep) out.records.push_back(ds.records[i]);
  out.balanced = true;
  out.sampling_seed = seed;
  return out;
}

LabeledDataset non_completions_only(const LabeledDataset& ds) {
  LabeledDataset out;
  for (const auto& r : ds.records) {
    if (!r.label.graduated) out.records.push_back(r);
  }
  return out;
}

void write_labels(const std::filesystem::path& file, const LabeledDataset& ds) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw DataError(file.string() + ": cannot open for writing");
  CsvWriter csv(out);
  csv.row({"student_id", "graduated", "quarters_enrolled", "window_allowance"});
  for (const auto& r : ds.records) {
    csv.row({r.student.student_id, r.label.graduated ? "1" : "0",
             std::to_string(r.label.quarters_enrolled), std::to_string(r.label.window_allowance)});
  }
  if (!out) throw DataError(file.string() + ": write failed");
}

std::map<std::string, OutcomeLabel> read_labels(const std::filesystem::path& file) {
  static constexpr std::string_view columns[] = {"student_id", "graduated", "quarters_enrolled",
                                                 "window_allowance"};
  const auto table = CsvTable::read(file, columns);
  std::map<std::string, OutcomeLabel> out;
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto row = table.row(i);
    OutcomeLabel label{row.flag("graduated"), row.integer("quarters_enrolled"),
                       row.integer("window_allowance")};
    if (!out.emplace(row.text("student_id"), label).second) {
      row.fail("student_id", "duplicate student id");
    }
  }
  return out;
}

}  // namespace dropout
