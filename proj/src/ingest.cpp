#include "dropout/ingest.hpp"

#include <array>
#include <fstream>
#include <string_view>
#include <unordered_map>

#include "dropout/csv.hpp"

namespace dropout {

namespace {

constexpr std::array<std::string_view, 12> kStudentColumns = {
    "student_id",         "race",      "gender",    "hispanic",
    "residency",          "birth_year", "previous_schooling", "sat_score",
    "act_score",          "transfer_credits", "first_term_majors", "fig_member"};

constexpr std::array<std::string_view, 9> kTranscriptColumns = {
    "student_id", "year",   "quarter", "department", "course_number",
    "credits",    "grade",  "mark",    "remedial"};

constexpr std::array<std::string_view, 3> kDegreeColumns = {"student_id", "year", "quarter"};

template <typename Parse>
auto parse_or_fail(const CsvRowView& row, std::string_view column, Parse parse) {
  try {
    return parse(row.text(column));
  } catch (const std::invalid_argument& e) {
    row.fail(column, e.what());
  }
}

std::vector<std::string> split_majors(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size() && !text.empty()) {
    auto end = text.find(';', start);
    if (end == std::string::npos) end = text.size();
    if (end > start) out.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

Term row_term(const CsvRowView& row) {
  int year = row.integer("year");
  if (year < 1900) row.fail("year", "year must be >= 1900");
  Quarter q = parse_or_fail(row, "quarter", [](const std::string& s) { return parse_quarter(s); });
  return Term(year, q);
}

StudentRecord parse_student(const CsvRowView& row, const ResidencyLabels& labels) {
  StudentRecord s;
  s.student_id = row.text("student_id");
  if (s.student_id.empty()) row.fail("student_id", "empty student id");

  auto& d = s.demographics;
  d.race = parse_or_fail(row, "race", [](const std::string& t) { return parse_race(t); });
  d.gender = parse_or_fail(row, "gender", [](const std::string& t) { return parse_gender(t); });
  d.hispanic = row.flag("hispanic");
  const auto& residency = row.text("residency");
  bool found = false;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == residency) {
      d.residency = static_cast<std::uint8_t>(i);
      found = true;
    }
  }
  if (!found) row.fail("residency", "unknown residency label '" + residency + "'");
  d.birth_year = row.integer("birth_year");
  if (d.birth_year < 1900) row.fail("birth_year", "birth year must be >= 1900");

  auto& e = s.entry;
  e.previous_schooling = parse_or_fail(row, "previous_schooling",
                                       [](const std::string& t) { return parse_schooling(t); });
  e.sat_score = row.optional_integer("sat_score");
  if (e.sat_score && (*e.sat_score < 400 || *e.sat_score > 1600)) {
    row.fail("sat_score", "SAT score outside [400, 1600]");
  }
  e.act_score = row.optional_integer("act_score");
  if (e.act_score && (*e.act_score < 1 || *e.act_score > 36)) {
    row.fail("act_score", "ACT score outside [1, 36]");
  }
  e.transfer_credits = row.real("transfer_credits");
  if (e.transfer_credits < 0.0) row.fail("transfer_credits", "negative transfer credits");
  if (e.previous_schooling == PreviousSchooling::Freshman && e.transfer_credits != 0.0) {
    row.fail("transfer_credits", "freshman entrant with nonzero transfer credits");
  }
  e.first_term_majors = split_majors(row.text("first_term_majors"));
  e.fig_member = row.flag("fig_member");
  return s;
}

TranscriptEntry parse_entry(const CsvRowView& row) {
  TranscriptEntry t;
  t.student_id = row.text("student_id");
  t.term = row_term(row);
  t.department = row.text("department");
  if (t.department.empty()) row.fail("department", "empty department code");
  t.course_number = row.integer("course_number");
  t.credits = row.real("credits");
  if (t.credits < 0.0) row.fail("credits", "negative credits");
  t.grade = row.optional_real("grade");
  if (t.grade && (*t.grade < 0.0 || *t.grade > 4.0)) row.fail("grade", "grade outside [0.0, 4.0]");
  t.mark = row.text("mark");
  t.remedial = row.flag("remedial");
  return t;
}

}  // namespace

std::vector<StudentRecord> load_students(const std::filesystem::path& students_file,
                                         const std::filesystem::path& transcripts_file,
                                         const std::optional<std::filesystem::path>& degrees_file,
                                         const ResidencyLabels& residency_labels) {
  auto students = CsvTable::read(students_file, kStudentColumns);
  std::vector<StudentRecord> records;
  records.reserve(students.size());
  std::unordered_map<std::string, std::size_t> by_id;
  for (std::size_t i = 0; i < students.size(); ++i) {
    auto row = students.row(i);
    auto record = parse_student(row, residency_labels);
    if (!by_id.emplace(record.student_id, records.size()).second) {
      row.fail("student_id", "duplicate student_id '" + record.student_id + "'");
    }
    records.push_back(std::move(record));
  }

  auto transcripts = CsvTable::read(transcripts_file, kTranscriptColumns);
  for (std::size_t i = 0; i < transcripts.size(); ++i) {
    auto row = transcripts.row(i);
    auto entry = parse_entry(row);
    auto it = by_id.find(entry.student_id);
    if (it == by_id.end()) {
      row.fail("student_id", "unknown student_id '" + entry.student_id + "'");
    }
    records[it->second].transcript.push_back(std::move(entry));
  }

  if (degrees_file) {
    auto degrees = CsvTable::read(*degrees_file, kDegreeColumns);
    for (std::size_t i = 0; i < degrees.size(); ++i) {
      auto row = degrees.row(i);
      auto it = by_id.find(row.text("student_id"));
      if (it == by_id.end()) {
        row.fail("student_id", "unknown student_id '" + row.text("student_id") + "'");
      }
      records[it->second].degree_terms.push_back(row_term(row));
    }
  }

  std::string missing;
  for (auto& r : records) {
    sort_transcript(r.transcript);
    std::sort(r.degree_terms.begin(), r.degree_terms.end());
    auto first = derive_first_term(r.transcript);
    if (!first) {
      if (!missing.empty()) missing += "; ";
      missing += "student " + r.student_id + " has no transcript entries";
      continue;
    }
    r.first_term = *first;
  }
  if (!missing.empty()) throw DataError(transcripts_file.string() + ": " + missing);
  return records;
}

std::vector<StudentRecord> load_directory(const std::filesystem::path& dir,
                                          const ResidencyLabels& residency_labels) {
  std::optional<std::filesystem::path> degrees;
  if (std::filesystem::exists(dir / kDegreesFile)) degrees = dir / kDegreesFile;
  return load_students(dir / kStudentsFile, dir / kTranscriptsFile, degrees, residency_labels);
}

void write_students(const std::filesystem::path& dir, std::span<const StudentRecord> records,
                    const ResidencyLabels& residency_labels) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  auto open = [&](const char* name) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw DataError((dir / name).string() + ": cannot open for writing");
    return out;
  };
  auto opt_int = [](const std::optional<int>& v) { return v ? std::to_string(*v) : std::string(); };
  auto bit = [](bool b) { return std::string(b ? "1" : "0"); };

  auto students_out = open(kStudentsFile);
  CsvWriter students(students_out);
  students.row(std::vector<std::string>(kStudentColumns.begin(), kStudentColumns.end()));
  auto transcripts_out = open(kTranscriptsFile);
  CsvWriter transcripts(transcripts_out);
  transcripts.row(std::vector<std::string>(kTranscriptColumns.begin(), kTranscriptColumns.end()));
  auto degrees_out = open(kDegreesFile);
  CsvWriter degrees(degrees_out);
  degrees.row(std::vector<std::string>(kDegreeColumns.begin(), kDegreeColumns.end()));

  for (const auto& r : records) {
    const auto& d = r.demographics;
    const auto& e = r.entry;
    std::string majors;
    for (const auto& m : e.first_term_majors) {
      if (!majors.empty()) majors += ';';
      majors += m;
    }
    students.row({r.student_id, std::string(to_string(d.race)), std::string(to_string(d.gender)),
                  bit(d.hispanic), residency_labels.at(d.residency), std::to_string(d.birth_year),
                  std::string(to_string(e.previous_schooling)), opt_int(e.sat_score),
                  opt_int(e.act_score), format_real(e.transfer_credits), majors,
                  bit(e.fig_member)});
    for (const auto& t : r.transcript) {
      transcripts.row({r.student_id, std::to_string(t.term.year),
                       std::string(to_string(t.term.quarter)), t.department,
                       std::to_string(t.course_number), format_real(t.credits),
                       t.grade ? format_real(*t.grade) : std::string(), t.mark, bit(t.remedial)});
    }
    for (const auto& term : r.degree_terms) {
      degrees.row({r.student_id, std::to_string(term.year), std::string(to_string(term.quarter))});
    }
  }
  for (auto* out : {&students_out, &transcripts_out, &degrees_out}) {
    out->flush();
    if (!*out) throw DataError(dir.string() + ": write failed");
  }
}

}  // namespace dropout
