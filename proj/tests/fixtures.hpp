#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>

#include <unistd.h>

#include "dropout/records.hpp"
#include "dropout/term.hpp"

namespace fixtures {

using dropout::Quarter;
using dropout::StudentRecord;
using dropout::Term;
using dropout::TranscriptEntry;

/// Scratch directory removed on scope exit.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("dropout_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline TranscriptEntry course(Term term, std::string dept, int number, double credits,
                              std::optional<double> grade, std::string mark = "",
                              bool remedial = false) {
  TranscriptEntry e;
  e.student_id = "S1";
  e.term = term;
  e.department = std::move(dept);
  e.course_number = number;
  e.credits = credits;
  e.grade = grade;
  e.mark = grade ? std::string() : (mark.empty() ? std::string("P") : mark);
  e.remedial = remedial;
  return e;
}

/// A freshman with one graded 5-credit class per listed term.
inline StudentRecord student(std::string id, std::initializer_list<Term> terms,
                             std::initializer_list<Term> degrees = {}) {
  StudentRecord s;
  s.student_id = std::move(id);
  for (const auto& t : terms) {
    auto e = course(t, "MATH", 124, 5.0, 3.0);
    e.student_id = s.student_id;
    s.transcript.push_back(e);
  }
  dropout::sort_transcript(s.transcript);
  if (auto first = dropout::derive_first_term(s.transcript)) s.first_term = *first;
  s.degree_terms = degrees;
  return s;
}

}  // namespace fixtures
