#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "dropout/ingest.hpp"
#include "dropout/labeling.hpp"
#include "dropout/synth.hpp"
#include "fixtures.hpp"

using namespace dropout;
using fixtures::TempDir;

namespace {

std::size_t count_lines(const std::string& text) {
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

double dropout_rate(const Cohort& c) {
  double n = 0;
  for (const auto& t : c.truth) n += t.dropout;
  return n / static_cast<double>(c.truth.size());
}

// Credit-weighted first-term GPA in one department, straight from the transcript.
std::optional<double> first_term_gpa(const StudentRecord& s, const std::string& dept) {
  double points = 0, credits = 0;
  for (const auto& e : s.transcript) {
    if (e.term != s.first_term || e.department != dept || !e.grade) continue;
    points += *e.grade * e.credits;
    credits += e.credits;
  }
  if (credits == 0) return std::nullopt;
  return points / credits;
}

}  // namespace

TEST_CASE("zero weights give a coin flip") {
  SynthConfig cfg;
  cfg.n_students = 4000;
  cfg.dropout_base_rate = 0.5;
  for (auto& [name, w] : cfg.signal_weights) w = 0.0;
  const auto cohort = generate_cohort(cfg);
  const double sigma = std::sqrt(0.25 / cfg.n_students);
  CHECK(std::abs(dropout_rate(cohort) - 0.5) < 3 * sigma);
  for (const auto& t : cohort.truth) CHECK(t.latent_risk == doctest::Approx(0.5));
}

TEST_CASE("same seed gives byte-identical files") {
  SynthConfig cfg;
  cfg.n_students = 300;
  cfg.seed = 7;
  TempDir a, b;
  const auto c1 = generate_cohort(cfg);
  const auto c2 = generate_cohort(cfg);
  write_cohort(c1.records, c1.truth, a.path());
  write_cohort(c2.records, c2.truth, b.path());
  for (const char* f : {kStudentsFile, kTranscriptsFile, kDegreesFile, kGroundTruthFile}) {
    CHECK(fixtures::read_file(a / f) == fixtures::read_file(b / f));
  }
  cfg.seed = 8;
  const auto c3 = generate_cohort(cfg);
  CHECK(c3.records != c1.records);
}

TEST_CASE("strong negative math-GPA weight correlates GPA with dropout") {
  SynthConfig cfg;
  cfg.n_students = 3000;
  cfg.signal_weights = {{"gpa:MATH", -2.5}};
  const auto cohort = generate_cohort(cfg);
  std::vector<double> gpa, y;
  for (std::size_t i = 0; i < cohort.records.size(); ++i) {
    if (auto g = first_term_gpa(cohort.records[i], "MATH")) {
      gpa.push_back(*g);
      y.push_back(cohort.truth[i].dropout ? 1.0 : 0.0);
    }
  }
  REQUIRE(gpa.size() > 500);
  const double n = static_cast<double>(gpa.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < gpa.size(); ++i) mx += gpa[i] / n, my += y[i] / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < gpa.size(); ++i) {
    sxy += (gpa[i] - mx) * (y[i] - my);
    sxx += (gpa[i] - mx) * (gpa[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  const double r = sxy / std::sqrt(sxx * syy);
  CHECK(r < -0.2);
}

TEST_CASE("raising a positive signal weight never lowers the dropout rate") {
  SynthConfig cfg;
  cfg.n_students = 3000;
  double previous = -1;
  std::vector<GroundTruth> previous_truth;
  for (double w : {0.0, 1.0, 2.0}) {
    cfg.signal_weights["prev:Transfer4Yr"] = w;
    const auto cohort = generate_cohort(cfg);
    const double rate = dropout_rate(cohort);
    CHECK(rate >= previous);
    // Per student: only transfer entrants' risk moves, and only upward.
    if (!previous_truth.empty()) {
      for (std::size_t i = 0; i < cohort.truth.size(); ++i) {
        const bool transfer = cohort.records[i].entry.previous_schooling == PreviousSchooling::Transfer4Yr;
        if (transfer) {
          CHECK(cohort.truth[i].latent_risk > previous_truth[i].latent_risk);
          CHECK(cohort.truth[i].dropout >= previous_truth[i].dropout);
        } else {
          CHECK(cohort.truth[i].latent_risk == previous_truth[i].latent_risk);
        }
      }
    }
    previous = rate;
    previous_truth = cohort.truth;
  }
}

TEST_CASE("generated cohort structure") {
  SynthConfig cfg;
  cfg.n_students = 2000;
  const auto cohort = generate_cohort(cfg);
  REQUIRE(cohort.records.size() == 2000);
  std::array<int, kRaceCount> races{};
  for (std::size_t i = 0; i < cohort.records.size(); ++i) {
    const auto& s = cohort.records[i];
    const auto& t = cohort.truth[i];
    CHECK(t.student_id == s.student_id);
    CHECK(t.quarters_enrolled.has_value() == t.dropout);
    const auto first = s.first_term_entries();
    CHECK(first.size() >= 3);
    CHECK(first.size() <= 6);
    CHECK(s.first_term.year >= cfg.entry_year_first);
    CHECK(s.first_term.year <= cfg.entry_year_last);
    if (s.entry.previous_schooling == PreviousSchooling::Freshman) CHECK(s.entry.transfer_credits == 0.0);
    if (s.entry.sat_score) CHECK((*s.entry.sat_score >= 400 && *s.entry.sat_score <= 1600));
    if (s.entry.act_score) CHECK((*s.entry.act_score >= 1 && *s.entry.act_score <= 36));
    for (const auto& e : s.transcript) {
      if (e.grade) CHECK((*e.grade >= 0.0 && *e.grade <= 4.0));
    }
    if (!t.dropout) {
      const int allowance = window_allowance(s, cfg.degree_credits);
      bool inside = false;
      for (const auto& d : s.degree_terms) inside = inside || quarters_between(s.first_term, d) <= allowance;
      CHECK(inside);
    } else {
      CHECK(*t.quarters_enrolled >= 1);
      CHECK(*t.quarters_enrolled <= 24);
    }
    races[static_cast<std::size_t>(s.demographics.race)]++;
  }
  for (int count : races) CHECK(count > 0);
  CHECK(races[static_cast<std::size_t>(Race::Caucasian)] > races[static_cast<std::size_t>(Race::HawaiianPacificIslander)]);
}

TEST_CASE("config validation") {
  SynthConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.n_departments = 3;  // four departments carry GPA signal by default
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  CHECK_THROWS_AS(generate_cohort(cfg), std::invalid_argument);

  SynthConfig bad;
  bad.signal_weights["shoe_size"] = 1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  SynthConfig rate;
  rate.dropout_base_rate = 1.5;
  CHECK_THROWS_AS(rate.validate(), std::invalid_argument);
  SynthConfig tiny;
  tiny.n_students = 1;
  CHECK_THROWS_AS(tiny.validate(), std::invalid_argument);
}

TEST_CASE("config JSON keeps defaults for missing keys") {
  SynthConfig cfg = nlohmann::json{{"n_students", 42}, {"timing_noise_sd", 3.0}}.get<SynthConfig>();
  CHECK(cfg.n_students == 42);
  CHECK(cfg.timing_noise_sd == 3.0);
  CHECK(cfg.n_departments == SynthConfig{}.n_departments);
  CHECK(cfg.signal_weights == SynthConfig{}.signal_weights);

  cfg.entry_year_first = 2000;
  cfg.entry_year_last = 2003;
  const nlohmann::json j = cfg;
  const auto back = j.get<SynthConfig>();
  CHECK(nlohmann::json(back) == j);
}

TEST_CASE("write_cohort files and round-trip") {
  SynthConfig cfg;
  cfg.n_students = 2;
  cfg.seed = 3;
  const auto cohort = generate_cohort(cfg);
  TempDir dir;
  write_cohort(cohort.records, cohort.truth, dir.path());

  std::size_t entries = 0, degrees = 0;
  for (const auto& r : cohort.records) {
    entries += r.transcript.size();
    degrees += r.degree_terms.size();
  }
  CHECK(count_lines(fixtures::read_file(dir / kStudentsFile)) == 1 + 2);
  CHECK(count_lines(fixtures::read_file(dir / kTranscriptsFile)) == 1 + entries);
  CHECK(count_lines(fixtures::read_file(dir / kDegreesFile)) == 1 + degrees);
  CHECK(count_lines(fixtures::read_file(dir / kGroundTruthFile)) == 1 + 2);

  CHECK(load_directory(dir.path()) == cohort.records);
  CHECK(read_ground_truth(dir / kGroundTruthFile) == cohort.truth);
}

TEST_CASE("write_cohort errors") {
  CHECK_THROWS_AS(write_cohort({}, {}, TempDir().path()), std::invalid_argument);
  SynthConfig cfg;
  cfg.n_students = 2;
  const auto cohort = generate_cohort(cfg);
  TempDir dir;
  fixtures::write_file(dir / "blocker", "x");
  CHECK_THROWS(write_cohort(cohort.records, cohort.truth, dir / "blocker" / "sub"));
}

TEST_CASE("departments list puts signal departments first") {
  SynthConfig cfg;
  cfg.n_departments = 196;
  const auto depts = cohort_departments(cfg);
  CHECK(depts.size() == 196);
  CHECK(std::set<std::string>(depts.begin(), depts.end()).size() == 196);
  for (const char* d : {"MATH", "ENGL", "CHEM", "PSYCH"}) {
    CHECK(std::find(depts.begin(), depts.begin() + 4, std::string(d)) != depts.begin() + 4);
  }
}
