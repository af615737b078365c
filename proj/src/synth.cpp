#include "dropout/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <stdexcept>

#include "dropout/csv.hpp"
#include "dropout/ingest.hpp"
#include "dropout/labeling.hpp"
#include "dropout/random.hpp"

namespace dropout {

namespace {

// Popular departments first; generic codes fill the remainder.
constexpr std::array<const char*, 20> kDepartmentPool = {
    "MATH", "ENGL", "CHEM", "PSYCH", "PHYS", "BIOL", "HIST", "ECON", "SOC",  "PHIL",
    "ART",  "CSE",  "COMM", "POLS",  "GEOG", "MUSIC", "ASTR", "LING", "ANTH", "STAT"};

// Category weights follow the balanced-cohort demographics table.
constexpr std::array<double, kRaceCount> kRaceWeights = {1081, 518, 7414, 18472, 231, 4822};
constexpr std::array<double, kGenderCount> kGenderWeights = {16924, 15591, 23};
constexpr std::array<double, kSchoolingCount> kSchoolingWeights = {16173, 8287, 8078};
constexpr double kHispanicRate = 1478.0 / 32538.0;
constexpr std::array<double, kResidencySlots> kResidencyWeights = {27600, 1049, 2900, 200,
                                                                   600,   120,  69};
constexpr std::array<double, 4> kFirstQuarterWeights = {0.1, 0.1, 0.1, 0.7};
constexpr std::array<double, 5> kCreditChoices = {5, 5, 5, 4, 3};

constexpr double kBaseGrade = 3.0;
constexpr double kAbilityGrade = 0.6;
constexpr double kGpaSignalScale = 0.7;
constexpr int kLateCoursesPerTerm = 3;

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

std::string padded(char prefix, int value, int width) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%c%0*d", prefix, width, value);
  return buf;
}

std::set<std::string> signal_departments(const SynthConfig& cfg) {
  std::set<std::string> out;
  for (const auto& [name, weight] : cfg.signal_weights) {
    if (name.starts_with("gpa:")) out.insert(name.substr(4));
  }
  return out;
}

struct Signals {
  std::vector<std::pair<std::size_t, double>> gpa;  // department index, weight
  std::array<double, kSchoolingCount> schooling{};
  double entry_year = 0.0;
  double remedial = 0.0;
  double fig = 0.0;
  double ability = 0.0;
};

Signals resolve_signals(const SynthConfig& cfg, const std::vector<std::string>& departments) {
  Signals s;
  for (const auto& [name, weight] : cfg.signal_weights) {
    if (name.starts_with("gpa:")) {
      auto it = std::find(departments.begin(), departments.end(), name.substr(4));
      s.gpa.emplace_back(static_cast<std::size_t>(it - departments.begin()), weight);
    } else if (name.starts_with("prev:")) {
      s.schooling[static_cast<std::size_t>(parse_schooling(name.substr(5)))] = weight;
    } else if (name == "entry_year") {
      s.entry_year = weight;
    } else if (name == "remedial") {
      s.remedial = weight;
    } else if (name == "fig") {
      s.fig = weight;
    } else if (name == "ability") {
      s.ability = weight;
    }
  }
  return s;
}

double standard_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

TranscriptEntry make_course(Rng& rng, const std::string& id, const Term& term,
                            const std::string& dept, int course_number, double credits,
                            double ability, double difficulty, double grade_noise_sd) {
  TranscriptEntry e;
  e.student_id = id;
  e.term = term;
  e.department = dept;
  e.course_number = course_number;
  e.credits = credits;
  double raw = kBaseGrade + kAbilityGrade * ability - difficulty + rng.normal(0.0, grade_noise_sd);
  double pass_fail = rng.uniform();
  if (pass_fail < 0.06) {
    e.mark = raw >= 0.7 ? "P" : "NP";
  } else {
    e.grade = std::round(std::clamp(raw, 0.0, 4.0) * 10.0) / 10.0;
  }
  return e;
}

}  // namespace

void SynthConfig::validate() const {
  if (n_students < 2) throw std::invalid_argument("synth: n_students must be >= 2");
  if (n_departments < 1) throw std::invalid_argument("synth: n_departments must be >= 1");
  if (n_majors < 1) throw std::invalid_argument("synth: n_majors must be >= 1");
  if (entry_year_first < 1900 || entry_year_last < entry_year_first) {
    throw std::invalid_argument("synth: invalid entry_year_range");
  }
  auto probability = [](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument(std::string("synth: ") + name + " must be in [0, 1]");
  };
  probability(dropout_base_rate, "dropout_base_rate");
  probability(late_degree_fraction, "late_degree_fraction");
  if (!(timing_noise_sd >= 0.0)) throw std::invalid_argument("synth: timing_noise_sd must be >= 0");
  if (!(grade_noise_sd >= 0.0)) throw std::invalid_argument("synth: grade_noise_sd must be >= 0");
  if (!(degree_credits > 0.0)) throw std::invalid_argument("synth: degree_credits must be > 0");
  for (const auto& [name, weight] : signal_weights) {
    if (!std::isfinite(weight)) throw std::invalid_argument("synth: non-finite weight for " + name);
    if (name.starts_with("gpa:") && name.size() > 4) continue;
    if (name.starts_with("prev:")) {
      parse_schooling(name.substr(5));
      continue;
    }
    if (name == "entry_year" || name == "remedial" || name == "fig" || name == "ability") continue;
    throw std::invalid_argument("synth: unknown signal '" + name + "'");
  }
  auto named = signal_departments(*this);
  if (static_cast<std::size_t>(n_departments) < named.size()) {
    throw std::invalid_argument("synth: n_departments (" + std::to_string(n_departments) +
                                ") is smaller than the " + std::to_string(named.size()) +
                                " departments named in signal_weights");
  }
}

std::vector<std::string> cohort_departments(const SynthConfig& cfg) {
  auto named = signal_departments(cfg);
  std::vector<std::string> out;
  for (const char* d : kDepartmentPool) {
    if (named.contains(d)) out.emplace_back(d);
  }
  for (const auto& d : named) {
    if (std::find(out.begin(), out.end(), d) == out.end()) out.push_back(d);
  }
  for (const char* d : kDepartmentPool) {
    if (static_cast<int>(out.size()) >= cfg.n_departments) break;
    if (!named.contains(d)) out.emplace_back(d);
  }
  for (int i = 1; static_cast<int>(out.size()) < cfg.n_departments; ++i) {
    out.push_back(padded('D', i, 3));
  }
  return out;
}

Cohort generate_cohort(const SynthConfig& cfg) {
  cfg.validate();
  Cohort cohort;
  cohort.departments = cohort_departments(cfg);
  const auto& depts = cohort.departments;
  const Signals signals = resolve_signals(cfg, depts);

  Rng cohort_rng(derive_seed(cfg.seed, 0));
  std::vector<double> difficulty(depts.size());
  for (auto& d : difficulty) d = cohort_rng.uniform(0.0, 0.5);
  std::vector<double> popularity(depts.size());
  for (std::size_t j = 0; j < depts.size(); ++j) popularity[j] = std::pow(j + 1.0, -0.7);
  std::vector<double> major_weights(static_cast<std::size_t>(cfg.n_majors));
  for (std::size_t j = 0; j < major_weights.size(); ++j) major_weights[j] = 1.0 / (j + 1.0);
  const auto remedial_dept = std::min<std::size_t>(1, depts.size() - 1);

  const double base_logit = std::log(cfg.dropout_base_rate) - std::log1p(-cfg.dropout_base_rate);
  const double year_mid = 0.5 * (cfg.entry_year_first + cfg.entry_year_last);
  const double year_half = std::max(0.5 * (cfg.entry_year_last - cfg.entry_year_first), 1.0);

  cohort.records.reserve(static_cast<std::size_t>(cfg.n_students));
  cohort.truth.reserve(static_cast<std::size_t>(cfg.n_students));
  for (int i = 0; i < cfg.n_students; ++i) {
    Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(i) + 1));
    StudentRecord s;
    s.student_id = padded('S', i + 1, 6);

    auto& d = s.demographics;
    auto& e = s.entry;
    d.race = static_cast<Race>(rng.categorical(kRaceWeights));
    d.gender = static_cast<Gender>(rng.categorical(kGenderWeights));
    d.hispanic = rng.bernoulli(kHispanicRate);
    d.residency = static_cast<std::uint8_t>(rng.categorical(kResidencyWeights));
    e.previous_schooling = static_cast<PreviousSchooling>(rng.categorical(kSchoolingWeights));
    const bool freshman = e.previous_schooling == PreviousSchooling::Freshman;

    const int entry_year =
        static_cast<int>(rng.uniform_int(cfg.entry_year_first, cfg.entry_year_last));
    const auto first_quarter = static_cast<Quarter>(rng.categorical(kFirstQuarterWeights));
    const Term first(entry_year, first_quarter);
    const int schooling_years = freshman ? 0 : (e.previous_schooling == PreviousSchooling::Transfer2Yr ? 2 : 3);
    d.birth_year = entry_year - 18 - schooling_years - static_cast<int>(rng.uniform_int(0, 2));

    switch (e.previous_schooling) {
      case PreviousSchooling::Freshman: e.transfer_credits = 0.0; break;
      case PreviousSchooling::Transfer2Yr: e.transfer_credits = static_cast<double>(rng.uniform_int(45, 90)); break;
      case PreviousSchooling::Transfer4Yr: e.transfer_credits = static_cast<double>(rng.uniform_int(30, 135)); break;
    }

    const double ability = rng.normal();
    const int decile = std::min(9, static_cast<int>(standard_normal_cdf(ability) * 10.0));
    const double sat_draw = rng.normal(0.0, 20.0);
    const double act_draw = rng.normal(0.0, 1.0);
    if (rng.bernoulli(freshman ? 0.70 : 0.10)) {
      e.sat_score = std::clamp(static_cast<int>(std::lround((800.0 + 40.0 * decile + sat_draw) / 10.0)) * 10, 400, 1600);
    }
    if (rng.bernoulli(freshman ? 0.20 : 0.04)) {
      e.act_score = std::clamp(static_cast<int>(std::lround(14.0 + 1.8 * decile + act_draw)), 1, 36);
    }

    const double major_draw = rng.uniform();
    const int n_majors = major_draw < 0.35 ? 0 : (major_draw < 0.90 ? 1 : 2);
    for (int m = 0; m < n_majors; ++m) {
      auto code = padded('M', static_cast<int>(rng.categorical(major_weights)) + 1, 4);
      if (std::find(e.first_term_majors.begin(), e.first_term_majors.end(), code) ==
          e.first_term_majors.end()) {
        e.first_term_majors.push_back(std::move(code));
      }
    }
    e.fig_member = freshman && rng.bernoulli(0.3);

    // First-term transcript.
    const int n_courses = static_cast<int>(rng.uniform_int(3, 6));
    for (int c = 0; c < n_courses; ++c) {
      const auto j = rng.categorical(popularity);
      const bool intro = rng.bernoulli(0.75);
      const int number = intro ? 100 + 10 * static_cast<int>(rng.uniform_int(0, 9))
                               : 200 + 10 * static_cast<int>(rng.uniform_int(0, 29));
      const double credits = kCreditChoices[rng.index(kCreditChoices.size())];
      s.transcript.push_back(make_course(rng, s.student_id, first, depts[j], number, credits,
                                         ability, difficulty[j], cfg.grade_noise_sd));
    }
    const bool remedial = rng.bernoulli(freshman ? 0.14 : 0.04);
    {
      const int number = 90 + static_cast<int>(rng.uniform_int(0, 9));
      auto course = make_course(rng, s.student_id, first, depts[remedial_dept], number, 5.0,
                                ability, difficulty[remedial_dept], cfg.grade_noise_sd);
      course.remedial = true;
      // The remedial class takes the place of the last regular one, so the
      // first term keeps 3-6 classes.
      if (remedial) s.transcript.back() = std::move(course);
    }

    // Latent risk from first-term observables.
    double logit = base_logit;
    for (const auto& [j, weight] : signals.gpa) {
      double points = 0.0;
      double credits = 0.0;
      for (const auto& t : s.transcript) {
        if (t.department == depts[j] && t.grade) {
          points += *t.grade * t.credits;
          credits += t.credits;
        }
      }
      if (credits > 0.0) {
        const double nominal = kBaseGrade - difficulty[j];
        logit += weight * (points / credits - nominal) / kGpaSignalScale;
      }
    }
    logit += signals.schooling[static_cast<std::size_t>(e.previous_schooling)];
    logit += signals.entry_year * (entry_year - year_mid) / year_half;
    logit += signals.remedial * (remedial ? 1.0 : 0.0);
    logit += signals.fig * (e.fig_member ? 1.0 : 0.0);
    logit += signals.ability * ability;
    const double risk = logistic(logit);

    // Every outcome draw is taken before branching on the label.
    const double label_draw = rng.uniform();
    const double timing_draw = rng.normal(0.0, cfg.timing_noise_sd);
    const bool late_degree = rng.bernoulli(cfg.late_degree_fraction);
    const int late_offset = static_cast<int>(rng.uniform_int(0, 6));
    const int grad_offset = static_cast<int>(rng.uniform_int(0, 10));
    const bool is_dropout = label_draw < risk;

    GroundTruth gt;
    gt.student_id = s.student_id;
    gt.latent_risk = risk;
    gt.dropout = is_dropout;

    const int allowance = window_allowance(e.transfer_credits, cfg.degree_credits);
    std::vector<int> later_offsets;  // quarter offsets after the first term
    if (is_dropout) {
      const double raw = cfg.timing_intercept + cfg.timing_slope * risk + timing_draw;
      const int quarters = static_cast<int>(std::clamp(std::round(raw), 1.0, 24.0));
      gt.quarters_enrolled = quarters;
      if (late_degree && quarters >= 2) {
        for (int k = 1; k <= quarters - 2; ++k) later_offsets.push_back(k);
        const int degree_offset = std::max(allowance + 1, quarters - 1) + late_offset;
        later_offsets.push_back(degree_offset);
        s.degree_terms.push_back(Term::from_index(first.index() + degree_offset));
      } else {
        for (int k = 1; k <= quarters - 1; ++k) later_offsets.push_back(k);
      }
    } else {
      const int degree_offset = std::clamp(allowance - 10 + grad_offset, 1, allowance);
      for (int k = 1; k <= degree_offset; ++k) later_offsets.push_back(k);
      s.degree_terms.push_back(Term::from_index(first.index() + degree_offset));
    }

    for (int offset : later_offsets) {
      const Term term = Term::from_index(first.index() + offset);
      for (int c = 0; c < kLateCoursesPerTerm; ++c) {
        const auto j = rng.categorical(popularity);
        const int number = 200 + 10 * static_cast<int>(rng.uniform_int(0, 29));
        s.transcript.push_back(make_course(rng, s.student_id, term, depts[j], number, 5.0,
                                           ability, difficulty[j], cfg.grade_noise_sd));
      }
    }

    sort_transcript(s.transcript);
    s.first_term = first;
    cohort.records.push_back(std::move(s));
    cohort.truth.push_back(std::move(gt));
  }
  return cohort;
}

void write_cohort(std::span<const StudentRecord> records, std::span<const GroundTruth> truth,
                  const std::filesystem::path& dir, const ResidencyLabels& residency_labels) {
  if (records.empty()) throw std::invalid_argument("write_cohort: no records to write");
  if (records.size() != truth.size()) {
    throw std::invalid_argument("write_cohort: records and ground truth differ in length");
  }
  write_students(dir, records, residency_labels);
  const auto file = dir / kGroundTruthFile;
  std::ofstream out(file, std::ios::binary);
  if (!out) throw DataError(file.string() + ": cannot open for writing");
  CsvWriter csv(out);
  csv.row({"student_id", "latent_risk", "true_label", "true_quarters_enrolled"});
  for (const auto& t : truth) {
    csv.row({t.student_id, format_real(t.latent_risk), t.dropout ? "nc" : "grad",
             t.quarters_enrolled ? std::to_string(*t.quarters_enrolled) : std::string()});
  }
  if (!out) throw DataError(file.string() + ": write failed");
}

std::vector<GroundTruth> read_ground_truth(const std::filesystem::path& file) {
  constexpr std::array<std::string_view, 4> columns = {"student_id", "latent_risk", "true_label",
                                                       "true_quarters_enrolled"};
  auto table = CsvTable::read(file, columns);
  std::vector<GroundTruth> out;
  out.reserve(table.size());
  for (std::size_t i = 0; i < table.size(); ++i) {
    auto row = table.row(i);
    GroundTruth t;
    t.student_id = row.text("student_id");
    t.latent_risk = row.real("latent_risk");
    const auto& label = row.text("true_label");
    if (label != "nc" && label != "grad") row.fail("true_label", "expected grad or nc");
    t.dropout = label == "nc";
    t.quarters_enrolled = row.optional_integer("true_quarters_enrolled");
    if (t.dropout != t.quarters_enrolled.has_value()) {
      row.fail("true_quarters_enrolled", "must be present exactly for nc rows");
    }
    out.push_back(std::move(t));
  }
  return out;
}

void to_json(nlohmann::json& j, const SynthConfig& cfg) {
  j = nlohmann::json{
      {"n_students", cfg.n_students},
      {"n_departments", cfg.n_departments},
      {"n_majors", cfg.n_majors},
      {"entry_year_range", {cfg.entry_year_first, cfg.entry_year_last}},
      {"dropout_base_rate", cfg.dropout_base_rate},
      {"signal_weights", cfg.signal_weights},
      {"timing_intercept", cfg.timing_intercept},
      {"timing_slope", cfg.timing_slope},
      {"timing_noise_sd", cfg.timing_noise_sd},
      {"grade_noise_sd", cfg.grade_noise_sd},
      {"degree_credits", cfg.degree_credits},
      {"late_degree_fraction", cfg.late_degree_fraction},
      {"seed", cfg.seed},
  };
}

void from_json(const nlohmann::json& j, SynthConfig& cfg) {
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) j.at(key).get_to(field);
  };
  get("n_students", cfg.n_students);
  get("n_departments", cfg.n_departments);
  get("n_majors", cfg.n_majors);
  if (j.contains("entry_year_range")) {
    const auto& r = j.at("entry_year_range");
    if (!r.is_array() || r.size() != 2) {
      throw std::invalid_argument("synth: entry_year_range must be [first, last]");
    }
    r.at(0).get_to(cfg.entry_year_first);
    r.at(1).get_to(cfg.entry_year_last);
  }
  get("dropout_base_rate", cfg.dropout_base_rate);
  get("signal_weights", cfg.signal_weights);
  get("timing_intercept", cfg.timing_intercept);
  get("timing_slope", cfg.timing_slope);
  get("timing_noise_sd", cfg.timing_noise_sd);
  get("grade_noise_sd", cfg.grade_noise_sd);
  get("degree_credits", cfg.degree_credits);
  get("late_degree_fraction", cfg.late_degree_fraction);
  get("seed", cfg.seed);
}

}  // namespace dropout
