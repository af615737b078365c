#include "dropout/features.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace dropout {

namespace {

constexpr std::array<const char*, 4> kQuarterLabels = {"Winter", "Spring", "Summer", "Autumn"};
constexpr std::array<const char*, 4> kTupleParts = {"took", "credits", "classes", "gpa"};

constexpr int kSatMin = 400, kSatMax = 1600;
constexpr int kActMin = 1, kActMax = 36;

// Design row for the imputation regressions: intercept, categorical dummies,
// scaled birth year and FIG membership.
constexpr Eigen::Index kImputeColumns = 1 + kRaceCount + kGenderCount + 1 + kResidencySlots +
                                        kSchoolingCount + 1 + 1;

Eigen::VectorXd impute_row(const StudentRecord& s) {
  Eigen::VectorXd row = Eigen::VectorXd::Zero(kImputeColumns);
  Eigen::Index at = 0;
  row[at++] = 1.0;
  row[at + static_cast<Eigen::Index>(s.demographics.race)] = 1.0;
  at += kRaceCount;
  row[at + static_cast<Eigen::Index>(s.demographics.gender)] = 1.0;
  at += kGenderCount;
  row[at++] = s.demographics.hispanic ? 1.0 : 0.0;
  row[at + s.demographics.residency] = 1.0;
  at += kResidencySlots;
  row[at + static_cast<Eigen::Index>(s.entry.previous_schooling)] = 1.0;
  at += kSchoolingCount;
  row[at++] = (s.demographics.birth_year - 1980) / 10.0;
  row[at++] = s.entry.fig_member ? 1.0 : 0.0;
  return row;
}

Eigen::VectorXd impute_row_with_other(const StudentRecord& s, double other) {
  Eigen::VectorXd row(kImputeColumns + 1);
  row << impute_row(s), other;
  return row;
}

using ScoreGetter = std::optional<int> (*)(const StudentRecord&);
std::optional<int> get_sat(const StudentRecord& s) { return s.entry.sat_score; }
std::optional<int> get_act(const StudentRecord& s) { return s.entry.act_score; }

// The other score enters stage two rescaled to roughly unit range.
double other_scale(ScoreGetter other) { return other == get_act ? 10.0 : 100.0; }

ScoreImputer fit_score(std::span<const StudentRecord> train, ImputationMode mode, ScoreGetter target,
                       ScoreGetter other, int lo, int hi, const char* name) {
  ScoreImputer m;
  m.lo = lo;
  m.hi = hi;
  std::vector<const StudentRecord*> observed;
  std::vector<const StudentRecord*> both;
  for (const auto& s : train) {
    if (!target(s)) continue;
    observed.push_back(&s);
    if (other(s)) both.push_back(&s);
  }
  if (observed.empty()) {
    throw std::invalid_argument(std::string("imputer: no observed ") + name + " scores in training data");
  }
  double total = 0.0;
  for (const auto* s : observed) total += *target(*s);
  m.mean = total / static_cast<double>(observed.size());
  if (mode == ImputationMode::Mean) return m;

  if (observed.size() < 2) {
    throw std::invalid_argument(std::string("imputer: regression needs at least two observed ") +
                                name + " scores");
  }
  Eigen::MatrixXd design(static_cast<Eigen::Index>(observed.size()), kImputeColumns);
  Eigen::VectorXd y(design.rows());
  for (Eigen::Index i = 0; i < design.rows(); ++i) {
    design.row(i) = impute_row(*observed[static_cast<std::size_t>(i)]).transpose();
    y[i] = *target(*observed[static_cast<std::size_t>(i)]);
  }
  m.base = design.completeOrthogonalDecomposition().solve(y);

  if (both.size() >= 2) {
    Eigen::MatrixXd design2(static_cast<Eigen::Index>(both.size()), kImputeColumns + 1);
    Eigen::VectorXd y2(design2.rows());
    for (Eigen::Index i = 0; i < design2.rows(); ++i) {
      const auto& s = *both[static_cast<std::size_t>(i)];
      design2.row(i) = impute_row_with_other(s, *other(s) / other_scale(other)).transpose();
      y2[i] = *target(s);
    }
    m.with_other = design2.completeOrthogonalDecomposition().solve(y2);
  }
  return m;
}

double impute_score(const ScoreImputer& m, ImputationMode mode, const StudentRecord& s,
                    ScoreGetter target, ScoreGetter other) {
  if (auto v = target(s)) return *v;
  if (mode == ImputationMode::Mean || m.base.size() == 0) return m.mean;
  double value = 0.0;
  if (auto o = other(s); o && m.with_other.size() > 0) {
    value = impute_row_with_other(s, *o / other_scale(other)).dot(m.with_other);
  } else {
    value = impute_row(s).dot(m.base);
  }
  return std::clamp(value, m.lo, m.hi);
}

struct TupleAccumulator {
  bool took = false;
  double credits = 0.0;
  int classes = 0;
  double points = 0.0;
  double graded_credits = 0.0;

  void add(const TranscriptEntry& e) {
    took = true;
    credits += e.credits;
    ++classes;
    if (e.grade) {
      points += *e.grade * e.credits;
      graded_credits += e.credits;
    }
  }
  [[nodiscard]] std::optional<double> gpa() const {
    if (graded_credits > 0.0) return points / graded_credits;
    return std::nullopt;
  }
  [[nodiscard]] DepartmentTuple tuple() const { return {took, credits, classes, gpa()}; }
};

bool in_group(const TranscriptEntry& e, const GatekeeperGroup& g) {
  return e.department == g.department && e.course_number >= g.course_min &&
         e.course_number <= g.course_max;
}

std::span<const TranscriptEntry> first_term_span(const StudentRecord& s) {
  // Transcripts are in canonical order, but the first term is derived from
  // enrollment marks and may not be the earliest listed term.
  auto begin = std::find_if(s.transcript.begin(), s.transcript.end(),
                            [&](const TranscriptEntry& e) { return e.term == s.first_term; });
  auto end = std::find_if(begin, s.transcript.end(),
                          [&](const TranscriptEntry& e) { return e.term != s.first_term; });
  return {s.transcript.data() + (begin - s.transcript.begin()),
          static_cast<std::size_t>(end - begin)};
}

std::vector<StudentRecord> students_of(const LabeledDataset& ds) {
  std::vector<StudentRecord> out;
  out.reserve(ds.size());
  for (const auto& r : ds.records) out.push_back(r.student);
  return out;
}

void add_feature(FeatureSchema& schema, std::string name, std::string label, FeatureKind kind,
                 std::string source, bool standardized) {
  schema.features.push_back(
      {std::move(name), std::move(label), kind, std::move(source), standardized});
}

void build_descriptors(FeatureSchema& schema) {
  auto& cfg = schema.config;
  schema.features.clear();
  for (std::size_t i = 0; i < kRaceCount; ++i) {
    auto v = std::string(to_string(static_cast<Race>(i)));
    add_feature(schema, "race=" + v, "Race: " + v, FeatureKind::Dummy, "race", false);
  }
  for (std::size_t i = 0; i < kGenderCount; ++i) {
    auto v = std::string(to_string(static_cast<Gender>(i)));
    add_feature(schema, "gender=" + v, "Gender: " + v, FeatureKind::Dummy, "gender", false);
  }
  for (const auto& v : cfg.residency_labels) {
    add_feature(schema, "residency=" + v, "Residency: " + v, FeatureKind::Dummy, "residency", false);
  }
  for (std::size_t i = 0; i < kSchoolingCount; ++i) {
    auto v = std::string(to_string(static_cast<PreviousSchooling>(i)));
    add_feature(schema, "prev_schooling=" + v, "Previous Schooling: " + v, FeatureKind::Dummy,
                "previous_schooling", false);
  }
  add_feature(schema, "hispanic", "Hispanic", FeatureKind::Dummy, "hispanic", false);
  add_feature(schema, "birth_year", "Birth Year", FeatureKind::Numeric, "birth_year", true);
  add_feature(schema, "entry_year", "First Year of Enrollment", FeatureKind::Numeric, "first_term", true);
  for (std::size_t q = 0; q < 4; ++q) {
    add_feature(schema, "first_quarter=" + std::string(to_string(static_cast<Quarter>(q))),
                std::string("First Qtr. of Enrollment: ") + kQuarterLabels[q], FeatureKind::Dummy,
                "first_term", false);
  }
  add_feature(schema, "sat_score", "SAT Score", FeatureKind::Numeric, "entry", true);
  add_feature(schema, "act_score", "ACT Score", FeatureKind::Numeric, "entry", true);
  for (const auto& m : schema.majors) {
    add_feature(schema, "major=" + m, "Major: " + m, FeatureKind::Dummy, "majors", false);
  }
  auto tuple_block = [&](const std::string& prefix, const std::string& title,
                         const std::string& source) {
    add_feature(schema, prefix + ":took", "Took " + title + " Classes",
                FeatureKind::DepartmentComponent, source, false);
    add_feature(schema, prefix + ":credits", "Credits in " + title + " Classes",
                FeatureKind::DepartmentComponent, source, true);
    add_feature(schema, prefix + ":classes", "Number of " + title + " Classes",
                FeatureKind::DepartmentComponent, source, true);
    add_feature(schema, prefix + ":gpa", "GPA in " + title + " Classes",
                FeatureKind::DepartmentComponent, source, true);
  };
  for (const auto& d : schema.departments) tuple_block("dept:" + d, d, "departments");
  for (const auto& g : cfg.gatekeepers) {
    auto title = g.name;
    if (!title.empty()) title[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(title[0])));
    tuple_block("gatekeeper:" + g.name, "Gatekeeper " + title, "gatekeepers");
  }
  add_feature(schema, "remedial", "Remedial Classes", FeatureKind::Dummy, "first_term", false);
  add_feature(schema, "fig_member", "First-Year Interest Group", FeatureKind::Dummy, "entry", false);
}

void encode_raw(const StudentRecord& s, const FeatureSchema& schema, Eigen::Ref<Eigen::VectorXd> out) {
  out.setZero();
  const auto& d = s.demographics;
  const auto& e = s.entry;
  Eigen::Index at = 0;
  out[at + static_cast<Eigen::Index>(d.race)] = 1.0;
  at += kRaceCount;
  out[at + static_cast<Eigen::Index>(d.gender)] = 1.0;
  at += kGenderCount;
  out[at + d.residency] = 1.0;
  at += kResidencySlots;
  out[at + static_cast<Eigen::Index>(e.previous_schooling)] = 1.0;
  at += kSchoolingCount;
  out[at++] = d.hispanic ? 1.0 : 0.0;
  out[at++] = d.birth_year;
  out[at++] = s.first_term.year;
  out[at + static_cast<Eigen::Index>(s.first_term.quarter)] = 1.0;
  at += 4;
  out[at++] = schema.imputer.sat_score(s);
  out[at++] = schema.imputer.act_score(s);
  for (std::size_t m = 0; m < schema.majors.size(); ++m) {
    const auto& vocab = schema.majors[m];
    const bool declared =
        std::find(e.first_term_majors.begin(), e.first_term_majors.end(), vocab) !=
        e.first_term_majors.end();
    out[at + static_cast<Eigen::Index>(m)] = declared ? 1.0 : 0.0;
  }
  at += static_cast<Eigen::Index>(schema.majors.size());

  const auto entries = first_term_span(s);
  std::vector<TupleAccumulator> dept(schema.departments.size());
  std::vector<TupleAccumulator> gate(schema.config.gatekeepers.size());
  bool remedial = false;
  for (const auto& t : entries) {
    remedial = remedial || t.remedial;
    auto it = std::lower_bound(schema.departments.begin(), schema.departments.end(), t.department);
    if (it != schema.departments.end() && *it == t.department) {
      dept[static_cast<std::size_t>(it - schema.departments.begin())].add(t);
    }
    for (std::size_t g = 0; g < gate.size(); ++g) {
      if (in_group(t, schema.config.gatekeepers[g])) gate[g].add(t);
    }
  }
  auto write_tuple = [&](const TupleAccumulator& acc, double fill) {
    out[at++] = acc.took ? 1.0 : 0.0;
    out[at++] = acc.credits;
    out[at++] = acc.classes;
    out[at++] = acc.gpa().value_or(fill);
  };
  for (std::size_t j = 0; j < dept.size(); ++j) write_tuple(dept[j], schema.department_gpa_fill[j]);
  for (std::size_t g = 0; g < gate.size(); ++g) write_tuple(gate[g], schema.gatekeeper_gpa_fill[g]);
  out[at++] = remedial ? 1.0 : 0.0;
  out[at++] = e.fig_member ? 1.0 : 0.0;
}

}  // namespace

std::string_view to_string(ImputationMode m) {
  return m == ImputationMode::Regression ? "regression" : "mean";
}

ImputationMode parse_imputation_mode(std::string_view text) {
  if (text == "regression") return ImputationMode::Regression;
  if (text == "mean") return ImputationMode::Mean;
  throw std::invalid_argument("unknown imputation mode '" + std::string(text) + "'");
}

std::vector<GatekeeperGroup> default_gatekeeper_groups(int course_min, int course_max) {
  return {{"math", "MATH", course_min, course_max},
          {"chemistry", "CHEM", course_min, course_max},
          {"physics", "PHYS", course_min, course_max},
          {"biology", "BIOL", course_min, course_max}};
}

DepartmentTuple department_tuple(std::span<const TranscriptEntry> entries, std::string_view dept) {
  TupleAccumulator acc;
  for (const auto& e : entries) {
    if (e.department == dept) acc.add(e);
  }
  return acc.tuple();
}

DepartmentTuple gatekeeper_tuple(std::span<const TranscriptEntry> entries,
                                 const GatekeeperGroup& group) {
  TupleAccumulator acc;
  for (const auto& e : entries) {
    if (in_group(e, group)) acc.add(e);
  }
  return acc.tuple();
}

double Imputer::sat_score(const StudentRecord& s) const {
  return impute_score(sat, mode, s, get_sat, get_act);
}

double Imputer::act_score(const StudentRecord& s) const {
  return impute_score(act, mode, s, get_act, get_sat);
}

Imputer fit_imputer(std::span<const StudentRecord> train, ImputationMode mode) {
  Imputer imp;
  imp.mode = mode;
  imp.sat = fit_score(train, mode, get_sat, get_act, kSatMin, kSatMax, "SAT");
  imp.act = fit_score(train, mode, get_act, get_sat, kActMin, kActMax, "ACT");
  return imp;
}

Imputer fit_imputer(const LabeledDataset& train, ImputationMode mode) {
  auto students = students_of(train);
  return fit_imputer(students, mode);
}

std::size_t FeatureSchema::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (features[i].name == name) return i;
  }
  throw std::out_of_range("schema has no feature '" + std::string(name) + "'");
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t FeatureSchema::hash() const { return fnv1a(schema_to_json(*this).dump()); }

FeatureSchema fit_schema(std::span<const StudentRecord> train, const FeatureConfig& config) {
  if (train.empty()) throw std::invalid_argument("fit_schema: empty training set");
  FeatureSchema schema;
  schema.config = config;

  std::map<std::string, std::size_t> major_counts;
  std::map<std::string, bool> departments;
  for (const auto& s : train) {
    for (const auto& m : s.entry.first_term_majors) ++major_counts[m];
    for (const auto& e : first_term_span(s)) departments[e.department] = true;
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(major_counts.begin(), major_counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  for (std::size_t i = 0; i < ranked.size() && i < config.major_vocab_size; ++i) {
    schema.majors.push_back(ranked[i].first);
  }
  for (const auto& [d, present] : departments) schema.departments.push_back(d);

  // GPA fills: mean of per-student GPAs among students graded in the block.
  std::vector<double> dept_sum(schema.departments.size(), 0.0);
  std::vector<std::size_t> dept_n(schema.departments.size(), 0);
  std::vector<double> gate_sum(config.gatekeepers.size(), 0.0);
  std::vector<std::size_t> gate_n(config.gatekeepers.size(), 0);
  double all_sum = 0.0;
  std::size_t all_n = 0;
  for (const auto& s : train) {
    const auto entries = first_term_span(s);
    for (std::size_t j = 0; j < schema.departments.size(); ++j) {
      if (auto g = department_tuple(entries, schema.departments[j]).gpa) {
        dept_sum[j] += *g;
        ++dept_n[j];
        all_sum += *g;
        ++all_n;
      }
    }
    for (std::size_t g = 0; g < config.gatekeepers.size(); ++g) {
      if (auto v = gatekeeper_tuple(entries, config.gatekeepers[g]).gpa) {
        gate_sum[g] += *v;
        ++gate_n[g];
      }
    }
  }
  const double overall = all_n ? all_sum / static_cast<double>(all_n) : 0.0;
  for (std::size_t j = 0; j < dept_sum.size(); ++j) {
    schema.department_gpa_fill.push_back(dept_n[j] ? dept_sum[j] / static_cast<double>(dept_n[j]) : overall);
  }
  for (std::size_t g = 0; g < gate_sum.size(); ++g) {
    schema.gatekeeper_gpa_fill.push_back(gate_n[g] ? gate_sum[g] / static_cast<double>(gate_n[g]) : overall);
  }

  schema.imputer = fit_imputer(train, config.imputation);
  build_descriptors(schema);

  const auto p = static_cast<Eigen::Index>(schema.size());
  Eigen::MatrixXd raw(static_cast<Eigen::Index>(train.size()), p);
  Eigen::VectorXd row(p);
  for (std::size_t i = 0; i < train.size(); ++i) {
    encode_raw(train[i], schema, row);
    raw.row(static_cast<Eigen::Index>(i)) = row.transpose();
  }
  schema.mean = Eigen::VectorXd::Zero(p);
  schema.sd = Eigen::VectorXd::Ones(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    if (!schema.features[static_cast<std::size_t>(j)].standardized) continue;
    const double mu = raw.col(j).mean();
    schema.mean[j] = mu;
    schema.sd[j] = std::sqrt((raw.col(j).array() - mu).square().mean());
  }
  return schema;
}

FeatureSchema fit_schema(const LabeledDataset& train, const FeatureConfig& config) {
  auto students = students_of(train);
  return fit_schema(students, config);
}

Eigen::VectorXd encode(const StudentRecord& s, const FeatureSchema& schema, Scaling scaling) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(schema.size()));
  encode_raw(s, schema, out);
  if (scaling == Scaling::Standardized) {
    const Eigen::ArrayXd divisor = (schema.sd.array() > 0.0).select(schema.sd.array(), 1.0);
    out = ((out.array() - schema.mean.array()) / divisor).matrix();
  }
  return out;
}

Eigen::MatrixXd encode_all(std::span<const StudentRecord> students, const FeatureSchema& schema,
                           Scaling scaling) {
  Eigen::MatrixXd X(static_cast<Eigen::Index>(students.size()), static_cast<Eigen::Index>(schema.size()));
  for (std::size_t i = 0; i < students.size(); ++i) {
    X.row(static_cast<Eigen::Index>(i)) = encode(students[i], schema, scaling).transpose();
  }
  return X;
}

Eigen::MatrixXd encode_all(const LabeledDataset& ds, const FeatureSchema& schema, Scaling scaling) {
  Eigen::MatrixXd X(static_cast<Eigen::Index>(ds.size()), static_cast<Eigen::Index>(schema.size()));
  for (std::size_t i = 0; i < ds.size(); ++i) {
    X.row(static_cast<Eigen::Index>(i)) = encode(ds.records[i].student, schema, scaling).transpose();
  }
  return X;
}

Eigen::VectorXd dropout_labels(const LabeledDataset& ds) {
  Eigen::VectorXd y(static_cast<Eigen::Index>(ds.size()));
  for (std::size_t i = 0; i < ds.size(); ++i) {
    y[static_cast<Eigen::Index>(i)] = ds.records[i].label.graduated ? 0.0 : 1.0;
  }
  return y;
}

Eigen::VectorXd quarters_enrolled(const LabeledDataset& ds) {
  Eigen::VectorXd y(static_cast<Eigen::Index>(ds.size()));
  for (std::size_t i = 0; i < ds.size(); ++i) {
    y[static_cast<Eigen::Index>(i)] = ds.records[i].label.quarters_enrolled;
  }
  return y;
}

namespace {

nlohmann::json vector_json(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd vector_from(const nlohmann::json& j) {
  auto values = j.get<std::vector<double>>();
  return Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

nlohmann::json score_json(const ScoreImputer& m) {
  return {{"mean", m.mean}, {"lo", m.lo}, {"hi", m.hi},
          {"base", vector_json(m.base)}, {"with_other", vector_json(m.with_other)}};
}

ScoreImputer score_from(const nlohmann::json& j) {
  ScoreImputer m;
  m.mean = j.at("mean").get<double>();
  m.lo = j.at("lo").get<double>();
  m.hi = j.at("hi").get<double>();
  m.base = vector_from(j.at("base"));
  m.with_other = vector_from(j.at("with_other"));
  return m;
}

std::string_view kind_name(FeatureKind k) {
  switch (k) {
    case FeatureKind::Dummy: return "dummy";
    case FeatureKind::Numeric: return "numeric";
    case FeatureKind::DepartmentComponent: return "department_component";
  }
  return "dummy";
}

FeatureKind parse_kind(const std::string& s) {
  if (s == "dummy") return FeatureKind::Dummy;
  if (s == "numeric") return FeatureKind::Numeric;
  if (s == "department_component") return FeatureKind::DepartmentComponent;
  throw std::invalid_argument("schema: unknown feature kind '" + s + "'");
}

}  // namespace

nlohmann::json schema_to_json(const FeatureSchema& schema) {
  nlohmann::json gatekeepers = nlohmann::json::array();
  for (const auto& g : schema.config.gatekeepers) {
    gatekeepers.push_back({{"name", g.name}, {"department", g.department},
                           {"course_min", g.course_min}, {"course_max", g.course_max}});
  }
  nlohmann::json features = nlohmann::json::array();
  for (const auto& f : schema.features) {
    features.push_back({{"name", f.name}, {"label", f.label}, {"kind", kind_name(f.kind)},
                        {"source", f.source}, {"standardized", f.standardized}});
  }
  return {
      {"config",
       {{"major_vocab_size", schema.config.major_vocab_size},
        {"gatekeepers", gatekeepers},
        {"imputation", to_string(schema.config.imputation)},
        {"residency_labels", schema.config.residency_labels}}},
      {"features", features},
      {"majors", schema.majors},
      {"departments", schema.departments},
      {"department_gpa_fill", schema.department_gpa_fill},
      {"gatekeeper_gpa_fill", schema.gatekeeper_gpa_fill},
      {"imputer",
       {{"mode", to_string(schema.imputer.mode)},
        {"sat", score_json(schema.imputer.sat)},
        {"act", score_json(schema.imputer.act)}}},
      {"mean", vector_json(schema.mean)},
      {"sd", vector_json(schema.sd)},
  };
}

FeatureSchema schema_from_json(const nlohmann::json& j) {
  FeatureSchema s;
  const auto& cfg = j.at("config");
  s.config.major_vocab_size = cfg.at("major_vocab_size").get<std::size_t>();
  s.config.gatekeepers.clear();
  for (const auto& g : cfg.at("gatekeepers")) {
    s.config.gatekeepers.push_back({g.at("name").get<std::string>(), g.at("department").get<std::string>(),
                                    g.at("course_min").get<int>(), g.at("course_max").get<int>()});
  }
  s.config.imputation = parse_imputation_mode(cfg.at("imputation").get<std::string>());
  s.config.residency_labels = cfg.at("residency_labels").get<ResidencyLabels>();
  for (const auto& f : j.at("features")) {
    s.features.push_back({f.at("name").get<std::string>(), f.at("label").get<std::string>(),
                          parse_kind(f.at("kind").get<std::string>()),
                          f.at("source").get<std::string>(), f.at("standardized").get<bool>()});
  }
  s.majors = j.at("majors").get<std::vector<std::string>>();
  s.departments = j.at("departments").get<std::vector<std::string>>();
  s.department_gpa_fill = j.at("department_gpa_fill").get<std::vector<double>>();
  s.gatekeeper_gpa_fill = j.at("gatekeeper_gpa_fill").get<std::vector<double>>();
  const auto& imp = j.at("imputer");
  s.imputer.mode = parse_imputation_mode(imp.at("mode").get<std::string>());
  s.imputer.sat = score_from(imp.at("sat"));
  s.imputer.act = score_from(imp.at("act"));
  s.mean = vector_from(j.at("mean"));
  s.sd = vector_from(j.at("sd"));
  if (static_cast<std::size_t>(s.mean.size()) != s.features.size() ||
      static_cast<std::size_t>(s.sd.size()) != s.features.size()) {
    throw std::invalid_argument("schema: statistics do not match feature count");
  }
  return s;
}

}  // namespace dropout
