#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "dropout/features.hpp"
#include "dropout/synth.hpp"
#include "fixtures.hpp"

using namespace dropout;
using fixtures::course;

namespace {

const Term kFirst(2001, Quarter::Autumn);

StudentRecord basic(std::string id) {
  StudentRecord s;
  s.student_id = std::move(id);
  s.first_term = kFirst;
  s.demographics.race = Race::Asian;
  s.demographics.gender = Gender::Female;
  s.demographics.residency = 0;
  s.demographics.birth_year = 1983;
  s.entry.sat_score = 1200;
  s.entry.act_score = 26;
  s.transcript = {course(kFirst, "MATH", 124, 5, 3.0)};
  return s;
}

// Closed-form width of a schema, counted block by block.
std::size_t expected_width(std::size_t majors, std::size_t departments, std::size_t gatekeeper_groups) {
  const std::size_t demographics = 6 + 3 + 7;
  const std::size_t schooling = 3, hispanic = 1, birth_year = 1, entry_year = 1, first_quarter = 4, scores = 2;
  return demographics + schooling + hispanic + birth_year + entry_year + first_quarter + scores + majors +
         4 * departments + 4 * gatekeeper_groups + 1 + 1;
}

std::size_t count_source(const FeatureSchema& schema, const std::string& source) {
  return static_cast<std::size_t>(std::count_if(schema.features.begin(), schema.features.end(),
                                                [&](const auto& f) { return f.source == source; }));
}

}  // namespace

TEST_CASE("department tuple") {
  const std::vector<TranscriptEntry> two_math = {course(kFirst, "MATH", 124, 5, 3.5),
                                                 course(kFirst, "MATH", 125, 5, 2.5)};
  auto t = department_tuple(two_math, "MATH");
  CHECK(t.took);
  CHECK(t.credits == 10.0);
  CHECK(t.classes == 2);
  REQUIRE(t.gpa);
  CHECK(*t.gpa == doctest::Approx(3.0));

  const auto none = department_tuple(two_math, "CHEM");
  CHECK_FALSE(none.took);
  CHECK(none.credits == 0.0);
  CHECK(none.classes == 0);
  CHECK_FALSE(none.gpa);

  const std::vector<TranscriptEntry> mixed = {course(kFirst, "ART", 100, 3, 4.0),
                                              course(kFirst, "ART", 105, 2, std::nullopt, "P")};
  t = department_tuple(mixed, "ART");
  CHECK(t.took);
  CHECK(t.credits == 5.0);
  CHECK(t.classes == 2);
  CHECK(*t.gpa == doctest::Approx(4.0));

  const std::vector<TranscriptEntry> weighted = {course(kFirst, "CHEM", 142, 5, 4.0),
                                                 course(kFirst, "CHEM", 143, 3, 2.0)};
  CHECK(*department_tuple(weighted, "CHEM").gpa == doctest::Approx((20.0 + 6.0) / 8.0));
}

TEST_CASE("gatekeeper tuple is the department tuple restricted to the course range") {
  const std::vector<TranscriptEntry> entries = {course(kFirst, "MATH", 124, 5, 3.0),
                                                course(kFirst, "MATH", 324, 5, 1.0),
                                                course(kFirst, "MATH", 99, 5, 2.0),
                                                course(kFirst, "PHYS", 121, 4, 4.0)};
  const GatekeeperGroup math{"math", "MATH", 100, 199};
  const auto g = gatekeeper_tuple(entries, math);
  const std::vector<TranscriptEntry> restricted = {entries[0]};
  const auto d = department_tuple(restricted, "MATH");
  CHECK(g.took == d.took);
  CHECK(g.credits == d.credits);
  CHECK(g.classes == d.classes);
  CHECK(*g.gpa == *d.gpa);

  const auto groups = default_gatekeeper_groups();
  REQUIRE(groups.size() == 4);
  CHECK(groups[0].department == "MATH");
  CHECK(default_gatekeeper_groups(100, 299)[2].course_max == 299);
}

TEST_CASE("schema width follows the closed form on a synthetic cohort") {
  SynthConfig cfg;
  cfg.n_students = 1000;
  cfg.n_departments = 12;
  cfg.n_majors = 20;
  const auto cohort = generate_cohort(cfg);
  const auto schema = fit_schema(cohort.records, FeatureConfig{});
  CHECK(schema.majors.size() == 20);
  CHECK(schema.departments.size() == 12);
  CHECK(schema.size() == expected_width(20, 12, 4));
  CHECK(schema.size() == 114);
  CHECK(count_source(schema, "departments") == 48);
  CHECK(count_source(schema, "gatekeepers") == 16);
}

TEST_CASE("196 departments give a 784-feature department block") {
  std::vector<StudentRecord> train;
  for (int d = 0; d < 196; ++d) {
    auto s = basic("S" + std::to_string(d));
    char code[8];
    std::snprintf(code, sizeof(code), "D%03d", d);
    s.transcript = {course(kFirst, code, 101, 5, 3.0)};
    train.push_back(s);
  }
  const auto schema = fit_schema(train, FeatureConfig{});
  CHECK(schema.departments.size() == 196);
  CHECK(count_source(schema, "departments") == 784);
  CHECK(schema.size() == expected_width(0, 196, 4));
}

TEST_CASE("major vocabulary keeps the most frequent codes, ties lexicographic") {
  std::vector<StudentRecord> train;
  for (int m = 150; m >= 0; --m) {  // 151 majors, each once, inserted in reverse
    auto s = basic("S" + std::to_string(m));
    char code[8];
    std::snprintf(code, sizeof(code), "M%04d", m);
    s.entry.first_term_majors = {code};
    train.push_back(s);
  }
  auto schema = fit_schema(train, FeatureConfig{});
  REQUIRE(schema.majors.size() == 150);
  CHECK(schema.majors.front() == "M0000");
  CHECK(schema.majors.back() == "M0149");

  train[0].entry.first_term_majors.push_back("M0150");  // M0150 now appears twice
  schema = fit_schema(train, FeatureConfig{});
  CHECK(schema.majors.front() == "M0150");
  CHECK(std::find(schema.majors.begin(), schema.majors.end(), "M0149") == schema.majors.end());

  FeatureConfig small;
  small.major_vocab_size = 3;
  CHECK(fit_schema(train, small).majors.size() == 3);
}

TEST_CASE("imputer") {
  SUBCASE("constant observed SAT") {
    std::vector<StudentRecord> train;
    for (int i = 0; i < 30; ++i) {
      auto s = basic("S" + std::to_string(i));
      s.demographics.race = static_cast<Race>(i % kRaceCount);
      s.demographics.birth_year = 1975 + i % 9;
      s.entry.act_score = 15 + i % 20;
      s.entry.sat_score = 1200;
      train.push_back(s);
    }
    const auto imp = fit_imputer(train, ImputationMode::Regression);
    auto probe = basic("P");
    probe.entry.sat_score.reset();
    CHECK(imp.sat_score(probe) == doctest::Approx(1200.0).epsilon(1e-9));
    probe.entry.act_score.reset();
    probe.demographics.race = Race::HawaiianPacificIslander;
    CHECK(imp.sat_score(probe) == doctest::Approx(1200.0).epsilon(1e-9));
  }
  SUBCASE("mean mode") {
    auto a = basic("A"), b = basic("B"), c = basic("C");
    a.entry.act_score = 20;
    b.entry.act_score = 30;
    c.entry.act_score.reset();
    const std::vector<StudentRecord> train = {a, b, c};
    const auto imp = fit_imputer(train, ImputationMode::Mean);
    CHECK(imp.act_score(c) == doctest::Approx(25.0));
    CHECK(imp.act_score(a) == 20.0);  // observed scores pass through
  }
  SUBCASE("no observed target") {
    auto a = basic("A");
    a.entry.sat_score.reset();
    const std::vector<StudentRecord> train = {a, a};
    CHECK_THROWS_AS(fit_imputer(train, ImputationMode::Regression), std::invalid_argument);
    CHECK_THROWS_AS(fit_imputer(train, ImputationMode::Mean), std::invalid_argument);
  }
}

TEST_CASE("SAT imputation on held-out synthetic rows") {
  // The generator draws SAT = 800 + 40 * (ability decile) + noise and ACT from
  // the same decile. Mask observed SATs of held-out rows, impute, compare.
  SynthConfig cfg;
  cfg.n_students = 6000;
  const auto cohort = generate_cohort(cfg);
  const std::span<const StudentRecord> all(cohort.records);
  const auto train = all.subspan(0, 4000);
  const auto held = all.subspan(4000);
  const auto imp = fit_imputer(train, ImputationMode::Regression);
  const auto mean_imp = fit_imputer(train, ImputationMode::Mean);

  double sum = 0, sq = 0, n = 0;
  for (const auto& s : train) {
    if (!s.entry.sat_score) continue;
    sum += *s.entry.sat_score;
    sq += double(*s.entry.sat_score) * *s.entry.sat_score;
    ++n;
  }
  const double sd = std::sqrt(sq / n - (sum / n) * (sum / n));

  int with_act = 0, with_act_within = 0, without = 0, reg_within = 0, mean_within = 0;
  for (const auto& original : held) {
    if (!original.entry.sat_score) continue;
    auto s = original;
    const double truth = *s.entry.sat_score;
    s.entry.sat_score.reset();
    const double reg = imp.sat_score(s);
    CHECK(std::isfinite(reg));
    CHECK((reg >= 400 && reg <= 1600));
    if (s.entry.act_score) {
      ++with_act;
      with_act_within += std::abs(reg - truth) <= sd;
    } else {
      ++without;
    }
    reg_within += std::abs(reg - truth) <= sd;
    mean_within += std::abs(mean_imp.sat_score(s) - truth) <= sd;
  }
  REQUIRE(with_act > 50);
  MESSAGE("within 1 SD: with ACT " << with_act_within << "/" << with_act << ", all "
                                   << reg_within << "/" << (with_act + without) << ", mean mode "
                                   << mean_within);
  // With the other score observed the second stage recovers the decile.
  CHECK(static_cast<double>(with_act_within) / with_act >= 0.95);
  // Overall at least as good as mean imputation.
  CHECK(reg_within >= mean_within);
}

TEST_CASE("one-hot blocks and encoding rules") {
  auto s = basic("A");
  s.entry.first_term_majors = {"M0001"};
  auto other = basic("B");
  other.entry.first_term_majors = {"M0002"};
  other.demographics.race = Race::Caucasian;
  other.demographics.gender = Gender::Male;
  other.first_term = Term(2002, Quarter::Winter);
  other.transcript = {course(other.first_term, "CHEM", 142, 5, 2.0)};
  const std::vector<StudentRecord> train = {s, other};
  const auto schema = fit_schema(train, FeatureConfig{});
  const auto x = encode(s, schema, Scaling::Raw);
  REQUIRE(x.size() == static_cast<Eigen::Index>(schema.size()));

  for (const char* block : {"race", "gender", "residency", "previous_schooling"}) {
    double ones = 0;
    for (std::size_t j = 0; j < schema.size(); ++j) {
      if (schema.features[j].source == block) ones += x[static_cast<Eigen::Index>(j)];
    }
    CHECK_MESSAGE(ones == 1.0, block);
  }
  CHECK(x[static_cast<Eigen::Index>(schema.index_of("race=Asian"))] == 1.0);
  CHECK(x[static_cast<Eigen::Index>(schema.index_of("gender=Female"))] == 1.0);
  CHECK(x[static_cast<Eigen::Index>(schema.index_of("residency=resident"))] == 1.0);
  CHECK(x[static_cast<Eigen::Index>(schema.index_of("prev_schooling=Freshman"))] == 1.0);
  CHECK(x[static_cast<Eigen::Index>(schema.index_of("first_quarter=autumn"))] == 1.0);
  CHECK(x[static_cast<Eigen::Index>(schema.index_of("birth_year"))] == 1983.0);
  CHECK(x[static_cast<Eigen::Index>(schema.index_of("entry_year"))] == 2001.0);
  CHECK(x[static_cast<Eigen::Index>(schema.index_of("major=M0001"))] == 1.0);
  CHECK(x[static_cast<Eigen::Index>(schema.index_of("dept:MATH:took"))] == 1.0);
  CHECK(x[static_cast<Eigen::Index>(schema.index_of("dept:CHEM:took"))] == 0.0);
  CHECK(x[static_cast<Eigen::Index>(schema.index_of("gatekeeper:math:classes"))] == 1.0);

  // Missing department GPA takes the training mean of that department.
  CHECK(x[static_cast<Eigen::Index>(schema.index_of("dept:CHEM:gpa"))] == doctest::Approx(2.0));

  auto unknown = basic("C");
  unknown.entry.first_term_majors = {"M9999"};
  unknown.transcript.push_back(course(kFirst, "ZOOL", 101, 5, 3.0, "", true));
  unknown.entry.fig_member = true;
  const auto u = encode(unknown, schema, Scaling::Raw);
  for (std::size_t j = 0; j < schema.size(); ++j) {
    if (schema.features[j].source == "majors") CHECK(u[static_cast<Eigen::Index>(j)] == 0.0);
  }
  CHECK(u[static_cast<Eigen::Index>(schema.index_of("remedial"))] == 1.0);
  CHECK(u[static_cast<Eigen::Index>(schema.index_of("fig_member"))] == 1.0);
  CHECK(u.size() == x.size());  // unseen department ignored

  CHECK_THROWS_AS((void)schema.index_of("nope"), std::out_of_range);
  CHECK(encode(s, schema) == encode(s, schema));
}

TEST_CASE("standardized cohort encodings") {
  SynthConfig cfg;
  cfg.n_students = 1500;
  const auto cohort = generate_cohort(cfg);
  const auto schema = fit_schema(cohort.records, FeatureConfig{});
  const auto X = encode_all(cohort.records, schema);
  CHECK(X.allFinite());
  for (std::size_t j = 0; j < schema.size(); ++j) {
    const auto col = X.col(static_cast<Eigen::Index>(j));
    if (schema.features[j].standardized) {
      const double mu = col.mean();
      const double sd = std::sqrt((col.array() - mu).square().mean());
      CHECK(std::abs(mu) < 1e-9);
      if (schema.sd[static_cast<Eigen::Index>(j)] > 0) CHECK(sd == doctest::Approx(1.0).epsilon(1e-9));
    } else {
      for (Eigen::Index i = 0; i < col.size(); ++i) CHECK((col[i] == 0.0 || col[i] == 1.0));
    }
  }
}

TEST_CASE("schema JSON round-trip") {
  SynthConfig cfg;
  cfg.n_students = 500;
  const auto cohort = generate_cohort(cfg);
  FeatureConfig fc;
  fc.imputation = ImputationMode::Regression;
  const auto schema = fit_schema(cohort.records, fc);
  const auto back = schema_from_json(nlohmann::json::parse(schema_to_json(schema).dump()));
  CHECK(back.hash() == schema.hash());
  CHECK(back.size() == schema.size());
  for (std::size_t i = 0; i < 50; ++i) {
    CHECK(encode(cohort.records[i], back) == encode(cohort.records[i], schema));
  }
  const auto other = fit_schema(std::span(cohort.records).subspan(0, 400), fc);
  CHECK(other.hash() != schema.hash());
}

TEST_CASE("fit_schema on empty input") {
  CHECK_THROWS_AS(fit_schema(std::span<const StudentRecord>{}, FeatureConfig{}), std::invalid_argument);
}

TEST_CASE("labels and targets") {
  LabeledDataset ds;
  ds.records.push_back({basic("A"), {true, 10, 24}});
  ds.records.push_back({basic("B"), {false, 4, 24}});
  CHECK(dropout_labels(ds) == Eigen::Vector2d(0, 1));
  CHECK(quarters_enrolled(ds) == Eigen::Vector2d(10, 4));
}
