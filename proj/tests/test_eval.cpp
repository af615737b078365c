#include <doctest.h>

#include <cmath>
#include <numeric>
#include <set>

#include "dropout/evaluation.hpp"
#include "dropout/metrics.hpp"
#include "dropout/random.hpp"
#include "dropout/synth.hpp"
#include "oracles.hpp"

using namespace dropout;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

LabeledDataset ids_only(std::size_t n) {
  LabeledDataset ds;
  for (std::size_t i = 0; i < n; ++i) {
    LabeledRecord r;
    r.student.student_id = "S" + std::to_string(i);
    r.label.graduated = i % 2 == 0;
    ds.records.push_back(r);
  }
  return ds;
}

// Column 0 drives the label, column 1 is noise, column 2 is constant.
void planted(Rng& rng, Eigen::Index n, Eigen::MatrixXd& X, Eigen::VectorXd& y) {
  X.resize(n, 3);
  y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    X(i, 0) = rng.normal();
    X(i, 1) = rng.normal();
    X(i, 2) = 1.0;
    y[i] = rng.bernoulli(1.0 / (1.0 + std::exp(-2.0 * X(i, 0)))) ? 1.0 : 0.0;
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Metrics

TEST_CASE("AUC examples") {
  CHECK(roc_and_auc(vec({0.9, 0.8, 0.3, 0.1}), vec({1, 1, 0, 0})).auc == 1.0);
  CHECK(roc_and_auc(vec({0.8, 0.5, 0.5, 0.2}), vec({1, 0, 1, 0})).auc == doctest::Approx(0.875));
  CHECK(roc_and_auc(vec({0.4, 0.4, 0.4, 0.4, 0.4}), vec({0, 1, 1, 0, 1})).auc == 0.5);
  CHECK(roc_and_auc(vec({0.1, 0.2}), vec({1, 0})).auc == 0.0);
  CHECK_THROWS_AS(roc_and_auc(vec({0.1, 0.2}), vec({1, 1})), std::invalid_argument);
  CHECK_THROWS_AS(roc_and_auc(vec({0.1, std::nan("")}), vec({1, 0})), std::invalid_argument);
  CHECK_THROWS_AS(roc_and_auc(vec({0.1, 0.2}), vec({1, 0, 1})), std::invalid_argument);
}

TEST_CASE("trapezoidal AUC equals the Mann-Whitney statistic") {
  Rng rng(101);
  for (int trial = 0; trial < 100; ++trial) {
    const auto n = static_cast<std::size_t>(rng.uniform_int(2, 50));
    std::vector<double> s(n);
    std::vector<int> l(n);
    for (std::size_t i = 0; i < n; ++i) {
      // Coarse scores so that ties are common.
      s[i] = trial % 2 ? static_cast<double>(rng.uniform_int(0, 5)) : rng.uniform();
      l[i] = i == 0 ? 0 : i == 1 ? 1 : static_cast<int>(rng.uniform_int(0, 1));
    }
    Eigen::VectorXd scores = Eigen::Map<Eigen::VectorXd>(s.data(), static_cast<Eigen::Index>(n));
    Eigen::VectorXd labels(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) labels[static_cast<Eigen::Index>(i)] = l[i];
    const auto curve = roc_and_auc(scores, labels);
    CHECK(std::abs(curve.auc - oracles::mann_whitney(s, l)) <= 1e-12);

    REQUIRE(curve.points.size() >= 2);
    CHECK(curve.points.front().fpr == 0.0);
    CHECK(curve.points.front().tpr == 0.0);
    CHECK(curve.points.back().fpr == 1.0);
    CHECK(curve.points.back().tpr == 1.0);
    for (std::size_t i = 1; i < curve.points.size(); ++i) {
      CHECK(curve.points[i].fpr >= curve.points[i - 1].fpr);
      CHECK(curve.points[i].tpr >= curve.points[i - 1].tpr);
      CHECK(curve.points[i].threshold < curve.points[i - 1].threshold);
    }
  }
}

TEST_CASE("accuracy") {
  CHECK(accuracy(vec({0.9, 0.1}), vec({1, 0})) == 1.0);
  CHECK(accuracy(vec({0.5, 0.5, 0.5, 0.5}), vec({1, 0, 1, 0})) == 0.5);
  CHECK(accuracy(vec({0.6, 0.4, 0.7}), vec({1, 1, 0})) == doctest::Approx(1.0 / 3.0));
  CHECK_THROWS_AS(accuracy(vec({0.6}), vec({1, 0})), std::invalid_argument);
}

TEST_CASE("rmse and trimming") {
  CHECK(rmse(vec({1, 2, 3}), vec({1, 2, 3})) == 0.0);
  CHECK(rmse(vec({0, 0}), vec({3, 4})) == doctest::Approx(std::sqrt(12.5)));
  CHECK(trimmed_rmse(vec({1, 2, 10}), 1.0 / 3.0) == doctest::Approx(std::sqrt(2.5)));
  CHECK(trimmed_rmse(vec({1, -2, 10}), 1.0 / 3.0) == doctest::Approx(std::sqrt(2.5)));
  CHECK(trimmed_rmse(vec({3, 4}), 0.0) == doctest::Approx(std::sqrt(12.5)));

  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::VectorXd e(static_cast<Eigen::Index>(rng.uniform_int(1, 200)));
    for (auto& v : e) v = rng.normal(0, 3);
    const double r0 = trimmed_rmse(e, 0.0), r5 = trimmed_rmse(e, 0.05), r10 = trimmed_rmse(e, 0.10);
    CHECK(r0 >= r5);
    CHECK(r5 >= r10);
  }
}

// ---------------------------------------------------------------------------
// Partitioning

TEST_CASE("split partitions the rows") {
  const auto ds = ids_only(100);
  const auto s = split(ds, 0.30, 7);
  CHECK(s.train.size() == 70);
  CHECK(s.test.size() == 30);
  std::set<std::string> seen;
  for (const auto* part : {&s.train, &s.test}) {
    for (const auto& r : part->records) CHECK(seen.insert(r.student.student_id).second);
  }
  CHECK(seen.size() == 100);
  CHECK(split(ds, 0.30, 7).indices.test == s.indices.test);
  CHECK(split(ds, 0.30, 8).indices.test != s.indices.test);

  CHECK(split_indices(32538, 0.30, 1).test.size() == 9761);  // floor(9761.4)
  CHECK_THROWS_AS(split(ds, 0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(split(ds, 1.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(split(ids_only(9), 0.3, 1), std::invalid_argument);
}

TEST_CASE("cv folds") {
  for (std::size_t n : {10u, 23u, 100u}) {
    const auto folds = cv_folds(n, 10, 3);
    REQUIRE(folds.size() == 10);
    std::vector<int> hits(n, 0);
    std::size_t lo = n, hi = 0;
    for (const auto& f : folds) {
      for (auto i : f) hits[i]++;
      lo = std::min(lo, f.size());
      hi = std::max(hi, f.size());
    }
    for (int h : hits) CHECK(h == 1);
    CHECK(hi - lo <= 1);
    CHECK(cv_folds(n, 10, 3) == folds);
  }
  CHECK(cv_folds(23, 10, 3)[0].size() == 3);  // first n % k folds carry the extra row
  CHECK_THROWS_AS(cv_folds(5, 10, 1), std::invalid_argument);
}

// ---------------------------------------------------------------------------
// Tuning

TEST_CASE("cv_tune basics") {
  Rng rng(12);
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  planted(rng, 200, X, y);
  CvOptions opts;
  const double single[] = {0.1};
  const auto one = cv_tune(X, y, ModelKind::Logistic, single, opts);
  CHECK(one.best == 0.1);
  REQUIRE(one.mean_score.size() == 1);
  CHECK(one.mean_score[0] > 0.7);
  CHECK_THROWS_AS(cv_tune(X, y, ModelKind::Logistic, std::span<const double>{}, opts), std::invalid_argument);
}

TEST_CASE("cv_tune ties go to the less complex value") {
  // A single separating feature: every tree is pure at depth one, so all
  // depth limits score the same.
  Eigen::MatrixXd X(60, 1);
  Eigen::VectorXd y(60);
  for (Eigen::Index i = 0; i < 60; ++i) {
    y[i] = i % 2;
    X(i, 0) = y[i] + 0.01 * static_cast<double>(i % 5);
  }
  CvOptions opts;
  opts.forest_trees = 10;
  const double depths[] = {8, 2, 4};
  const auto r = cv_tune(X, y, ModelKind::Forest, depths, opts);
  CHECK(r.mean_score[0] == r.mean_score[1]);
  CHECK(r.best == 2);
}

TEST_CASE("cv_tune agrees with an independent sweep") {
  Rng rng(13);
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  planted(rng, 300, X, y);
  X.col(2).setConstant(0.0);
  CvOptions opts;
  const std::vector<double> grid{1e-4, 1e-2, 1.0, 10.0};
  const auto r = cv_tune(X, y, ModelKind::Logistic, grid, opts);

  // Re-run the sweep directly.
  const auto folds = cv_folds(300, opts.folds, opts.seed);
  std::vector<double> recomputed;
  for (double lambda : grid) {
    double total = 0;
    for (const auto& val : folds) {
      std::vector<bool> is_val(300, false);
      for (auto i : val) is_val[i] = true;
      std::vector<std::size_t> train;
      for (std::size_t i = 0; i < 300; ++i) if (!is_val[i]) train.push_back(i);
      const auto m = train_logistic(take_rows(X, train), take_rows(y, train), lambda);
      total += roc_and_auc(predict_proba_all(m, take_rows(X, val)), take_rows(y, val)).auc;
    }
    recomputed.push_back(total / static_cast<double>(folds.size()));
  }
  const auto chosen = std::find(grid.begin(), grid.end(), r.best) - grid.begin();
  const double best = *std::max_element(recomputed.begin(), recomputed.end());
  CHECK(recomputed[static_cast<std::size_t>(chosen)] >= best - 0.02);
  for (std::size_t g = 0; g < grid.size(); ++g) CHECK(r.mean_score[g] == doctest::Approx(recomputed[g]).epsilon(1e-9));
}

TEST_CASE("knn and forest tuning pick sensible values") {
  Rng rng(14);
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  planted(rng, 300, X, y);
  CvOptions opts;
  opts.forest_trees = 20;
  const double ks[] = {1, 15, 31};
  const auto knn = cv_tune(X, y, ModelKind::Knn, ks, opts);
  CHECK(knn.best > 1);  // k = 1 overfits noisy labels
  const double depths[] = {1, 2, 4};
  const auto forest = cv_tune(X, y, ModelKind::Forest, depths, opts);
  CHECK(forest.mean_score[0] > 0.6);
}

// ---------------------------------------------------------------------------
// Screening

TEST_CASE("screening ranks the planted feature first") {
  Rng rng(15);
  Eigen::MatrixXd Xtr, Xte;
  Eigen::VectorXd ytr, yte;
  planted(rng, 2000, Xtr, ytr);
  planted(rng, 2000, Xte, yte);
  FeatureSchema schema;
  schema.features = {{"signal", "Signal", FeatureKind::Numeric, "test", true},
                     {"noise", "Noise", FeatureKind::Numeric, "test", true},
                     {"constant", "Constant", FeatureKind::Dummy, "test", false}};
  const auto rows = screen_features(Xtr, ytr, Xte, yte, schema);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].feature == "signal");
  CHECK(rows[0].label == "Signal");
  CHECK(rows[0].auc > 0.75);
  for (const auto& r : rows) {
    CHECK((r.accuracy >= 0.0 && r.accuracy <= 1.0));
    CHECK((r.auc >= 0.0 && r.auc <= 1.0));
    if (r.feature == "noise") CHECK(std::abs(r.auc - 0.5) <= 0.05);
    if (r.feature == "constant") {
      CHECK(r.degenerate);
      CHECK(r.auc == 0.5);
    } else {
      CHECK_FALSE(r.degenerate);
    }
  }
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i - 1].auc >= rows[i].auc);
}

// ---------------------------------------------------------------------------
// Timing

TEST_CASE("timing on a realizable target") {
  Rng rng(16);
  Eigen::MatrixXd X(200, 3);
  Eigen::VectorXd y(200);
  for (Eigen::Index i = 0; i < 200; ++i) {
    for (Eigen::Index j = 0; j < 3; ++j) X(i, j) = rng.normal();
    y[i] = 6 + 2 * X(i, 0) - X(i, 1) + 0.5 * X(i, 2);
  }
  const double grid[] = {0.0, 0.1, 1.0};
  const auto r = timing_experiment(X, y, grid, {});
  CHECK(r.lambda == 0.0);
  CHECK(r.rmse < 1e-3);
  CHECK(r.n_test == 60);
  CHECK(r.n_train == 140);
  CHECK(r.rmse >= r.rmse_drop5);
  CHECK(r.rmse_drop5 >= r.rmse_drop10);
  CHECK(r.mean_target == doctest::Approx(y.mean()));

  CHECK_THROWS_AS(timing_experiment(X.topRows(19), y.head(19), grid, {}), std::invalid_argument);
}

TEST_CASE("timing on synthetic non-completions uses only the training side") {
  SynthConfig cfg;
  cfg.n_students = 1200;
  const auto cohort = generate_cohort(cfg);
  const auto ncs = non_completions_only(label_all(cohort.records));
  REQUIRE(ncs.size() >= kMinTimingRows);
  const double grid[] = {0.01, 1.0};
  TimingOptions opts;
  const auto r = timing_experiment(ncs, FeatureConfig{}, grid, opts);
  CHECK(r.n_train + r.n_test == ncs.size());
  CHECK(r.rmse > 0);
  CHECK(r.rmse >= r.rmse_drop5);
  CHECK(r.rmse_drop5 >= r.rmse_drop10);

  // Perturbing a held-out row leaves everything fitted on the training side alone.
  const auto parts = split_indices(ncs.size(), opts.test_fraction, opts.split_seed);
  auto altered = ncs;
  auto& victim = altered.records[parts.test.front()].student;
  victim.entry.sat_score = 1600;
  victim.entry.first_term_majors = {"M9999"};
  const auto r2 = timing_experiment(altered, FeatureConfig{}, grid, opts);
  CHECK(r2.cv.mean_score == r.cv.mean_score);
  CHECK(r2.lambda == r.lambda);

  const auto split_ds = split(ncs, opts.test_fraction, opts.split_seed);
  CHECK(fit_schema(split_ds.train, FeatureConfig{}).hash() ==
        fit_schema(split(altered, opts.test_fraction, opts.split_seed).train, FeatureConfig{}).hash());

  LabeledDataset tiny;
  tiny.records.assign(ncs.records.begin(), ncs.records.begin() + 19);
  CHECK_THROWS_AS(timing_experiment(tiny, FeatureConfig{}, grid, opts), std::invalid_argument);
}

// ---------------------------------------------------------------------------
// Reports

TEST_CASE("report JSON shape") {
  const auto ev = evaluate_scores("logistic", vec({0.9, 0.2, 0.6, 0.4}), vec({1, 0, 0, 1}));
  CHECK(ev.auc == doctest::Approx(0.75));
  CHECK(ev.accuracy == doctest::Approx(0.5));
  EvalReport report;
  report.models = {ev};
  report.split_seed = 4;
  const auto j = to_json(report);
  CHECK(j.at("split_seed") == 4);
  const auto& m = j.at("models").at(0);
  CHECK(m.at("model") == "logistic");
  CHECK(m.contains("accuracy"));
  CHECK(m.contains("auc"));
  const auto& roc = m.at("roc_points");
  CHECK(roc.front().at(0) == 0.0);
  CHECK(roc.front().at(2).is_null());
  CHECK(roc.back().at(0) == 1.0);
  CHECK(roc.back().at(1) == 1.0);
}
