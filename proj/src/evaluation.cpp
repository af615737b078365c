#include "dropout/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "dropout/forest.hpp"
#include "dropout/knn.hpp"
#include "dropout/random.hpp"

namespace dropout {

IndexSplit split_indices(std::size_t n, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw std::invalid_argument("split: test fraction must be in (0, 1)");
  }
  if (n < 10) throw std::invalid_argument("split: need at least 10 rows");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(order);
  const auto n_test = static_cast<std::size_t>(std::floor(static_cast<double>(n) * test_fraction));
  IndexSplit out;
  out.test.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
  out.train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
  std::sort(out.test.begin(), out.test.end());
  std::sort(out.train.begin(), out.train.end());
  return out;
}

DatasetSplit split(const LabeledDataset& ds, double test_fraction, std::uint64_t seed) {
  DatasetSplit out;
  out.indices = split_indices(ds.size(), test_fraction, seed);
  for (auto i : out.indices.train) out.train.records.push_back(ds.records[i]);
  for (auto i : out.indices.test) out.test.records.push_back(ds.records[i]);
  out.train.balanced = out.test.balanced = false;
  return out;
}

std::vector<std::vector<std::size_t>> cv_folds(std::size_t n, int folds, std::uint64_t seed) {
  if (folds < 2) throw std::invalid_argument("cv: need at least two folds");
  if (n < static_cast<std::size_t>(folds)) throw std::invalid_argument("cv: fewer rows than folds");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(order);
  const auto k = static_cast<std::size_t>(folds);
  std::vector<std::vector<std::size_t>> out(k);
  std::size_t at = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t size = n / k + (f < n % k ? 1 : 0);
    out[f].assign(order.begin() + static_cast<std::ptrdiff_t>(at),
                  order.begin() + static_cast<std::ptrdiff_t>(at + size));
    std::sort(out[f].begin(), out[f].end());
    at += size;
  }
  return out;
}

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& X, std::span<const std::size_t> rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), X.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = X.row(static_cast<Eigen::Index>(rows[i]));
  }
  return out;
}

Eigen::VectorXd take_rows(const Eigen::VectorXd& y, std::span<const std::size_t> rows) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out[static_cast<Eigen::Index>(i)] = y[static_cast<Eigen::Index>(rows[i])];
  }
  return out;
}

std::string_view to_string(ModelKind k) {
  switch (k) {
    case ModelKind::Logistic: return "logistic";
    case ModelKind::Knn: return "knn";
    case ModelKind::Forest: return "forest";
    case ModelKind::Ridge: return "ridge";
  }
  return "logistic";
}

ModelKind parse_model_kind(std::string_view text) {
  for (auto k : {ModelKind::Logistic, ModelKind::Knn, ModelKind::Forest, ModelKind::Ridge}) {
    if (to_string(k) == text) return k;
  }
  throw std::invalid_argument("unknown model kind '" + std::string(text) + "'");
}

namespace {

int as_int(double v, const char* what) {
  const double r = std::round(v);
  if (r != v || r < 1.0) throw std::invalid_argument(std::string("cv: ") + what + " grid values must be positive integers");
  return static_cast<int>(r);
}

// Per-grid-value validation scores for one fold.
std::vector<double> fold_scores(const Eigen::MatrixXd& X_tr, const Eigen::VectorXd& y_tr,
                                const Eigen::MatrixXd& X_va, const Eigen::VectorXd& y_va,
                                ModelKind kind, std::span<const double> grid,
                                const CvOptions& opts, std::size_t fold) {
  std::vector<double> scores(grid.size());
  switch (kind) {
    case ModelKind::Logistic:
      for (std::size_t g = 0; g < grid.size(); ++g) {
        const auto m = train_logistic(X_tr, y_tr, grid[g], opts.descent);
        scores[g] = roc_and_auc(predict_proba_all(m, X_va), y_va).auc;
      }
      break;
    case ModelKind::Ridge:
      for (std::size_t g = 0; g < grid.size(); ++g) {
        const auto m = train_ridge(X_tr, y_tr, grid[g], opts.descent);
        scores[g] = rmse(predict_values(m, X_va), y_va);
      }
      break;
    case ModelKind::Knn: {
      int k_max = 0;
      for (double v : grid) {
        const int k = as_int(v, "k");
        if (k % 2 == 0) throw std::invalid_argument("cv: k must be odd");
        k_max = std::max(k_max, k);
      }
      if (k_max > X_tr.rows()) throw std::invalid_argument("cv: k exceeds fold training size");
      std::vector<Eigen::VectorXd> by_k(grid.size(), Eigen::VectorXd(X_va.rows()));
      std::vector<double> prefix(static_cast<std::size_t>(k_max) + 1);
      for (Eigen::Index i = 0; i < X_va.rows(); ++i) {
        const auto nn = nearest_neighbors(X_tr, X_va.row(i).transpose(), k_max);
        prefix[0] = 0.0;
        for (std::size_t j = 0; j < nn.size(); ++j) prefix[j + 1] = prefix[j] + y_tr[nn[j]];
        for (std::size_t g = 0; g < grid.size(); ++g) {
          const auto k = static_cast<std::size_t>(grid[g]);
          by_k[g][i] = prefix[k] / static_cast<double>(k);
        }
      }
      for (std::size_t g = 0; g < grid.size(); ++g) scores[g] = roc_and_auc(by_k[g], y_va).auc;
      break;
    }
    case ModelKind::Forest: {
      int d_max = 0;
      for (double v : grid) d_max = std::max(d_max, as_int(v, "depth"));
      ForestParams params;
      params.n_trees = opts.forest_trees;
      params.max_depth = d_max;
      // A deep forest cut at depth d equals a forest grown to depth d.
      const auto forest = train_forest(X_tr, y_tr, params, derive_seed(opts.forest_seed, fold));
      for (std::size_t g = 0; g < grid.size(); ++g) {
        scores[g] = roc_and_auc(forest_predict_all(forest, X_va, static_cast<int>(grid[g])), y_va).auc;
      }
      break;
    }
  }
  return scores;
}

}  // namespace

CvResult cv_tune(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, ModelKind kind,
                 std::span<const double> grid, const CvOptions& opts) {
  if (grid.empty()) throw std::invalid_argument("cv: empty hyperparameter grid");
  if (X.rows() != y.size()) throw std::invalid_argument("cv: rows(X) and len(y) differ");
  const auto folds = cv_folds(static_cast<std::size_t>(X.rows()), opts.folds, opts.seed);

  CvResult result;
  result.grid.assign(grid.begin(), grid.end());
  result.mean_score.assign(grid.size(), 0.0);
  std::vector<char> in_fold(static_cast<std::size_t>(X.rows()));
  for (std::size_t f = 0; f < folds.size(); ++f) {
    std::fill(in_fold.begin(), in_fold.end(), 0);
    for (auto i : folds[f]) in_fold[i] = 1;
    std::vector<std::size_t> train_rows;
    for (std::size_t i = 0; i < in_fold.size(); ++i) {
      if (!in_fold[i]) train_rows.push_back(i);
    }
    const auto scores = fold_scores(take_rows(X, train_rows), take_rows(y, train_rows),
                                    take_rows(X, folds[f]), take_rows(y, folds[f]), kind, grid,
                                    opts, f);
    for (std::size_t g = 0; g < grid.size(); ++g) result.mean_score[g] += scores[g];
  }
  for (auto& s : result.mean_score) s /= static_cast<double>(folds.size());

  const bool maximise = kind != ModelKind::Ridge;
  std::size_t best = 0;
  for (std::size_t g = 1; g < grid.size(); ++g) {
    const double a = result.mean_score[g];
    const double b = result.mean_score[best];
    const bool better = maximise ? a > b : a < b;
    if (better || (a == b && grid[g] < grid[best])) best = g;
  }
  result.best = grid[best];
  return result;
}

ModelEvaluation evaluate_scores(std::string model, VectorRef scores, VectorRef labels) {
  ModelEvaluation e;
  e.model = std::move(model);
  auto roc = roc_and_auc(scores, labels);
  e.auc = roc.auc;
  e.roc = std::move(roc.points);
  e.accuracy = accuracy(scores, labels);
  return e;
}

std::vector<ScreenRow> screen_features(const Eigen::MatrixXd& X_train, const Eigen::VectorXd& y_train,
                                       const Eigen::MatrixXd& X_test, const Eigen::VectorXd& y_test,
                                       const FeatureSchema& schema, double lambda,
                                       const DescentOptions& descent) {
  if (X_train.cols() != static_cast<Eigen::Index>(schema.size()) || X_test.cols() != X_train.cols()) {
    throw std::invalid_argument("screen: matrices do not match the schema");
  }
  std::vector<ScreenRow> rows;
  rows.reserve(schema.size());
  const double base_rate = y_train.mean();
  for (Eigen::Index j = 0; j < X_train.cols(); ++j) {
    ScreenRow row;
    row.feature = schema.features[static_cast<std::size_t>(j)].name;
    row.label = schema.features[static_cast<std::size_t>(j)].label;
    const auto column = X_train.col(j);
    row.degenerate = column.maxCoeff() == column.minCoeff();
    Eigen::VectorXd scores;
    if (row.degenerate) {
      scores = Eigen::VectorXd::Constant(X_test.rows(), base_rate);
    } else {
      const auto m = train_logistic(Eigen::MatrixXd(column), y_train, lambda, descent);
      scores = predict_proba_all(m, Eigen::MatrixXd(X_test.col(j)));
    }
    row.auc = roc_and_auc(scores, y_test).auc;
    row.accuracy = accuracy(scores, y_test);
    rows.push_back(std::move(row));
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const ScreenRow& a, const ScreenRow& b) { return a.auc > b.auc; });
  return rows;
}

namespace {

TimingReport timing_on_partitions(const Eigen::MatrixXd& X_tr, const Eigen::VectorXd& y_tr,
                                  const Eigen::MatrixXd& X_te, const Eigen::VectorXd& y_te,
                                  const Eigen::VectorXd& y_all, std::span<const double> grid,
                                  const TimingOptions& opts) {
  TimingReport r;
  CvOptions cv;
  cv.folds = opts.folds;
  cv.seed = opts.cv_seed;
  cv.descent = opts.descent;
  r.cv = cv_tune(X_tr, y_tr, ModelKind::Ridge, grid, cv);
  r.lambda = r.cv.best;
  const auto model = train_ridge(X_tr, y_tr, r.lambda, opts.descent);
  const Eigen::VectorXd errors = predict_values(model, X_te) - y_te;
  r.rmse = trimmed_rmse(errors, 0.0);
  r.rmse_drop5 = trimmed_rmse(errors, 0.05);
  r.rmse_drop10 = trimmed_rmse(errors, 0.10);
  r.mean_target = y_all.mean();
  r.sd_target = std::sqrt((y_all.array() - r.mean_target).square().sum() /
                          static_cast<double>(std::max<Eigen::Index>(y_all.size() - 1, 1)));
  r.n_train = static_cast<std::size_t>(X_tr.rows());
  r.n_test = static_cast<std::size_t>(X_te.rows());
  return r;
}

}  // namespace

TimingReport timing_experiment(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                               std::span<const double> grid, const TimingOptions& opts) {
  if (static_cast<std::size_t>(X.rows()) < kMinTimingRows) {
    throw std::invalid_argument("timing: need at least 20 non-completion rows");
  }
  if (X.rows() != y.size()) throw std::invalid_argument("timing: rows(X) and len(y) differ");
  const auto parts = split_indices(static_cast<std::size_t>(X.rows()), opts.test_fraction, opts.split_seed);
  return timing_on_partitions(take_rows(X, parts.train), take_rows(y, parts.train),
                              take_rows(X, parts.test), take_rows(y, parts.test), y, grid, opts);
}

TimingReport timing_experiment(const LabeledDataset& ncs, const FeatureConfig& features,
                               std::span<const double> grid, const TimingOptions& opts) {
  if (ncs.size() < kMinTimingRows) throw std::invalid_argument("timing: need at least 20 non-completion rows");
  for (const auto& r : ncs.records) {
    if (r.label.graduated) throw std::invalid_argument("timing: rows must all be non-completions");
  }
  const auto parts = split(ncs, opts.test_fraction, opts.split_seed);
  const auto schema = fit_schema(parts.train, features);
  return timing_on_partitions(encode_all(parts.train, schema), quarters_enrolled(parts.train),
                              encode_all(parts.test, schema), quarters_enrolled(parts.test),
                              quarters_enrolled(ncs), grid, opts);
}

nlohmann::json to_json(const CvResult& cv) {
  return {{"best", cv.best}, {"grid", cv.grid}, {"mean_score", cv.mean_score}};
}

nlohmann::json to_json(const EvalReport& report) {
  nlohmann::json models = nlohmann::json::array();
  for (const auto& m : report.models) {
    nlohmann::json roc = nlohmann::json::array();
    for (const auto& p : m.roc) {
      roc.push_back({p.fpr, p.tpr, std::isfinite(p.threshold) ? nlohmann::json(p.threshold) : nlohmann::json()});
    }
    models.push_back({{"model", m.model},
                      {"accuracy", m.accuracy},
                      {"auc", m.auc},
                      {"hyperparameter", {{"name", m.hyperparameter_name}, {"value", m.hyperparameter}}},
                      {"cv", to_json(m.cv)},
                      {"roc_points", roc}});
  }
  return {{"split_seed", report.split_seed},
          {"n_train", report.n_train},
          {"n_test", report.n_test},
          {"models", models}};
}

nlohmann::json to_json(const TimingReport& r) {
  return {{"rmse", r.rmse},
          {"rmse_drop5", r.rmse_drop5},
          {"rmse_drop10", r.rmse_drop10},
          {"mean_target", r.mean_target},
          {"sd_target", r.sd_target},
          {"lambda", r.lambda},
          {"n_train", r.n_train},
          {"n_test", r.n_test},
          {"cv", to_json(r.cv)}};
}

nlohmann::json to_json(const std::vector<ScreenRow>& rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : rows) {
    out.push_back({{"feature", r.feature},
                   {"label", r.label},
                   {"accuracy", r.accuracy},
                   {"auc", r.auc},
                   {"degenerate", r.degenerate}});
  }
  return out;
}

}  // namespace dropout
