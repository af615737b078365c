#include "dropout/model_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace dropout {

namespace {

nlohmann::json vec(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd vec_from(const nlohmann::json& j) {
  auto values = j.get<std::vector<double>>();
  return Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

nlohmann::json linear_json(const LinearModel& m) {
  return {{"weights", vec(m.weights)},
          {"intercept", m.intercept},
          {"lambda", m.lambda},
          {"task", m.task == LinearTask::Classification ? "classification" : "regression"}};
}

LinearModel linear_from(const nlohmann::json& j) {
  LinearModel m;
  m.weights = vec_from(j.at("weights"));
  m.intercept = j.at("intercept").get<double>();
  m.lambda = j.at("lambda").get<double>();
  m.task = j.at("task").get<std::string>() == "regression" ? LinearTask::Regression
                                                           : LinearTask::Classification;
  return m;
}

nlohmann::json knn_json(const KnnModel& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.points.rows(); ++i) rows.push_back(vec(m.points.row(i).transpose()));
  return {{"k", m.k}, {"labels", vec(m.labels)}, {"points", rows}};
}

KnnModel knn_from(const nlohmann::json& j) {
  const auto& rows = j.at("points");
  const auto labels = vec_from(j.at("labels"));
  const auto n = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index d = n > 0 ? static_cast<Eigen::Index>(rows.at(0).size()) : 0;
  Eigen::MatrixXd points(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto row = vec_from(rows.at(static_cast<std::size_t>(i)));
    if (row.size() != d) throw std::invalid_argument("knn model: ragged point rows");
    points.row(i) = row.transpose();
  }
  return fit_knn(std::move(points), labels, j.at("k").get<int>());
}

// Trees are stored column-wise to keep files compact.
nlohmann::json forest_json(const ForestModel& m) {
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& t : m.trees) {
    std::vector<int> feature, left, right, depth, samples;
    std::vector<double> threshold, rate;
    for (const auto& n : t.nodes) {
      feature.push_back(n.feature);
      threshold.push_back(n.threshold);
      left.push_back(n.left);
      right.push_back(n.right);
      rate.push_back(n.positive_rate);
      depth.push_back(n.depth);
      samples.push_back(n.samples);
    }
    trees.push_back({{"feature", feature}, {"threshold", threshold}, {"left", left},
                     {"right", right}, {"positive_rate", rate}, {"depth", depth},
                     {"samples", samples}});
  }
  return {{"n_trees", m.params.n_trees},
          {"max_depth", m.params.max_depth},
          {"features_per_split", m.params.features_per_split},
          {"seed", m.seed},
          {"n_features", m.n_features},
          {"trees", trees}};
}

ForestModel forest_from(const nlohmann::json& j) {
  ForestModel m;
  m.params.n_trees = j.at("n_trees").get<int>();
  m.params.max_depth = j.at("max_depth").get<int>();
  m.params.features_per_split = j.at("features_per_split").get<int>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.n_features = j.at("n_features").get<int>();
  for (const auto& t : j.at("trees")) {
    const auto feature = t.at("feature").get<std::vector<int>>();
    const auto threshold = t.at("threshold").get<std::vector<double>>();
    const auto left = t.at("left").get<std::vector<int>>();
    const auto right = t.at("right").get<std::vector<int>>();
    const auto rate = t.at("positive_rate").get<std::vector<double>>();
    const auto depth = t.at("depth").get<std::vector<int>>();
    const auto samples = t.at("samples").get<std::vector<int>>();
    const auto n = feature.size();
    if (n == 0 || threshold.size() != n || left.size() != n || right.size() != n ||
        rate.size() != n || depth.size() != n || samples.size() != n) {
      throw std::invalid_argument("forest model: malformed tree");
    }
    DecisionTree tree;
    for (std::size_t i = 0; i < n; ++i) {
      const bool leaf = feature[i] < 0;
      const auto bad = [&](int child) { return child < 0 || static_cast<std::size_t>(child) >= n; };
      if (!leaf && (feature[i] >= m.n_features || bad(left[i]) || bad(right[i]))) {
        throw std::invalid_argument("forest model: node references out of range");
      }
      tree.nodes.push_back({feature[i], threshold[i], left[i], right[i], rate[i], depth[i], samples[i]});
    }
    m.trees.push_back(std::move(tree));
  }
  if (m.trees.empty()) throw std::invalid_argument("forest model: no trees");
  return m;
}

}  // namespace

Scaling scaling_for(ModelKind kind) {
  return kind == ModelKind::Forest ? Scaling::Raw : Scaling::Standardized;
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

nlohmann::json to_json(const StoredModel& m) {
  nlohmann::json j{{"kind", to_string(m.kind)}, {"schema_hash", hash_hex(m.schema_hash)}, {"cv", to_json(m.cv)}};
  switch (m.kind) {
    case ModelKind::Logistic:
    case ModelKind::Ridge:
      j["hyperparameters"] = {{"lambda", std::get<LinearModel>(m.model).lambda}};
      j["model"] = linear_json(std::get<LinearModel>(m.model));
      break;
    case ModelKind::Knn:
      j["hyperparameters"] = {{"k", std::get<KnnModel>(m.model).k}};
      j["model"] = knn_json(std::get<KnnModel>(m.model));
      break;
    case ModelKind::Forest: {
      const auto& f = std::get<ForestModel>(m.model);
      j["hyperparameters"] = {{"max_depth", f.params.max_depth}, {"n_trees", f.params.n_trees}};
      j["model"] = forest_json(f);
      break;
    }
  }
  return j;
}

StoredModel stored_model_from_json(const nlohmann::json& j) {
  StoredModel m;
  m.kind = parse_model_kind(j.at("kind").get<std::string>());
  m.schema_hash = std::stoull(j.at("schema_hash").get<std::string>(), nullptr, 16);
  const auto& cv = j.at("cv");
  m.cv.best = cv.at("best").get<double>();
  m.cv.grid = cv.at("grid").get<std::vector<double>>();
  m.cv.mean_score = cv.at("mean_score").get<std::vector<double>>();
  const auto& body = j.at("model");
  switch (m.kind) {
    case ModelKind::Logistic:
    case ModelKind::Ridge: m.model = linear_from(body); break;
    case ModelKind::Knn: m.model = knn_from(body); break;
    case ModelKind::Forest: m.model = forest_from(body); break;
  }
  return m;
}

void save_model(const std::filesystem::path& file, const StoredModel& m) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error(file.string() + ": cannot open for writing");
  out << to_json(m).dump() << '\n';
  if (!out) throw std::runtime_error(file.string() + ": write failed");
}

StoredModel load_model(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error(file.string() + ": cannot open");
  return stored_model_from_json(nlohmann::json::parse(in));
}

Eigen::VectorXd predict_scores(const StoredModel& m, const FeatureSchema& schema,
                               const Eigen::MatrixXd& X) {
  if (m.schema_hash != schema.hash()) {
    throw SchemaMismatch("model was trained against schema " + hash_hex(m.schema_hash) +
                         " but features use schema " + hash_hex(schema.hash()));
  }
  switch (m.kind) {
    case ModelKind::Logistic: return predict_proba_all(std::get<LinearModel>(m.model), X);
    case ModelKind::Ridge: return predict_values(std::get<LinearModel>(m.model), X);
    case ModelKind::Knn: return knn_predict_all(std::get<KnnModel>(m.model), X);
    case ModelKind::Forest: return forest_predict_all(std::get<ForestModel>(m.model), X);
  }
  return {};
}

}  // namespace dropout
