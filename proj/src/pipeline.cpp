#include "dropout/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "dropout/csv.hpp"
#include "dropout/evaluation.hpp"
#include "dropout/forest.hpp"
#include "dropout/ingest.hpp"
#include "dropout/knn.hpp"
#include "dropout/labeling.hpp"
#include "dropout/model_io.hpp"

namespace dropout {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::vector<double> Grids::odd_range(int lo, int hi) {
  std::vector<double> out;
  for (int k = lo; k <= hi; k += 2) out.push_back(k);
  return out;
}

std::vector<std::pair<std::string, std::string>> RunConfig::default_gatekeeper_departments() {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& g : default_gatekeeper_groups()) out.emplace_back(g.name, g.department);
  return out;
}

FeatureConfig RunConfig::feature_config() const {
  FeatureConfig fc;
  fc.major_vocab_size = major_vocab_size;
  fc.imputation = imputation;
  fc.residency_labels = residency_labels;
  fc.gatekeepers.clear();
  for (const auto& [name, dept] : gatekeeper_departments) {
    fc.gatekeepers.push_back({name, dept, gatekeeper_course_min, gatekeeper_course_max});
  }
  return fc;
}

void RunConfig::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("config: " + msg); };
  if (!(degree_credits > 0.0) || !std::isfinite(degree_credits)) fail("degree_credits must be positive");
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) fail("test_fraction must lie in (0, 1)");
  if (cv_folds < 2) fail("cv_folds must be at least 2");
  if (forest_trees < 1) fail("forest.n_trees must be at least 1");
  if (!(screen_lambda >= 0.0) || !std::isfinite(screen_lambda)) fail("screen_lambda must be >= 0");
  if (gatekeeper_course_min > gatekeeper_course_max) fail("gatekeeper.course_min exceeds course_max");
  auto check_lambdas = [&](const std::vector<double>& g, const char* name) {
    if (g.empty()) fail(std::string("grids.") + name + " is empty");
    for (double v : g) {
      if (!(v >= 0.0) || !std::isfinite(v)) fail(std::string("grids.") + name + " values must be >= 0");
    }
  };
  check_lambdas(grids.logistic_lambda, "logistic_lambda");
  check_lambdas(grids.timing_lambda, "timing_lambda");
  if (grids.knn_k.empty()) fail("grids.knn_k is empty");
  for (double k : grids.knn_k) {
    if (k < 1 || k != std::floor(k) || static_cast<long long>(k) % 2 == 0) {
      fail("grids.knn_k values must be positive odd integers");
    }
  }
  if (grids.forest_depth.empty()) fail("grids.forest_depth is empty");
  for (double d : grids.forest_depth) {
    if (d < 1 || d > 62 || d != std::floor(d)) fail("grids.forest_depth values must be integers in [1, 62]");
  }
  std::set<std::string> seen;
  for (const auto& [name, dept] : gatekeeper_departments) {
    if (name.empty() || dept.empty()) fail("gatekeeper departments need a name and a code");
    if (!seen.insert(name).second) fail("duplicate gatekeeper group '" + name + "'");
  }
  synth.validate();
}

// ---------------------------------------------------------------------------
// Config JSON

namespace {

void check_keys(const json& j, std::initializer_list<std::string_view> allowed, const std::string& where) {
  if (!j.is_object()) throw std::invalid_argument("config: " + where + " must be an object");
  for (const auto& item : j.items()) {
    bool known = false;
    for (auto a : allowed) known = known || item.key() == a;
    if (!known) throw std::invalid_argument("config: unknown key '" + where + item.key() + "'");
  }
}

template <class T>
void get_if(const json& j, const char* key, T& field) {
  if (j.contains(key)) j.at(key).get_to(field);
}

}  // namespace

json to_json(const RunConfig& cfg) {
  SynthConfig synth = cfg.synth;
  synth.seed = cfg.seeds.synth;
  synth.degree_credits = cfg.degree_credits;
  json gatekeeper_departments = json::array();
  for (const auto& [name, dept] : cfg.gatekeeper_departments) gatekeeper_departments.push_back({name, dept});
  return {{"data_dir", cfg.data_path().generic_string()},
          {"out_dir", cfg.out_dir.generic_string()},
          {"degree_credits", cfg.degree_credits},
          {"imputation", to_string(cfg.imputation)},
          {"test_fraction", cfg.test_fraction},
          {"cv_folds", cfg.cv_folds},
          {"major_vocab_size", cfg.major_vocab_size},
          {"screen_lambda", cfg.screen_lambda},
          {"forest", {{"n_trees", cfg.forest_trees}}},
          {"grids",
           {{"logistic_lambda", cfg.grids.logistic_lambda},
            {"knn_k", cfg.grids.knn_k},
            {"forest_depth", cfg.grids.forest_depth},
            {"timing_lambda", cfg.grids.timing_lambda}}},
          {"seeds",
           {{"split", cfg.seeds.split},
            {"cv", cfg.seeds.cv},
            {"sampling", cfg.seeds.sampling},
            {"synth", cfg.seeds.synth},
            {"forest", cfg.seeds.forest}}},
          {"gatekeeper",
           {{"course_min", cfg.gatekeeper_course_min},
            {"course_max", cfg.gatekeeper_course_max},
            {"departments", gatekeeper_departments}}},
          {"residency_labels", cfg.residency_labels},
          {"synth", synth}};
}

RunConfig run_config_from_json(const json& j) {
  check_keys(j,
             {"data_dir", "out_dir", "degree_credits", "imputation", "test_fraction", "cv_folds",
              "major_vocab_size", "screen_lambda", "forest", "grids", "seeds", "gatekeeper",
              "residency_labels", "synth"},
             "");
  RunConfig cfg;
  if (j.contains("data_dir")) cfg.data_dir = j.at("data_dir").get<std::string>();
  if (j.contains("out_dir")) cfg.out_dir = j.at("out_dir").get<std::string>();
  get_if(j, "degree_credits", cfg.degree_credits);
  if (j.contains("imputation")) cfg.imputation = parse_imputation_mode(j.at("imputation").get<std::string>());
  get_if(j, "test_fraction", cfg.test_fraction);
  get_if(j, "cv_folds", cfg.cv_folds);
  get_if(j, "major_vocab_size", cfg.major_vocab_size);
  get_if(j, "screen_lambda", cfg.screen_lambda);
  if (j.contains("forest")) {
    check_keys(j.at("forest"), {"n_trees"}, "forest.");
    get_if(j.at("forest"), "n_trees", cfg.forest_trees);
  }
  if (j.contains("grids")) {
    const auto& g = j.at("grids");
    check_keys(g, {"logistic_lambda", "knn_k", "forest_depth", "timing_lambda"}, "grids.");
    get_if(g, "logistic_lambda", cfg.grids.logistic_lambda);
    get_if(g, "knn_k", cfg.grids.knn_k);
    get_if(g, "forest_depth", cfg.grids.forest_depth);
    get_if(g, "timing_lambda", cfg.grids.timing_lambda);
  }
  if (j.contains("synth")) {
    cfg.synth = j.at("synth").get<SynthConfig>();
    cfg.seeds.synth = cfg.synth.seed;
    if (!j.contains("degree_credits")) cfg.degree_credits = cfg.synth.degree_credits;
  }
  if (j.contains("seeds")) {
    const auto& s = j.at("seeds");
    check_keys(s, {"split", "cv", "sampling", "synth", "forest"}, "seeds.");
    get_if(s, "split", cfg.seeds.split);
    get_if(s, "cv", cfg.seeds.cv);
    get_if(s, "sampling", cfg.seeds.sampling);
    get_if(s, "synth", cfg.seeds.synth);
    get_if(s, "forest", cfg.seeds.forest);
  }
  if (j.contains("gatekeeper")) {
    const auto& g = j.at("gatekeeper");
    check_keys(g, {"course_min", "course_max", "departments"}, "gatekeeper.");
    get_if(g, "course_min", cfg.gatekeeper_course_min);
    get_if(g, "course_max", cfg.gatekeeper_course_max);
    if (g.contains("departments")) {
      cfg.gatekeeper_departments.clear();
      for (const auto& pair : g.at("departments")) {
        if (!pair.is_array() || pair.size() != 2) {
          throw std::invalid_argument("config: gatekeeper.departments entries must be [name, code]");
        }
        cfg.gatekeeper_departments.emplace_back(pair.at(0).get<std::string>(), pair.at(1).get<std::string>());
      }
    }
  }
  if (j.contains("residency_labels")) {
    const auto labels = j.at("residency_labels").get<std::vector<std::string>>();
    if (labels.size() != cfg.residency_labels.size()) {
      throw std::invalid_argument("config: residency_labels needs exactly 7 entries");
    }
    std::copy(labels.begin(), labels.end(), cfg.residency_labels.begin());
  }
  cfg.synth.seed = cfg.seeds.synth;
  cfg.synth.degree_credits = cfg.degree_credits;
  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::invalid_argument("config: cannot open " + file.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("config: " + file.string() + ": " + e.what());
  }
  return run_config_from_json(j);
}

PrerequisiteError::PrerequisiteError(std::string stage_, std::string prerequisite_, fs::path missing_)
    : std::runtime_error(stage_ + ": missing " + missing_.generic_string() + "; run '" + prerequisite_ +
                         "' first"),
      stage(std::move(stage_)),
      prerequisite(std::move(prerequisite_)),
      missing(std::move(missing_)) {}

// ---------------------------------------------------------------------------
// Stages

namespace {

constexpr const char* kManifestFile = "manifest.jsonl";
constexpr const char* kResolvedConfigFile = "config.resolved.json";
constexpr const char* kSplitFile = "split.csv";
constexpr const char* kSchemaFile = "schema.json";
constexpr const char* kFeaturesFile = "features.csv";
constexpr const char* kReportFile = "report.json";
constexpr const char* kScreenCsv = "screen.csv";
constexpr const char* kScreenJson = "screen.json";
constexpr const char* kTimingFile = "timing.json";

constexpr ModelKind kClassifiers[] = {ModelKind::Logistic, ModelKind::Knn, ModelKind::Forest};

std::string file_hash(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return hash_hex(fnv1a(ss.str()));
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error(p.generic_string() + ": cannot open for writing");
  return out;
}

void write_json(const fs::path& p, const json& j) {
  auto out = open_out(p);
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error(p.generic_string() + ": write failed");
}

fs::path model_path(const RunConfig& cfg, ModelKind kind) {
  return cfg.out_dir / "models" / (std::string(to_string(kind)) + ".json");
}

const char* hyperparameter_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::Knn: return "k";
    case ModelKind::Forest: return "max_depth";
    default: return "lambda";
  }
}

class Stage {
 public:
  Stage(const RunConfig& cfg, std::string name) : cfg_(cfg), name_(std::move(name)) {}

  const fs::path& need(const fs::path& p, const char* prerequisite) {
    if (!fs::exists(p)) throw PrerequisiteError(name_, prerequisite, p);
    inputs_.push_back(p);
    return inputs_.back();
  }
  void input_if_present(const fs::path& p) {
    if (fs::exists(p)) inputs_.push_back(p);
  }
  void produced(const fs::path& p) { outputs_.push_back(p); }

  void finish() const {
    json inputs = json::object();
    json outputs = json::object();
    for (const auto& p : inputs_) inputs[key(p)] = file_hash(p);
    for (const auto& p : outputs_) outputs[key(p)] = file_hash(p);
    const json line{{"stage", name_},
                    {"version", kVersion},
                    {"seeds",
                     {{"split", cfg_.seeds.split},
                      {"cv", cfg_.seeds.cv},
                      {"sampling", cfg_.seeds.sampling},
                      {"synth", cfg_.seeds.synth},
                      {"forest", cfg_.seeds.forest}}},
                    {"inputs", inputs},
                    {"outputs", outputs}};
    std::ofstream out(cfg_.out_dir / kManifestFile, std::ios::binary | std::ios::app);
    out << line.dump() << '\n';
    if (!out) throw std::runtime_error("cannot append to manifest");
  }

 private:
  std::string key(const fs::path& p) const {
    const auto rel = p.lexically_relative(cfg_.out_dir);
    if (!rel.empty() && *rel.begin() != "..") return rel.generic_string();
    return p.generic_string();
  }

  const RunConfig& cfg_;
  std::string name_;
  std::vector<fs::path> inputs_;
  std::vector<fs::path> outputs_;
};

std::vector<StudentRecord> load_data(Stage& st, const RunConfig& cfg) {
  const auto dir = cfg.data_path();
  st.need(dir / kStudentsFile, "generate");
  st.need(dir / kTranscriptsFile, "generate");
  st.input_if_present(dir / kDegreesFile);
  return load_directory(dir, cfg.residency_labels);
}

LabeledDataset load_labeled(Stage& st, const RunConfig& cfg) {
  const auto labels_file = st.need(cfg.out_dir / kLabelsFile, "label");
  auto records = load_data(st, cfg);
  const auto labels = read_labels(labels_file);
  if (labels.size() != records.size()) {
    throw std::runtime_error(labels_file.generic_string() + " does not match the data directory; rerun 'label'");
  }
  LabeledDataset ds;
  ds.records.reserve(records.size());
  for (auto& r : records) {
    const auto it = labels.find(r.student_id);
    if (it == labels.end()) {
      throw std::runtime_error(labels_file.generic_string() + " has no row for " + r.student_id +
                               "; rerun 'label'");
    }
    ds.records.push_back({std::move(r), it->second});
  }
  return ds;
}

struct Partition {
  LabeledDataset train;
  LabeledDataset test;
};

Partition load_partition(Stage& st, const RunConfig& cfg) {
  const auto split_file = st.need(cfg.out_dir / kSplitFile, "featurize");
  const auto all = load_labeled(st, cfg);
  std::map<std::string, std::size_t> by_id;
  for (std::size_t i = 0; i < all.size(); ++i) by_id.emplace(all.records[i].student.student_id, i);

  static constexpr std::string_view columns[] = {"student_id", "partition", "dropout"};
  const auto table = CsvTable::read(split_file, columns);
  Partition p;
  p.train.balanced = p.test.balanced = true;
  p.train.sampling_seed = p.test.sampling_seed = cfg.seeds.sampling;
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto row = table.row(i);
    const auto it = by_id.find(row.text("student_id"));
    if (it == by_id.end()) row.fail("student_id", "unknown student; rerun 'featurize'");
    const auto& rec = all.records[it->second];
    if (row.flag("dropout") != rec.label.non_completion()) {
      row.fail("dropout", "disagrees with labels.csv; rerun 'featurize'");
    }
    const auto& part = row.text("partition");
    if (part == "train") {
      p.train.records.push_back(rec);
    } else if (part == "test") {
      p.test.records.push_back(rec);
    } else {
      row.fail("partition", "expected train or test");
    }
  }
  return p;
}

FeatureSchema load_schema(Stage& st, const RunConfig& cfg) {
  const auto file = st.need(cfg.out_dir / kSchemaFile, "featurize");
  std::ifstream in(file, std::ios::binary);
  return schema_from_json(json::parse(in));
}

CvOptions cv_options(const RunConfig& cfg) {
  CvOptions o;
  o.folds = cfg.cv_folds;
  o.seed = cfg.seeds.cv;
  o.forest_trees = cfg.forest_trees;
  o.forest_seed = cfg.seeds.forest;
  return o;
}

const std::vector<double>& grid_for(const RunConfig& cfg, ModelKind kind) {
  switch (kind) {
    case ModelKind::Knn: return cfg.grids.knn_k;
    case ModelKind::Forest: return cfg.grids.forest_depth;
    case ModelKind::Ridge: return cfg.grids.timing_lambda;
    default: return cfg.grids.logistic_lambda;
  }
}

void run_generate(const RunConfig& cfg) {
  Stage st(cfg, "generate");
  const auto cohort = generate_cohort(cfg.synth);
  const auto dir = cfg.data_path();
  write_cohort(cohort.records, cohort.truth, dir, cfg.residency_labels);
  for (const char* f : {kStudentsFile, kTranscriptsFile, kDegreesFile, kGroundTruthFile}) st.produced(dir / f);
  st.finish();
}

void run_label(const RunConfig& cfg) {
  Stage st(cfg, "label");
  const auto records = load_data(st, cfg);
  const auto ds = label_all(records, cfg.degree_credits);
  const auto out = cfg.out_dir / kLabelsFile;
  write_labels(out, ds);
  st.produced(out);
  st.finish();
}

void run_featurize(const RunConfig& cfg) {
  Stage st(cfg, "featurize");
  const auto all = load_labeled(st, cfg);
  const auto balanced = balance(all, cfg.seeds.sampling);
  const auto parts = split(balanced, cfg.test_fraction, cfg.seeds.split);
  const auto schema = fit_schema(parts.train, cfg.feature_config());

  const auto schema_file = cfg.out_dir / kSchemaFile;
  write_json(schema_file, schema_to_json(schema));
  st.produced(schema_file);

  std::vector<bool> is_test(balanced.size(), false);
  for (auto i : parts.indices.test) is_test[i] = true;
  const auto split_file = cfg.out_dir / kSplitFile;
  {
    auto out = open_out(split_file);
    CsvWriter csv(out);
    csv.row({"student_id", "partition", "dropout"});
    for (std::size_t i = 0; i < balanced.size(); ++i) {
      const auto& r = balanced.records[i];
      csv.row({r.student.student_id, is_test[i] ? "test" : "train", r.label.non_completion() ? "1" : "0"});
    }
  }
  st.produced(split_file);

  const auto features_file = cfg.out_dir / kFeaturesFile;
  {
    auto out = open_out(features_file);
    CsvWriter csv(out);
    std::vector<std::string> fields{"student_id"};
    for (const auto& f : schema.features) fields.push_back(f.name);
    csv.row(fields);
    for (const auto& r : balanced.records) {
      const auto x = encode(r.student, schema);
      fields.assign(1, r.student.student_id);
      for (Eigen::Index c = 0; c < x.size(); ++c) fields.push_back(format_real(x[c]));
      csv.row(fields);
    }
  }
  st.produced(features_file);
  st.finish();
}

void run_train(const RunConfig& cfg) {
  Stage st(cfg, "train");
  const auto schema = load_schema(st, cfg);
  const auto parts = load_partition(st, cfg);
  const auto y = dropout_labels(parts.train);
  const auto X_std = encode_all(parts.train, schema, Scaling::Standardized);
  const auto X_raw = encode_all(parts.train, schema, Scaling::Raw);
  const auto opts = cv_options(cfg);
  fs::create_directories(cfg.out_dir / "models");

  for (auto kind : kClassifiers) {
    const auto& X = scaling_for(kind) == Scaling::Raw ? X_raw : X_std;
    StoredModel m;
    m.kind = kind;
    m.schema_hash = schema.hash();
    m.cv = cv_tune(X, y, kind, grid_for(cfg, kind), opts);
    switch (kind) {
      case ModelKind::Logistic: m.model = train_logistic(X, y, m.cv.best, opts.descent); break;
      case ModelKind::Knn: m.model = fit_knn(X, y, static_cast<int>(m.cv.best)); break;
      default: {
        ForestParams params;
        params.n_trees = cfg.forest_trees;
        params.max_depth = static_cast<int>(m.cv.best);
        m.model = train_forest(X, y, params, cfg.seeds.forest);
      }
    }
    const auto file = model_path(cfg, kind);
    save_model(file, m);
    st.produced(file);
  }
  st.finish();
}

void run_evaluate(const RunConfig& cfg) {
  Stage st(cfg, "evaluate");
  std::vector<StoredModel> models;
  for (auto kind : kClassifiers) models.push_back(load_model(st.need(model_path(cfg, kind), "train")));
  const auto schema = load_schema(st, cfg);
  const auto parts = load_partition(st, cfg);
  const auto y = dropout_labels(parts.test);

  EvalReport report;
  report.split_seed = cfg.seeds.split;
  report.n_train = parts.train.size();
  report.n_test = parts.test.size();
  for (const auto& m : models) {
    const auto X = encode_all(parts.test, schema, scaling_for(m.kind));
    const auto scores = predict_scores(m, schema, X);
    auto ev = evaluate_scores(std::string(to_string(m.kind)), scores, y);
    ev.hyperparameter_name = hyperparameter_name(m.kind);
    ev.hyperparameter = m.cv.best;
    ev.cv = m.cv;

    const auto roc_file = cfg.out_dir / ("roc_" + ev.model + ".csv");
    {
      auto out = open_out(roc_file);
      CsvWriter csv(out);
      csv.row({"fpr", "tpr", "threshold"});
      for (const auto& p : ev.roc) {
        csv.row({format_real(p.fpr), format_real(p.tpr),
                 std::isfinite(p.threshold) ? format_real(p.threshold) : std::string("inf")});
      }
    }
    st.produced(roc_file);
    report.models.push_back(std::move(ev));
  }
  const auto report_file = cfg.out_dir / kReportFile;
  write_json(report_file, to_json(report));
  st.produced(report_file);
  st.finish();
}

void run_screen(const RunConfig& cfg) {
  Stage st(cfg, "screen");
  const auto schema = load_schema(st, cfg);
  const auto parts = load_partition(st, cfg);
  const auto rows = screen_features(encode_all(parts.train, schema), dropout_labels(parts.train),
                                    encode_all(parts.test, schema), dropout_labels(parts.test), schema,
                                    cfg.screen_lambda);
  const auto csv_file = cfg.out_dir / kScreenCsv;
  {
    auto out = open_out(csv_file);
    CsvWriter csv(out);
    csv.row({"Feature", "Accuracy", "AUC"});
    for (const auto& r : rows) csv.row({r.label, format_real(r.accuracy), format_real(r.auc)});
  }
  st.produced(csv_file);
  const auto json_file = cfg.out_dir / kScreenJson;
  write_json(json_file, to_json(rows));
  st.produced(json_file);
  st.finish();
}

void run_timing(const RunConfig& cfg) {
  Stage st(cfg, "timing");
  const auto ncs = non_completions_only(load_labeled(st, cfg));
  TimingOptions opts;
  opts.test_fraction = cfg.test_fraction;
  opts.split_seed = cfg.seeds.split;
  opts.folds = cfg.cv_folds;
  opts.cv_seed = cfg.seeds.cv;
  const auto report = timing_experiment(ncs, cfg.feature_config(), cfg.grids.timing_lambda, opts);
  const auto file = cfg.out_dir / kTimingFile;
  write_json(file, to_json(report));
  st.produced(file);
  st.finish();
}

using StageFn = void (*)(const RunConfig&);

struct StageEntry {
  std::string_view name;
  StageFn fn;
};

constexpr StageEntry kStages[] = {
    {"generate", run_generate}, {"label", run_label},   {"featurize", run_featurize},
    {"train", run_train},       {"evaluate", run_evaluate}, {"screen", run_screen},
    {"timing", run_timing},
};

}  // namespace

void run_subcommand(std::string_view name, const RunConfig& cfg, std::ostream* log) {
  cfg.validate();
  fs::create_directories(cfg.out_dir);
  write_json(cfg.out_dir / kResolvedConfigFile, to_json(cfg));

  auto run = [&](const StageEntry& s) {
    const auto start = std::chrono::steady_clock::now();
    s.fn(cfg);
    if (log) {
      const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start;
      *log << s.name << ": done in " << dt.count() << " s\n";
    }
  };

  if (name == "pipeline") {
    fs::remove(cfg.out_dir / kManifestFile);
    for (const auto& s : kStages) run(s);
    return;
  }
  for (const auto& s : kStages) {
    if (s.name == name) return run(s);
  }
  throw std::invalid_argument("unknown subcommand '" + std::string(name) + "'");
}

}  // namespace dropout
