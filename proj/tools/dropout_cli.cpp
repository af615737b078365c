#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "dropout/csv.hpp"
#include "dropout/model_io.hpp"
#include "dropout/pipeline.hpp"

namespace {

std::string one_line(std::string s) {
  for (auto& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

int report_error(const char* kind, const std::string& message, nlohmann::json extra = nlohmann::json::object()) {
  extra["error"] = kind;
  extra["message"] = one_line(message);
  std::cerr << extra.dump() << '\n';
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Student dropout prediction pipeline"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::string data_dir;
  bool quiet = false;
  app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "Override every seed");
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--data", data_dir, "Registrar data directory");
  app.add_flag("-q,--quiet", quiet, "Suppress stage timings");

  const std::pair<const char*, const char*> commands[] = {
      {"generate", "Write a synthetic cohort to the data directory"},
      {"label", "Label graduates and non-completions (labels.csv)"},
      {"featurize", "Balance, split and encode features (features.csv, schema.json, split.csv)"},
      {"train", "Tune and fit logistic regression, kNN and random forest (models/)"},
      {"evaluate", "Score held-out students (report.json, roc_<model>.csv)"},
      {"screen", "Single-feature screening (screen.csv, screen.json)"},
      {"timing", "Dropout-timing regression for non-completions (timing.json)"},
      {"pipeline", "Run every stage in order"},
  };
  for (const auto& [name, help] : commands) app.add_subcommand(name, help)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("usage", e.what());
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    dropout::RunConfig cfg;
    if (!config_path.empty()) cfg = dropout::load_run_config(config_path);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (!data_dir.empty()) cfg.data_dir = data_dir;
    if (seed) {
      cfg.seeds.set_all(*seed);
      cfg.synth.seed = *seed;
    }
    dropout::run_subcommand(command, cfg, quiet ? nullptr : &std::cerr);
  } catch (const dropout::PrerequisiteError& e) {
    return report_error("prerequisite", e.what(),
                        {{"stage", e.stage}, {"prerequisite", e.prerequisite}, {"missing", e.missing.generic_string()}});
  } catch (const dropout::SchemaMismatch& e) {
    return report_error("schema_mismatch", e.what(), {{"stage", command}});
  } catch (const dropout::DataError& e) {
    return report_error("data", e.what(), {{"stage", command}});
  } catch (const std::invalid_argument& e) {
    return report_error("invalid", e.what(), {{"stage", command}});
  } catch (const std::exception& e) {
    return report_error("failed", e.what(), {{"stage", command}});
  }
  return 0;
}
