// Command-line front end for the tabular synthesis pipeline. Subcommands map
// one-to-one onto pipeline stages; `run` chains them all and emits report.json.
// Exit codes: 0 success, 1 user error (bad config/input), 2 internal error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "retab/error.hpp"
#include "retab/pipeline.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string run_dir = "run";
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "pipeline config JSON")->required();
  cmd->add_option("--run-dir", args.run_dir, "run directory for artifacts");
  cmd->add_option("--set", args.overrides, "override config values (key.path=value)");
}

retab::PipelineConfig load_config(const CommonArgs& args) {
  std::ifstream in(args.config_path, std::ios::binary);
  if (!in) throw retab::UserError("cannot open config file: " + args.config_path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw retab::UserError("config parse error: " + std::string(e.what()));
  }
  for (const auto& kv : args.overrides) retab::apply_override(j, kv);
  return retab::PipelineConfig::from_json(j);
}

retab::RunPaths paths_for(const CommonArgs& args) {
  std::filesystem::create_directories(args.run_dir);
  return retab::RunPaths{args.run_dir};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"any-order tabular generator with preference-aligned fine-tuning"};
  app.require_subcommand(1);

  CommonArgs args;

  auto* ingest = app.add_subcommand("ingest", "load, split, and summarize the dataset");
  auto* augment = app.add_subcommand("augment", "write augmented.csv");
  auto* train = app.add_subcommand("train", "SFT phase; writes checkpoint.sft.json");
  auto* prefs = app.add_subcommand("build-prefs", "write prefs.jsonl");
  auto* dpo = app.add_subcommand("dpo", "DPO phase; writes checkpoint.dpo.json");
  auto* sample = app.add_subcommand("sample", "write synthetic.csv");
  auto* evaluate = app.add_subcommand("evaluate", "write eval.json");
  auto* privacy = app.add_subcommand("audit-privacy", "write privacy.json");
  auto* constraints = app.add_subcommand("audit-constraints", "write constraints.json");
  auto* run = app.add_subcommand("run", "full pipeline plus report.json");
  auto* report = app.add_subcommand("report", "merge sub-reports into report.json");

  for (CLI::App* cmd : {ingest, augment, train, prefs, dpo, sample, evaluate, privacy,
                        constraints, run, report}) {
    add_common(cmd, args);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    retab::PipelineConfig cfg = load_config(args);

    if (ingest->parsed()) {
      retab::IngestResult result = retab::run_ingest(cfg);
      nlohmann::json summary{{"train_rows", result.train.n_rows()},
                             {"test_rows", result.test.n_rows()},
                             {"schema", result.train.schema.to_json()},
                             {"warnings", result.warnings}};
      std::cout << summary.dump(2) << "\n";
      return 0;
    }

    retab::RunPaths paths = paths_for(args);
    if (augment->parsed()) {
      retab::stage_augment(cfg, paths);
    } else if (train->parsed()) {
      retab::stage_train(cfg, paths);
    } else if (prefs->parsed()) {
      retab::stage_build_prefs(cfg, paths);
    } else if (dpo->parsed()) {
      retab::stage_dpo(cfg, paths);
    } else if (sample->parsed()) {
      retab::stage_sample(cfg, paths);
    } else if (evaluate->parsed()) {
      retab::stage_evaluate(cfg, paths);
    } else if (privacy->parsed()) {
      retab::stage_audit_privacy(cfg, paths);
    } else if (constraints->parsed()) {
      retab::stage_audit_constraints(cfg, paths);
    } else if (run->parsed()) {
      retab::run_pipeline(cfg, args.run_dir);
    } else if (report->parsed()) {
      std::ofstream out(paths.report_json(), std::ios::binary);
      out << retab::emit_report(cfg, paths).dump(2) << "\n";
    }
    return 0;
  } catch (const retab::UserError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
}
