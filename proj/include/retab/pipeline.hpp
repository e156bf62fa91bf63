#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "retab/dpo.hpp"
#include "retab/evalsuite.hpp"
#include "retab/policy.hpp"
#include "retab/table.hpp"

namespace retab {

enum class SplitKind { Holdout, Imbalance, Shift };

struct SplitConfig {
  SplitKind kind = SplitKind::Holdout;
  double ratio = 0.8;
  std::uint64_t seed = 0;
  std::optional<std::size_t> train_cap;
  double prevalence = 0.01;  // imbalance: applied to both sides of an 80/20 split
  std::string split_column;
  std::vector<std::string> train_values;
};

struct PipelineConfig {
  // data
  std::string csv;
  std::string target;
  std::optional<std::string> schema_path;
  SplitConfig split;
  // augment
  std::uint64_t augment_seed = 2;
  int k_neighbors = 5;
  std::optional<std::size_t> multiplier_override;
  // encoder
  int bins = 32;
  // model
  int d = 32;
  int h = 64;
  std::uint64_t model_seed = 3;
  // train
  TrainConfig sft;
  DpoConfig dpo;
  std::uint64_t dpo_seed = 5;
  double rho = 0.5;
  // preference
  double p_type1 = 0.7;
  double pair_threshold = 0.3;
  double constraint_fraction = 0.5;
  std::optional<std::string> rules_path;
  std::uint64_t pref_seed = 6;
  // sample
  std::size_t n_samples = 1024;
  std::uint64_t sample_seed = 7;
  // eval
  UtilityMetric metric = UtilityMetric::Auroc;
  int eval_k = 5;
  std::uint64_t eval_seed = 8;
  // privacy
  bool privacy_enabled = true;
  std::optional<std::string> reference_path;

  static PipelineConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  static PipelineConfig load(const std::string& path);
};

// Dotted-path override, e.g. "train.rho=0.25". Values parse as JSON when
// possible, else as strings.
void apply_override(nlohmann::json& config, const std::string& key_equals_value);

// Artifact paths inside one run directory.
struct RunPaths {
  std::string dir;
  std::string augmented_csv() const { return dir + "/augmented.csv"; }
  std::string checkpoint_sft() const { return dir + "/checkpoint.sft.json"; }
  std::string prefs_jsonl() const { return dir + "/prefs.jsonl"; }
  std::string checkpoint_dpo() const { return dir + "/checkpoint.dpo.json"; }
  std::string synthetic_csv() const { return dir + "/synthetic.csv"; }
  std::string report_json() const { return dir + "/report.json"; }
  std::string training_log() const { return dir + "/training_log.jsonl"; }
  std::string sft_log() const { return dir + "/log.sft.jsonl"; }
  std::string dpo_log() const { return dir + "/log.dpo.jsonl"; }
  std::string eval_json() const { return dir + "/eval.json"; }
  std::string privacy_json() const { return dir + "/privacy.json"; }
  std::string constraints_json() const { return dir + "/constraints.json"; }
  std::string run_log() const { return dir + "/run.log"; }
};

struct IngestResult {
  Table train;
  Table test;
  std::vector<std::string> warnings;
};

// Deterministic ingest + split; recomputed by any stage that needs it.
IngestResult run_ingest(const PipelineConfig& cfg);

// Individual stages; each skips work whose artifact already exists and
// appends a line to run.log. They are safe to call in any order as long as
// their upstream artifacts exist.
void stage_augment(const PipelineConfig& cfg, const RunPaths& paths);
void stage_train(const PipelineConfig& cfg, const RunPaths& paths);
void stage_build_prefs(const PipelineConfig& cfg, const RunPaths& paths);
void stage_dpo(const PipelineConfig& cfg, const RunPaths& paths);
void stage_sample(const PipelineConfig& cfg, const RunPaths& paths);
void stage_evaluate(const PipelineConfig& cfg, const RunPaths& paths);
void stage_audit_privacy(const PipelineConfig& cfg, const RunPaths& paths);
void stage_audit_constraints(const PipelineConfig& cfg, const RunPaths& paths);

// Merges sub-reports into report.json; missing pieces become null fields
// with a reason string.
nlohmann::json emit_report(const PipelineConfig& cfg, const RunPaths& paths);

// ingest -> augment -> SFT -> build-prefs -> DPO -> sample -> evaluate ->
// audits -> report, persisting after each stage.
void run_pipeline(const PipelineConfig& cfg, const std::string& run_dir);

// Step budget shared by the SFT and DPO stages:
// sft.epochs * ceil(n_rows / sft.batch_size), split by rho.
std::size_t pipeline_total_steps(const PipelineConfig& cfg, std::size_t n_rows);

}  // namespace retab
