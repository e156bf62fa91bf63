#include "retab/pipeline.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "retab/augment.hpp"
#include "retab/constraints.hpp"
#include "retab/kernels.hpp"
#include "retab/preference.hpp"
#include "retab/privacy.hpp"

namespace fs = std::filesystem;

namespace retab {

// ---- config ----------------------------------------------------------------

namespace {

std::uint64_t get_seed(const nlohmann::json& j, const char* key, std::uint64_t fallback) {
  return j.contains(key) && !j.at(key).is_null() ? j.at(key).get<std::uint64_t>() : fallback;
}

template <typename T>
std::optional<T> get_optional(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

}  // namespace

PipelineConfig PipelineConfig::from_json(const nlohmann::json& j) {
  PipelineConfig cfg;

  const auto& data = j.at("data");
  cfg.csv = data.at("csv").get<std::string>();
  cfg.target = data.at("target").get<std::string>();
  cfg.schema_path = get_optional<std::string>(data, "schema");
  if (data.contains("split")) {
    const auto& split = data.at("split");
    std::string kind = split.value("kind", "holdout");
    if (kind == "holdout") {
      cfg.split.kind = SplitKind::Holdout;
    } else if (kind == "imbalance") {
      cfg.split.kind = SplitKind::Imbalance;
    } else if (kind == "shift") {
      cfg.split.kind = SplitKind::Shift;
    } else {
      throw UserError("config: unknown split kind '" + kind + "'");
    }
    cfg.split.ratio = split.value("ratio", 0.8);
    cfg.split.seed = get_seed(split, "seed", 1);
    cfg.split.train_cap = get_optional<std::size_t>(split, "train_cap");
    cfg.split.prevalence = split.value("prevalence", 0.01);
    cfg.split.split_column = split.value("split_column", std::string{});
    if (split.contains("train_values") && !split.at("train_values").is_null()) {
      cfg.split.train_values = split.at("train_values").get<std::vector<std::string>>();
    }
  }

  if (j.contains("augment")) {
    const auto& a = j.at("augment");
    cfg.augment_seed = get_seed(a, "seed", cfg.augment_seed);
    cfg.k_neighbors = a.value("k_neighbors", cfg.k_neighbors);
    cfg.multiplier_override = get_optional<std::size_t>(a, "multiplier_override");
  }
  if (j.contains("encoder")) cfg.bins = j.at("encoder").value("bins", cfg.bins);
  if (j.contains("model")) {
    const auto& m = j.at("model");
    cfg.d = m.value("d", cfg.d);
    cfg.h = m.value("h", cfg.h);
    cfg.model_seed = get_seed(m, "seed", cfg.model_seed);
  }
  if (j.contains("train")) {
    const auto& t = j.at("train");
    if (t.contains("sft")) {
      const auto& s = t.at("sft");
      cfg.sft.learning_rate = s.value("learning_rate", cfg.sft.learning_rate);
      cfg.sft.epochs = s.value("epochs", cfg.sft.epochs);
      cfg.sft.batch_size = s.value("batch_size", cfg.sft.batch_size);
      cfg.sft.seed = get_seed(s, "seed", 4);
    } else {
      cfg.sft.seed = 4;
    }
    if (t.contains("dpo")) {
      const auto& d = t.at("dpo");
      cfg.dpo.beta = d.value("beta", cfg.dpo.beta);
      cfg.dpo.lambda = d.value("lambda", cfg.dpo.lambda);
      cfg.dpo.learning_rate = d.value("learning_rate", cfg.dpo.learning_rate);
      cfg.dpo.epochs = d.value("epochs", cfg.dpo.epochs);
      cfg.dpo.batch_size = d.value("batch_size", cfg.dpo.batch_size);
      cfg.dpo_seed = get_seed(d, "seed", cfg.dpo_seed);
    }
    cfg.rho = t.value("rho", cfg.rho);
    cfg.dpo.rho = cfg.rho;
  } else {
    cfg.sft.seed = 4;
    cfg.dpo.rho = cfg.rho;
  }
  if (j.contains("preference")) {
    const auto& p = j.at("preference");
    cfg.p_type1 = p.value("p_type1", cfg.p_type1);
    cfg.pair_threshold = p.value("pair_threshold", cfg.pair_threshold);
    cfg.constraint_fraction = p.value("constraint_fraction", cfg.constraint_fraction);
    cfg.rules_path = get_optional<std::string>(p, "rules");
    cfg.pref_seed = get_seed(p, "seed", cfg.pref_seed);
  }
  if (j.contains("sample")) {
    const auto& s = j.at("sample");
    cfg.n_samples = s.value("n_samples", cfg.n_samples);
    cfg.sample_seed = get_seed(s, "seed", cfg.sample_seed);
  }
  if (j.contains("eval")) {
    const auto& e = j.at("eval");
    std::string metric = e.value("metric", "auroc");
    if (metric == "auroc") {
      cfg.metric = UtilityMetric::Auroc;
    } else if (metric == "pr_auc") {
      cfg.metric = UtilityMetric::PrAuc;
    } else {
      throw UserError("config: eval.metric must be 'auroc' or 'pr_auc'");
    }
    cfg.eval_k = e.value("k", cfg.eval_k);
    cfg.eval_seed = get_seed(e, "seed", cfg.eval_seed);
  }
  if (j.contains("privacy")) {
    const auto& p = j.at("privacy");
    cfg.privacy_enabled = p.value("enabled", cfg.privacy_enabled);
    cfg.reference_path = get_optional<std::string>(p, "reference");
  }

  if (cfg.rho < 0.0 || cfg.rho > 1.0) throw UserError("config: train.rho must be in [0, 1]");
  if (cfg.bins < 2) throw UserError("config: encoder.bins must be >= 2");
  if (cfg.p_type1 < 0.0 || cfg.p_type1 > 1.0) {
    throw UserError("config: preference.p_type1 must be in [0, 1]");
  }
  return cfg;
}

nlohmann::json PipelineConfig::to_json() const {
  nlohmann::json jsplit{{"ratio", split.ratio},
                        {"seed", split.seed},
                        {"prevalence", split.prevalence}};
  switch (split.kind) {
    case SplitKind::Holdout:
      jsplit["kind"] = "holdout";
      break;
    case SplitKind::Imbalance:
      jsplit["kind"] = "imbalance";
      break;
    case SplitKind::Shift:
      jsplit["kind"] = "shift";
      break;
  }
  jsplit["train_cap"] =
      split.train_cap ? nlohmann::json(*split.train_cap) : nlohmann::json(nullptr);
  jsplit["split_column"] = split.split_column;
  jsplit["train_values"] = split.train_values;

  return nlohmann::json{
      {"data",
       {{"csv", csv},
        {"target", target},
        {"schema", schema_path ? nlohmann::json(*schema_path) : nlohmann::json(nullptr)},
        {"split", std::move(jsplit)}}},
      {"augment",
       {{"seed", augment_seed},
        {"k_neighbors", k_neighbors},
        {"multiplier_override",
         multiplier_override ? nlohmann::json(*multiplier_override) : nlohmann::json(nullptr)}}},
      {"encoder", {{"bins", bins}}},
      {"model", {{"d", d}, {"h", h}, {"seed", model_seed}}},
      {"train",
       {{"sft",
         {{"learning_rate", sft.learning_rate},
          {"epochs", sft.epochs},
          {"batch_size", sft.batch_size},
          {"seed", sft.seed}}},
        {"dpo",
         {{"beta", dpo.beta},
          {"lambda", dpo.lambda},
          {"learning_rate", dpo.learning_rate},
          {"epochs", dpo.epochs},
          {"batch_size", dpo.batch_size},
          {"seed", dpo_seed}}},
        {"rho", rho}}},
      {"preference",
       {{"p_type1", p_type1},
        {"pair_threshold", pair_threshold},
        {"constraint_fraction", constraint_fraction},
        {"rules", rules_path ? nlohmann::json(*rules_path) : nlohmann::json(nullptr)},
        {"seed", pref_seed}}},
      {"sample", {{"n_samples", n_samples}, {"seed", sample_seed}}},
      {"eval",
       {{"metric", metric == UtilityMetric::Auroc ? "auroc" : "pr_auc"},
        {"k", eval_k},
        {"seed", eval_seed}}},
      {"privacy",
       {{"enabled", privacy_enabled},
        {"reference",
         reference_path ? nlohmann::json(*reference_path) : nlohmann::json(nullptr)}}}};
}

PipelineConfig PipelineConfig::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UserError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw UserError("config parse error in " + path + ": " + e.what());
  }
  return from_json(j);
}

void apply_override(nlohmann::json& config, const std::string& key_equals_value) {
  auto eq = key_equals_value.find('=');
  if (eq == std::string::npos) {
    throw UserError("--set expects key=value, got '" + key_equals_value + "'");
  }
  std::string path = key_equals_value.substr(0, eq);
  std::string raw = key_equals_value.substr(eq + 1);

  nlohmann::json value;
  try {
    value = nlohmann::json::parse(raw);
  } catch (const nlohmann::json::exception&) {
    value = raw;  // plain string
  }

  nlohmann::json* node = &config;
  std::size_t start = 0;
  while (true) {
    std::size_t dot = path.find('.', start);
    std::string key = path.substr(start, dot == std::string::npos ? dot : dot - start);
    if (key.empty()) throw UserError("--set: empty key segment in '" + path + "'");
    if (dot == std::string::npos) {
      (*node)[key] = std::move(value);
      return;
    }
    node = &(*node)[key];
    start = dot + 1;
  }
}

// ---- stages ----------------------------------------------------------------

namespace {

void log_line(const RunPaths& paths, const std::string& line) {
  std::ofstream out(paths.run_log(), std::ios::binary | std::ios::app);
  out << line << '\n';
}

bool artifact_exists(const std::string& path) { return fs::exists(path); }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UserError("cannot open: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UserError("cannot write: " + path);
  out << content;
}

Schema ingest_schema(const PipelineConfig& cfg) {
  if (cfg.schema_path) {
    nlohmann::json j = nlohmann::json::parse(read_file(*cfg.schema_path));
    return Schema::from_json(j);
  }
  std::vector<std::string> warnings;
  Table t = load_csv(cfg.csv, std::nullopt, &warnings);
  Schema s = t.schema;
  s.target = cfg.target;
  if (s.find(cfg.target) < 0) {
    throw UserError("config: target column '" + cfg.target + "' not in " + cfg.csv);
  }
  return s;
}

Table load_with_ingest_schema(const PipelineConfig& cfg, const std::string& path) {
  Schema schema = ingest_schema(cfg);
  if (cfg.split.kind == SplitKind::Shift) {
    // the split column is gone from every downstream artifact
    Schema reduced;
    reduced.target = schema.target;
    for (const auto& col : schema.columns) {
      if (col.name != cfg.split.split_column) reduced.columns.push_back(col);
    }
    schema = reduced;
  }
  return load_csv(path, schema);
}

Table load_augmented(const PipelineConfig& cfg, const RunPaths& paths) {
  return load_with_ingest_schema(cfg, paths.augmented_csv());
}

std::vector<Rule> pipeline_rules(const PipelineConfig& cfg, const Schema& schema) {
  if (!cfg.rules_path) return {};
  return load_rules(*cfg.rules_path, schema);
}

std::string stats_to_jsonl(const std::vector<EpochStats>& stats) {
  std::string out;
  for (const auto& s : stats) {
    nlohmann::json j;
    j["stage"] = s.stage;
    j["epoch"] = s.epoch;
    j["mean_loss"] = s.mean_loss;
    j["mean_margin"] = std::isnan(s.mean_margin) ? nlohmann::json(nullptr)
                                                 : nlohmann::json(s.mean_margin);
    j["frac_positive"] = std::isnan(s.frac_positive) ? nlohmann::json(nullptr)
                                                     : nlohmann::json(s.frac_positive);
    out += j.dump();
    out.push_back('\n');
  }
  return out;
}

void rebuild_training_log(const RunPaths& paths) {
  std::string combined;
  if (artifact_exists(paths.sft_log())) combined += read_file(paths.sft_log());
  if (artifact_exists(paths.dpo_log())) combined += read_file(paths.dpo_log());
  write_file(paths.training_log(), combined);
}

constexpr std::uint64_t kDecodeStream = 1000000007ULL;
constexpr std::uint64_t kConstraintAuditStream = 2000000011ULL;

}  // namespace

std::size_t pipeline_total_steps(const PipelineConfig& cfg, std::size_t n_rows) {
  std::size_t per_epoch = (n_rows + cfg.sft.batch_size - 1) / cfg.sft.batch_size;
  return per_epoch * static_cast<std::size_t>(cfg.sft.epochs);
}

IngestResult run_ingest(const PipelineConfig& cfg) {
  IngestResult out;
  std::optional<Schema> schema;
  if (cfg.schema_path) schema = ingest_schema(cfg);
  Table table = load_csv(cfg.csv, schema, &out.warnings);
  if (!schema) {
    table.schema.target = cfg.target;
    if (table.schema.find(cfg.target) < 0) {
      throw UserError("config: target column '" + cfg.target + "' not in " + cfg.csv);
    }
  }

  switch (cfg.split.kind) {
    case SplitKind::Holdout: {
      HoldoutSpec spec{cfg.split.ratio, cfg.split.seed, cfg.split.train_cap};
      auto [train, test] = split_holdout(table, spec);
      out.train = std::move(train);
      out.test = std::move(test);
      break;
    }
    case SplitKind::Imbalance: {
      HoldoutSpec spec{cfg.split.ratio, cfg.split.seed, std::nullopt};
      auto [train, test] = split_holdout(table, spec);
      out.train = downsample_minority(train, {cfg.split.prevalence, Rng::derive(cfg.split.seed, 1)});
      out.test = downsample_minority(test, {cfg.split.prevalence, Rng::derive(cfg.split.seed, 2)});
      break;
    }
    case SplitKind::Shift: {
      ShiftSpec spec{cfg.split.split_column, cfg.split.train_values};
      auto [train, test] = split_shift(table, spec);
      out.train = std::move(train);
      out.test = std::move(test);
      break;
    }
  }
  return out;
}

void stage_augment(const PipelineConfig& cfg, const RunPaths& paths) {
  if (artifact_exists(paths.augmented_csv())) {
    log_line(paths, "[augment] reusing augmented.csv");
    return;
  }
  IngestResult ingest = run_ingest(cfg);
  AugmentConfig acfg{cfg.k_neighbors, cfg.augment_seed, cfg.multiplier_override};
  Table augmented = augment_within_buckets(ingest.train, acfg);
  write_csv(augmented, paths.augmented_csv());
  log_line(paths, "[augment] wrote augmented.csv (" + std::to_string(augmented.n_rows()) +
                      " rows from " + std::to_string(ingest.train.n_rows()) + ")");
}

void stage_train(const PipelineConfig& cfg, const RunPaths& paths) {
  if (artifact_exists(paths.checkpoint_sft())) {
    log_line(paths, "[train] reusing checkpoint.sft.json");
    return;
  }
  Table augmented = load_augmented(cfg, paths);
  auto bins = fit_bins(augmented, cfg.bins);
  EncodeResult enc = encode_table(augmented, bins.spec);
  if (enc.rows.empty()) throw UserError("train: no complete rows to encode");

  PolicyParams params = init_params(vocab_from_binspec(bins.spec), cfg.d, cfg.h, cfg.model_seed);

  std::size_t total = pipeline_total_steps(cfg, enc.rows.size());
  std::size_t n_sft = static_cast<std::size_t>(std::ceil((1.0 - cfg.rho) * static_cast<double>(total)));
  n_sft = std::min(n_sft, total);

  std::vector<EpochStats> stats;
  if (n_sft > 0) {
    Rng rng(cfg.sft.seed);
    auto means = sft_steps(params, enc.rows, cfg.sft.learning_rate, cfg.sft.batch_size, n_sft, rng);
    for (std::size_t i = 0; i < means.size(); ++i) {
      EpochStats s;
      s.stage = "sft";
      s.epoch = static_cast<int>(i) + 1;
      s.mean_loss = means[i];
      s.mean_margin = std::numeric_limits<double>::quiet_NaN();
      s.frac_positive = std::numeric_limits<double>::quiet_NaN();
      stats.push_back(std::move(s));
    }
  }
  save_checkpoint({augmented.schema, bins.spec, params}, paths.checkpoint_sft());
  write_file(paths.sft_log(), stats_to_jsonl(stats));
  rebuild_training_log(paths);
  log_line(paths, "[train] wrote checkpoint.sft.json (" + std::to_string(n_sft) + " of " +
                      std::to_string(total) + " steps)");
}

void stage_build_prefs(const PipelineConfig& cfg, const RunPaths& paths) {
  if (artifact_exists(paths.prefs_jsonl())) {
    log_line(paths, "[build-prefs] reusing prefs.jsonl");
    return;
  }
  Table augmented = load_augmented(cfg, paths);
  Checkpoint ckpt = load_checkpoint(paths.checkpoint_sft());
  EncodeResult enc = encode_table(augmented, ckpt.binspec);

  auto pairs = correlated_pairs(augmented, cfg.pair_threshold);
  auto rules = pipeline_rules(cfg, augmented.schema);
  PrefBuildConfig pcfg{cfg.p_type1, cfg.constraint_fraction, cfg.pref_seed};
  PrefBuildResult built = build_preferences(enc.rows, augmented, pcfg, pairs, rules, ckpt.binspec);

  write_file(paths.prefs_jsonl(), tuples_to_jsonl(built.tuples));
  log_line(paths, "[build-prefs] wrote prefs.jsonl (" + std::to_string(built.tuples.size()) +
                      " tuples, " + std::to_string(built.type2_fallbacks) + " type2 fallbacks, " +
                      std::to_string(built.constraint_fallbacks) + " constraint fallbacks)");
}

void stage_dpo(const PipelineConfig& cfg, const RunPaths& paths) {
  if (artifact_exists(paths.checkpoint_dpo())) {
    log_line(paths, "[dpo] reusing checkpoint.dpo.json");
    return;
  }
  Checkpoint ref_ckpt = load_checkpoint(paths.checkpoint_sft());
  Table augmented = load_augmented(cfg, paths);
  EncodeResult enc = encode_table(augmented, ref_ckpt.binspec);
  std::vector<PreferenceTuple> tuples =
      tuples_from_jsonl(read_file(paths.prefs_jsonl()), ref_ckpt.schema.columns.size());

  std::size_t total = pipeline_total_steps(cfg, enc.rows.size());
  std::size_t n_sft = static_cast<std::size_t>(std::ceil((1.0 - cfg.rho) * static_cast<double>(total)));
  n_sft = std::min(n_sft, total);
  std::size_t n_dpo = total - n_sft;

  PolicyParams params = ref_ckpt.params;
  std::vector<EpochStats> stats;
  if (n_dpo > 0) {
    if (tuples.empty()) throw UserError("dpo: prefs.jsonl is empty");
    Rng rng(cfg.dpo_seed);
    DpoConfig dcfg = cfg.dpo;
    dcfg.rho = cfg.rho;
    stats = dpo_steps(params, ref_ckpt.params, tuples, dcfg, n_dpo, rng);
  }
  save_checkpoint({ref_ckpt.schema, ref_ckpt.binspec, params}, paths.checkpoint_dpo());
  write_file(paths.dpo_log(), stats_to_jsonl(stats));
  rebuild_training_log(paths);
  log_line(paths, "[dpo] wrote checkpoint.dpo.json (" + std::to_string(n_dpo) + " of " +
                      std::to_string(total) + " steps)");
}

void stage_sample(const PipelineConfig& cfg, const RunPaths& paths) {
  if (artifact_exists(paths.synthetic_csv())) {
    log_line(paths, "[sample] reusing synthetic.csv");
    return;
  }
  Checkpoint ckpt = load_checkpoint(paths.checkpoint_dpo());
  std::vector<EncodedRow> rows = sample_rows(ckpt.params, cfg.n_samples, cfg.sample_seed);
  Table synth =
      decode_rows(rows, ckpt.schema, ckpt.binspec, Rng::derive(cfg.sample_seed, kDecodeStream));
  write_csv(synth, paths.synthetic_csv());
  log_line(paths, "[sample] wrote synthetic.csv (" + std::to_string(synth.n_rows()) + " rows)");
}

void stage_evaluate(const PipelineConfig& cfg, const RunPaths& paths) {
  if (artifact_exists(paths.eval_json())) {
    log_line(paths, "[evaluate] reusing eval.json");
    return;
  }
  IngestResult ingest = run_ingest(cfg);
  Table synth = load_with_ingest_schema(cfg, paths.synthetic_csv());

  UtilityReport utility = downstream_utility(synth, ingest.test, cfg.metric, cfg.eval_seed);
  FidelityReport fidelity = fidelity_report(ingest.train, synth, cfg.eval_k);

  nlohmann::json j{{"utility", utility_to_json(utility)},
                   {"fidelity", fidelity_to_json(fidelity, synth.schema)}};
  write_file(paths.eval_json(), j.dump(2) + "\n");
  log_line(paths, "[evaluate] wrote eval.json");
}

void stage_audit_privacy(const PipelineConfig& cfg, const RunPaths& paths) {
  if (!cfg.privacy_enabled) {
    log_line(paths, "[audit-privacy] disabled");
    return;
  }
  if (artifact_exists(paths.privacy_json())) {
    log_line(paths, "[audit-privacy] reusing privacy.json");
    return;
  }
  IngestResult ingest = run_ingest(cfg);
  AttackInput input;
  input.synth = load_with_ingest_schema(cfg, paths.synthetic_csv());
  input.members = std::move(ingest.train);
  input.nonmembers = std::move(ingest.test);
  if (cfg.reference_path) {
    input.reference = load_with_ingest_schema(cfg, *cfg.reference_path);
  }
  PrivacyReport report = audit(input, cfg.eval_k);
  write_file(paths.privacy_json(), privacy_to_json(report, cfg.eval_k).dump(2) + "\n");
  log_line(paths, "[audit-privacy] wrote privacy.json (leakage " + std::to_string(report.leakage) +
                      ")");
}

void stage_audit_constraints(const PipelineConfig& cfg, const RunPaths& paths) {
  if (!cfg.rules_path) {
    log_line(paths, "[audit-constraints] no rules configured");
    return;
  }
  if (artifact_exists(paths.constraints_json())) {
    log_line(paths, "[audit-constraints] reusing constraints.json");
    return;
  }
  Checkpoint ckpt = load_checkpoint(paths.checkpoint_dpo());
  auto rules = load_rules(*cfg.rules_path, ckpt.schema);

  constexpr std::size_t kAuditRows = 10000;
  std::uint64_t audit_seed = Rng::derive(cfg.sample_seed, kConstraintAuditStream);
  std::vector<EncodedRow> rows = sample_rows(ckpt.params, kAuditRows, audit_seed);
  Table sampled =
      decode_rows(rows, ckpt.schema, ckpt.binspec, Rng::derive(audit_seed, kDecodeStream));
  std::vector<double> rates = violation_rate(sampled, rules);

  nlohmann::json per_rule;
  for (std::size_t i = 0; i < rules.size(); ++i) per_rule[rules[i].id] = rates[i];
  nlohmann::json j{{"rules", std::move(per_rule)}, {"n_sampled", kAuditRows}};
  write_file(paths.constraints_json(), j.dump(2) + "\n");
  log_line(paths, "[audit-constraints] wrote constraints.json");
}

nlohmann::json emit_report(const PipelineConfig& cfg, const RunPaths& paths) {
  nlohmann::json report;
  report["config"] = cfg.to_json();
  report["seeds"] = {{"split", cfg.split.seed},   {"augment", cfg.augment_seed},
                     {"model", cfg.model_seed},   {"sft", cfg.sft.seed},
                     {"dpo", cfg.dpo_seed},       {"preference", cfg.pref_seed},
                     {"sample", cfg.sample_seed}, {"eval", cfg.eval_seed}};

  if (artifact_exists(paths.eval_json())) {
    nlohmann::json eval = nlohmann::json::parse(read_file(paths.eval_json()));
    report["utility"] = eval.at("utility");
    report["fidelity"] = eval.at("fidelity");
  } else {
    report["utility"] = nullptr;
    report["fidelity"] = nullptr;
    report["utility_reason"] = "evaluate stage not run";
    report["fidelity_reason"] = "evaluate stage not run";
  }

  if (artifact_exists(paths.privacy_json())) {
    nlohmann::json privacy = nlohmann::json::parse(read_file(paths.privacy_json()));
    report["leakage"] = privacy.at("leakage");
    report["privacy"] = std::move(privacy);
  } else {
    report["privacy"] = nullptr;
    report["leakage"] = nullptr;
    report["privacy_reason"] = cfg.privacy_enabled ? "audit-privacy stage not run" : "disabled";
  }

  if (artifact_exists(paths.constraints_json())) {
    report["constraints"] = nlohmann::json::parse(read_file(paths.constraints_json()));
  } else {
    report["constraints"] = nullptr;
    report["constraints_reason"] = cfg.rules_path ? "audit-constraints stage not run"
                                                  : "no rules configured";
  }

  // plot data: per-epoch DPO margins plus any externally produced rho sweep
  nlohmann::json margins = nlohmann::json::array();
  if (artifact_exists(paths.training_log())) {
    std::istringstream in(read_file(paths.training_log()));
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      nlohmann::json entry = nlohmann::json::parse(line);
      if (entry.value("stage", "") == "dpo" && !entry.at("mean_margin").is_null()) {
        margins.push_back(entry.at("mean_margin"));
      }
    }
  }
  std::string sweep_path = paths.dir + "/rho_sweep.json";
  report["plot_data"] = {{"dpo_margins_per_epoch", std::move(margins)},
                         {"rho_sweep", artifact_exists(sweep_path)
                                           ? nlohmann::json::parse(read_file(sweep_path))
                                           : nlohmann::json(nullptr)}};

  report["conventions"] = {{"kernel_backend", std::string(kernels::backend_name())},
                           {"bins", cfg.bins},
                           {"privacy_onehot_scale", "1/sqrt(2)"}};
  return report;
}

void run_pipeline(const PipelineConfig& cfg, const std::string& run_dir) {
  RunPaths paths{run_dir};
  fs::create_directories(run_dir);
  try {
    stage_augment(cfg, paths);
    stage_train(cfg, paths);
    stage_build_prefs(cfg, paths);
    stage_dpo(cfg, paths);
    stage_sample(cfg, paths);
    stage_evaluate(cfg, paths);
    stage_audit_privacy(cfg, paths);
    stage_audit_constraints(cfg, paths);
    write_file(paths.report_json(), emit_report(cfg, paths).dump(2) + "\n");
    log_line(paths, "[report] wrote report.json");
  } catch (const std::exception& e) {
    log_line(paths, std::string("[error] ") + e.what());
    throw;
  }
}

}  // namespace retab
