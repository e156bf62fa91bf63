#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "retab/table.hpp"

namespace retab {

struct ColumnScore {
  std::string column;
  double score = 0.0;
};

struct ShapeReport {
  std::vector<ColumnScore> per_column;  // 1-KS (numeric) or 1-TVD (categorical)
  double mean = 0.0;
};

ShapeReport shape_score(const Table& real, const Table& synth);

struct CorrReport {
  std::vector<std::vector<double>> matrix;  // symmetric, unit diagonal
  double mean = 0.0;                        // over distinct pairs
  std::size_t guarded_pairs = 0;            // degenerate on one side, scored via 0-substitution
};

// Pairwise correlation similarity: 1 - |rho_r - rho_s| / 2 for numeric
// pairs, 1 - TVD of joint category distributions for categorical pairs,
// 1 - |eta_r - eta_s| for mixed pairs. Pairs degenerate in both tables
// score 1.
CorrReport corr_similarity(const Table& real, const Table& synth);

struct FeatureTargetReport {
  std::vector<ColumnScore> per_column;  // 1 - 2|S - R|, can be negative
  double mean = 0.0;
  std::size_t guarded_pairs = 0;
};

FeatureTargetReport feature_target_score(const Table& real, const Table& synth);

struct PrecisionRecall {
  double alpha_precision = 0.0;
  double beta_recall = 0.0;
};

// k-NN ball estimator in the shared embedded space (z-scores fit on the real
// table): a synthetic point is precise when its nearest real point's k-NN
// radius covers it; recall swaps the roles.
PrecisionRecall precision_recall(const Table& real, const Table& synth, int k = 5);

enum class UtilityMetric { Auroc, PrAuc };

struct ClassifierScore {
  std::string name;
  double auroc = 0.5;
  double pr_auc = 0.5;
};

struct UtilityReport {
  std::vector<ClassifierScore> classifiers;
  double mean_auroc = 0.5;
  double mean_pr_auc = 0.5;
  double headline = 0.5;  // mean of the configured metric
  std::vector<std::string> warnings;
};

// Fits the three built-in classifiers on synth_train and scores real_test.
// Single-class synthetic training data degrades to 0.5 scores with a warning
// instead of aborting.
UtilityReport downstream_utility(const Table& synth_train, const Table& real_test,
                                 UtilityMetric metric, std::uint64_t seed);

struct FidelityReport {
  ShapeReport shape;
  CorrReport corr;
  FeatureTargetReport feature_target;
  PrecisionRecall pr;
};

FidelityReport fidelity_report(const Table& real, const Table& synth, int k = 5);

nlohmann::json utility_to_json(const UtilityReport& r);
nlohmann::json fidelity_to_json(const FidelityReport& r, const Schema& schema);

}  // namespace retab
