#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "retab/constraints.hpp"
#include "retab/encoder.hpp"
#include "retab/policy.hpp"
#include "retab/table.hpp"

namespace retab {

enum class PerturbKind { TypeI, TypeII, Constraint };

std::string_view perturb_kind_name(PerturbKind kind);

// One DPO training unit: the prompt is every column except the perturbed
// one; chosen is the row's own token, rejected the perturbation.
struct PreferenceTuple {
  Context prompt;  // token per column, -1 at the perturbed column
  int column = 0;
  int chosen = 0;
  int rejected = 0;
  PerturbKind kind = PerturbKind::TypeI;
};

struct CorrelatedPair {
  int col_a = 0;
  int col_b = 0;
  double strength = 0.0;
};

// Scores every non-target column pair: |Pearson| for numeric pairs,
// Cramér's V for categorical pairs, correlation ratio for mixed pairs
// (complete value pairs only). Pairs at or above the threshold, strongest
// first.
std::vector<CorrelatedPair> correlated_pairs(const Table& table, double threshold);

struct PrefBuildConfig {
  double p_type1 = 0.7;
  double constraint_fraction = 0.5;  // share of non-Type-I draws turned into rule tuples
  std::uint64_t seed = 0;
};

struct PrefBuildResult {
  std::vector<PreferenceTuple> tuples;
  std::size_t type2_fallbacks = 0;      // Type II wanted, no usable pair
  std::size_t constraint_fallbacks = 0; // rule draw infeasible on the row
};

// Emits exactly one tuple per encoded row. Type I rejections are drawn from
// the renormalized empirical target marginal; Type II picks a correlated pair
// (probability proportional to strength) and moves one member to another
// quantile bin or category; rule tuples replace a configured fraction of the
// non-Type-I draws when rules are present.
PrefBuildResult build_preferences(const std::vector<EncodedRow>& rows, const Table& table,
                                  const PrefBuildConfig& cfg,
                                  const std::vector<CorrelatedPair>& pairs,
                                  const std::vector<Rule>& rules, const BinSpec& spec);

// Oracle-based ablation variants. The classifier scores P(target == category
// 1) on raw rows; rows must align with the encoded rows index-for-index.
class Classifier;

// Tuples preferring the classifier's predicted target over the observed one
// (rows where they agree are skipped).
std::vector<PreferenceTuple> oracle_edit(const std::vector<EncodedRow>& rows,
                                         const Table& table, const Classifier& clf);

// Indices of rows whose observed target agrees with the prediction.
std::vector<std::size_t> oracle_screen(const std::vector<EncodedRow>& rows, const Table& table,
                                       const Classifier& clf);

// JSONL: one {prompt, col, chosen, rejected, kind} object per line.
std::string tuples_to_jsonl(const std::vector<PreferenceTuple>& tuples);
std::vector<PreferenceTuple> tuples_from_jsonl(const std::string& text, std::size_t n_cols);

}  // namespace retab
