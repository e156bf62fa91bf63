#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "retab/table.hpp"

namespace retab {

struct AttackInput {
  Table synth;
  Table members;     // generator training rows
  Table nonmembers;  // held-out rows
  std::optional<Table> reference;  // shadow-box attacks only
};

enum class AttackKind { Dcr, DcrDiff, Density };

std::string_view attack_name(AttackKind kind);

struct AttackScores {
  std::vector<double> member_scores;
  std::vector<double> nonmember_scores;
};

// Membership scores (higher = more member-like) in the embedded space fit on
// the synthetic table (z-scored numerics, one-hot categoricals scaled by
// 1/sqrt(2)). DCR scores by negated distance-to-closest-record; DCR-Diff by
// the reference-vs-synth distance gap; Density by the negated log of the
// k-th neighbor distance in the synthetic cloud.
AttackScores attack_scores(const AttackInput& input, AttackKind kind, int k = 5);

struct AttackMetrics {
  double auc = 0.5;
  double tpr_at_fpr = 0.0;
};

AttackMetrics attack_metrics(const std::vector<double>& member_scores,
                             const std::vector<double>& nonmember_scores, double fpr);

struct AttackReport {
  std::string name;
  double auc = 0.5;
  double tpr_at_fpr_001 = 0.0;
};

struct PrivacyReport {
  std::vector<AttackReport> attacks;
  double leakage = 0.5;       // max attack AUC
  double authenticity = 0.0;  // fraction of synth rows beyond their anchor's own neighborhood
  std::vector<std::string> notes;
};

// Runs every attack the inputs allow (DCR-Diff is skipped with a note when no
// reference table is given) and aggregates worst-case leakage.
PrivacyReport audit(const AttackInput& input, int k = 5);

nlohmann::json privacy_to_json(const PrivacyReport& report, int k);

}  // namespace retab
