#include "retab/privacy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "retab/embed.hpp"
#include "retab/kernels.hpp"
#include "retab/stats.hpp"

namespace retab {

std::string_view attack_name(AttackKind kind) {
  switch (kind) {
    case AttackKind::Dcr:
      return "dcr";
    case AttackKind::DcrDiff:
      return "dcr_diff";
    case AttackKind::Density:
      return "density";
  }
  return "dcr";
}

namespace {

constexpr double kOneHotScale = 0.70710678118654752440;  // 1/sqrt(2) per category pair

double min_distance(const double* x, const Matrix& cloud) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < cloud.rows; ++j) {
    best = std::min(best, kernels::sq_dist(x, cloud.row(j), cloud.cols));
  }
  return std::sqrt(best);
}

double kth_distance(const double* x, const Matrix& cloud, int k) {
  std::vector<double> dists(cloud.rows);
  for (std::size_t j = 0; j < cloud.rows; ++j) {
    dists[j] = kernels::sq_dist(x, cloud.row(j), cloud.cols);
  }
  std::size_t k_eff = std::min<std::size_t>(static_cast<std::size_t>(k), dists.size());
  std::nth_element(dists.begin(), dists.begin() + (k_eff - 1), dists.end());
  return std::sqrt(dists[k_eff - 1]);
}

}  // namespace

AttackScores attack_scores(const AttackInput& input, AttackKind kind, int k) {
  if (input.members.rows.empty() || input.nonmembers.rows.empty()) {
    throw UserError("attack_scores: members and nonmembers must be nonempty");
  }
  if (input.synth.rows.empty()) throw UserError("attack_scores: empty synthetic table");
  if (kind == AttackKind::DcrDiff && !input.reference) {
    throw UserError("attack_scores: dcr_diff needs a reference table");
  }
  if (k < 1) throw UserError("attack_scores: k must be >= 1");

  FeatureEmbedding embedding = FeatureEmbedding::fit(input.synth, kOneHotScale, -1);
  Matrix synth = embedding.embed_complete_rows(input.synth);
  Matrix members = embedding.embed_complete_rows(input.members);
  Matrix nonmembers = embedding.embed_complete_rows(input.nonmembers);
  Matrix reference;
  if (kind == AttackKind::DcrDiff) {
    reference = embedding.embed_complete_rows(*input.reference);
    if (reference.rows == 0) throw UserError("attack_scores: empty reference table");
  }
  if (synth.rows == 0 || members.rows == 0 || nonmembers.rows == 0) {
    throw UserError("attack_scores: a table has no complete rows");
  }

  auto score_one = [&](const double* x) {
    switch (kind) {
      case AttackKind::Dcr:
        return -min_distance(x, synth);
      case AttackKind::DcrDiff:
        return min_distance(x, reference) - min_distance(x, synth);
      case AttackKind::Density:
        return -std::log(std::max(kth_distance(x, synth, k), 1e-30));
    }
    return 0.0;
  };

  AttackScores out;
  out.member_scores.reserve(members.rows);
  out.nonmember_scores.reserve(nonmembers.rows);
  for (std::size_t i = 0; i < members.rows; ++i) out.member_scores.push_back(score_one(members.row(i)));
  for (std::size_t i = 0; i < nonmembers.rows; ++i) {
    out.nonmember_scores.push_back(score_one(nonmembers.row(i)));
  }
  return out;
}

AttackMetrics attack_metrics(const std::vector<double>& member_scores,
                             const std::vector<double>& nonmember_scores, double fpr) {
  if (member_scores.empty() || nonmember_scores.empty()) {
    throw UserError("attack_metrics: empty score list");
  }
  std::vector<double> scores;
  std::vector<int> labels;
  scores.reserve(member_scores.size() + nonmember_scores.size());
  scores.insert(scores.end(), member_scores.begin(), member_scores.end());
  scores.insert(scores.end(), nonmember_scores.begin(), nonmember_scores.end());
  labels.assign(member_scores.size(), 1);
  labels.insert(labels.end(), nonmember_scores.size(), 0);

  AttackMetrics out;
  out.auc = stats::rank_metrics(scores, labels).auroc;
  out.tpr_at_fpr = stats::tpr_at_fpr(member_scores, nonmember_scores, fpr);
  return out;
}

PrivacyReport audit(const AttackInput& input, int k) {
  PrivacyReport report;
  std::vector<AttackKind> kinds{AttackKind::Dcr, AttackKind::Density};
  if (input.reference) {
    kinds.push_back(AttackKind::DcrDiff);
  } else {
    report.notes.push_back("dcr_diff skipped: no reference table");
  }

  report.leakage = 0.0;
  for (AttackKind kind : kinds) {
    AttackScores scores = attack_scores(input, kind, k);
    AttackMetrics metrics = attack_metrics(scores.member_scores, scores.nonmember_scores, 0.01);
    report.attacks.push_back(
        {std::string(attack_name(kind)), metrics.auc, metrics.tpr_at_fpr});
    report.leakage = std::max(report.leakage, metrics.auc);
  }

  // Authenticity: a synthetic row is authentic when it lies farther from its
  // nearest member than that member's own nearest member.
  FeatureEmbedding embedding = FeatureEmbedding::fit(input.synth, kOneHotScale, -1);
  Matrix synth = embedding.embed_complete_rows(input.synth);
  Matrix members = embedding.embed_complete_rows(input.members);
  std::vector<double> member_nn(members.rows, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < members.rows; ++i) {
    for (std::size_t j = 0; j < members.rows; ++j) {
      if (i == j) continue;
      member_nn[i] =
          std::min(member_nn[i], kernels::sq_dist(members.row(i), members.row(j), members.cols));
    }
  }
  std::size_t authentic = 0;
  for (std::size_t s = 0; s < synth.rows; ++s) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t anchor = 0;
    for (std::size_t j = 0; j < members.rows; ++j) {
      double d = kernels::sq_dist(synth.row(s), members.row(j), synth.cols);
      if (d < best) {
        best = d;
        anchor = j;
      }
    }
    authentic += best > member_nn[anchor];
  }
  report.authenticity =
      synth.rows == 0 ? 0.0 : static_cast<double>(authentic) / static_cast<double>(synth.rows);
  return report;
}

nlohmann::json privacy_to_json(const PrivacyReport& report, int k) {
  nlohmann::json attacks = nlohmann::json::array();
  for (const auto& a : report.attacks) {
    attacks.push_back({{"name", a.name}, {"auc", a.auc}, {"tpr_at_fpr_001", a.tpr_at_fpr_001}});
  }
  return nlohmann::json{
      {"attacks", std::move(attacks)},
      {"leakage", report.leakage},
      {"authenticity", report.authenticity},
      {"notes", report.notes},
      {"conventions",
       {{"k", k},
        {"distance", "euclidean on z-scored numerics + one-hot/sqrt(2) categoricals"},
        {"embedding_fit", "synthetic table"}}}};
}

}  // namespace retab
