#pragma once

#include <vector>

namespace retab::stats {

// Two-sample Kolmogorov-Smirnov statistic: sup |F_a - F_b| over the pooled
// sample. Inputs need not be sorted.
double ks_statistic(std::vector<double> a, std::vector<double> b);

// Total variation distance between the two empirical distributions the count
// vectors describe (same category order).
double tvd(const std::vector<double>& counts_p, const std::vector<double>& counts_q);

// NaN when either side has zero variance or fewer than 2 points.
double pearson(const std::vector<double>& x, const std::vector<double>& y);

// Bias-uncorrected Cramér's V: sqrt(chi2 / (n * min(r-1, c-1))) with all-zero
// contingency rows/columns removed. NaN when a side collapses to one level.
double cramers_v(const std::vector<int>& a, int card_a, const std::vector<int>& b, int card_b);

// Correlation ratio eta = sqrt(SS_between / SS_total) of values grouped by
// category. NaN when total variance is zero.
double correlation_ratio(const std::vector<int>& groups, int n_groups,
                         const std::vector<double>& values);

struct RankMetrics {
  double auroc = 0.0;
  double pr_auc = 0.0;
};

// AUROC by Mann-Whitney pair counting (ties half credit, computed in exact
// integer arithmetic); PR-AUC by step-wise average precision over descending
// score groups. Labels are 0/1; throws UserError when one class is absent.
RankMetrics rank_metrics(const std::vector<double>& scores, const std::vector<int>& labels);

// Max TPR over thresholds whose FPR does not exceed `fpr` (step ROC; a
// classification is positive when score >= threshold).
double tpr_at_fpr(const std::vector<double>& pos_scores, const std::vector<double>& neg_scores,
                  double fpr);

}  // namespace retab::stats
