#include "retab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>

#include "retab/error.hpp"

namespace retab::stats {

namespace {
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw UserError("ks_statistic: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  return d;
}

double tvd(const std::vector<double>& counts_p, const std::vector<double>& counts_q) {
  double np = std::accumulate(counts_p.begin(), counts_p.end(), 0.0);
  double nq = std::accumulate(counts_q.begin(), counts_q.end(), 0.0);
  if (np <= 0.0 || nq <= 0.0) throw UserError("tvd: empty distribution");
  std::size_t k = std::max(counts_p.size(), counts_q.size());
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    double p = i < counts_p.size() ? counts_p[i] / np : 0.0;
    double q = i < counts_q.size() ? counts_q[i] / nq : 0.0;
    total += std::fabs(p - q);
  }
  return 0.5 * total;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) return kNan;
  const double n = static_cast<double>(x.size());
  double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double dx = x[i] - mx, dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) return kNan;
  double r = sxy / std::sqrt(sxx * syy);
  return std::clamp(r, -1.0, 1.0);
}

double cramers_v(const std::vector<int>& a, int card_a, const std::vector<int>& b, int card_b) {
  if (a.size() != b.size() || a.empty() || card_a < 1 || card_b < 1) return kNan;
  std::vector<double> table(static_cast<std::size_t>(card_a) * card_b, 0.0);
  std::vector<double> row_sum(card_a, 0.0), col_sum(card_b, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    table[static_cast<std::size_t>(a[i]) * card_b + b[i]] += 1.0;
    row_sum[a[i]] += 1.0;
    col_sum[b[i]] += 1.0;
  }
  int live_rows = 0, live_cols = 0;
  for (double s : row_sum) live_rows += s > 0.0;
  for (double s : col_sum) live_cols += s > 0.0;
  int dof = std::min(live_rows - 1, live_cols - 1);
  if (dof < 1) return kNan;

  const double n = static_cast<double>(a.size());
  double chi2 = 0.0;
  for (int r = 0; r < card_a; ++r) {
    if (row_sum[r] <= 0.0) continue;
    for (int c = 0; c < card_b; ++c) {
      if (col_sum[c] <= 0.0) continue;
      double expected = row_sum[r] * col_sum[c] / n;
      double diff = table[static_cast<std::size_t>(r) * card_b + c] - expected;
      chi2 += diff * diff / expected;
    }
  }
  return std::clamp(std::sqrt(chi2 / (n * dof)), 0.0, 1.0);
}

double correlation_ratio(const std::vector<int>& groups, int n_groups,
                         const std::vector<double>& values) {
  if (groups.size() != values.size() || groups.empty() || n_groups < 1) return kNan;
  std::vector<double> sum(n_groups, 0.0), count(n_groups, 0.0);
  double total_sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    sum[groups[i]] += values[i];
    count[groups[i]] += 1.0;
    total_sum += values[i];
  }
  const double n = static_cast<double>(values.size());
  const double mean = total_sum / n;
  double ss_total = 0.0;
  for (double v : values) ss_total += (v - mean) * (v - mean);
  if (ss_total <= 0.0) return kNan;
  double ss_between = 0.0;
  for (int g = 0; g < n_groups; ++g) {
    if (count[g] <= 0.0) continue;
    double gm = sum[g] / count[g];
    ss_between += count[g] * (gm - mean) * (gm - mean);
  }
  return std::clamp(std::sqrt(ss_between / ss_total), 0.0, 1.0);
}

RankMetrics rank_metrics(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size() || scores.empty()) {
    throw UserError("rank_metrics: scores and labels must be nonempty and equal length");
  }
  std::uint64_t n_pos = 0, n_neg = 0;
  for (int l : labels) (l ? n_pos : n_neg) += 1;
  if (n_pos == 0 || n_neg == 0) {
    throw UserError("rank_metrics: both classes must be present");
  }

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return scores[i] < scores[j]; });

  // Mann-Whitney in doubled integer units: a positive strictly above a
  // negative scores 2, a tie scores 1. Exact, so it matches pairwise
  // counting bit-for-bit.
  std::uint64_t wins2 = 0;
  std::uint64_t neg_below = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    std::uint64_t tie_pos = 0, tie_neg = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (labels[order[j]] ? tie_pos : tie_neg) += 1;
      ++j;
    }
    wins2 += tie_pos * (2 * neg_below + tie_neg);
    neg_below += tie_neg;
    i = j;
  }

  RankMetrics out;
  out.auroc = static_cast<double>(wins2) / (2.0 * static_cast<double>(n_pos) * static_cast<double>(n_neg));

  // Average precision over descending score groups.
  double ap = 0.0;
  double prev_recall = 0.0;
  std::uint64_t tp = 0, fp = 0;
  std::size_t k = order.size();
  while (k > 0) {
    std::size_t j = k;
    double v = scores[order[k - 1]];
    std::uint64_t group_pos = 0, group_neg = 0;
    while (j > 0 && scores[order[j - 1]] == v) {
      (labels[order[j - 1]] ? group_pos : group_neg) += 1;
      --j;
    }
    tp += group_pos;
    fp += group_neg;
    double recall = static_cast<double>(tp) / static_cast<double>(n_pos);
    double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
    k = j;
  }
  out.pr_auc = ap;
  return out;
}

double tpr_at_fpr(const std::vector<double>& pos_scores, const std::vector<double>& neg_scores,
                  double fpr) {
  if (pos_scores.empty() || neg_scores.empty()) {
    throw UserError("tpr_at_fpr: empty score list");
  }
  if (fpr <= 0.0 || fpr >= 1.0) throw UserError("tpr_at_fpr: fpr must be in (0, 1)");

  std::vector<double> thresholds;
  thresholds.reserve(pos_scores.size() + neg_scores.size());
  thresholds.insert(thresholds.end(), pos_scores.begin(), pos_scores.end());
  thresholds.insert(thresholds.end(), neg_scores.begin(), neg_scores.end());
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

  std::vector<double> pos_sorted(pos_scores), neg_sorted(neg_scores);
  std::sort(pos_sorted.begin(), pos_sorted.end());
  std::sort(neg_sorted.begin(), neg_sorted.end());
  const double np = static_cast<double>(pos_sorted.size());
  const double nn = static_cast<double>(neg_sorted.size());

  double best = 0.0;
  for (double t : thresholds) {
    auto n_ge = [](const std::vector<double>& v, double x) {
      return static_cast<double>(v.end() - std::lower_bound(v.begin(), v.end(), x));
    };
    double cur_fpr = n_ge(neg_sorted, t) / nn;
    if (cur_fpr <= fpr) best = std::max(best, n_ge(pos_sorted, t) / np);
  }
  return best;
}

}  // namespace retab::stats
