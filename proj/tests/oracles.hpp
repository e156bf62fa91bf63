#pragma once

// Brute-force reference implementations used to check the production metric
// code. Deliberately naive (quadratic scans, direct formulas) and kept
// independent of the library's algorithms.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

namespace oracle {

// KS: evaluate both empirical CDFs at every pooled sample point.
inline double ks_statistic(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> pooled = a;
  pooled.insert(pooled.end(), b.begin(), b.end());
  double worst = 0.0;
  for (double v : pooled) {
    double fa = 0.0, fb = 0.0;
    for (double x : a) fa += x <= v;
    for (double x : b) fb += x <= v;
    fa /= static_cast<double>(a.size());
    fb /= static_cast<double>(b.size());
    worst = std::max(worst, std::fabs(fa - fb));
  }
  return worst;
}

inline double tvd(const std::vector<double>& counts_p, const std::vector<double>& counts_q) {
  double np = 0.0, nq = 0.0;
  for (double c : counts_p) np += c;
  for (double c : counts_q) nq += c;
  double sum = 0.0;
  for (std::size_t i = 0; i < std::max(counts_p.size(), counts_q.size()); ++i) {
    double p = i < counts_p.size() ? counts_p[i] / np : 0.0;
    double q = i < counts_q.size() ? counts_q[i] / nq : 0.0;
    sum += std::fabs(p - q);
  }
  return 0.5 * sum;
}

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    syy += y[i] * y[i];
    sxy += x[i] * y[i];
  }
  double cov = sxy / n - (sx / n) * (sy / n);
  double vx = sxx / n - (sx / n) * (sx / n);
  double vy = syy / n - (sy / n) * (sy / n);
  return cov / std::sqrt(vx * vy);
}

inline double cramers_v(const std::vector<int>& a, int card_a, const std::vector<int>& b,
                        int card_b) {
  const double n = static_cast<double>(a.size());
  std::vector<std::vector<double>> table(card_a, std::vector<double>(card_b, 0.0));
  for (std::size_t i = 0; i < a.size(); ++i) table[a[i]][b[i]] += 1.0;

  std::vector<double> row(card_a, 0.0), col(card_b, 0.0);
  for (int r = 0; r < card_a; ++r) {
    for (int c = 0; c < card_b; ++c) {
      row[r] += table[r][c];
      col[c] += table[r][c];
    }
  }
  int live_r = 0, live_c = 0;
  for (double v : row) live_r += v > 0;
  for (double v : col) live_c += v > 0;

  double chi2 = 0.0;
  for (int r = 0; r < card_a; ++r) {
    for (int c = 0; c < card_b; ++c) {
      if (row[r] == 0.0 || col[c] == 0.0) continue;
      double expected = row[r] * col[c] / n;
      chi2 += (table[r][c] - expected) * (table[r][c] - expected) / expected;
    }
  }
  double dof = std::min(live_r, live_c) - 1.0;
  return std::sqrt(chi2 / (n * dof));
}

inline double correlation_ratio(const std::vector<int>& groups, int n_groups,
                                const std::vector<double>& values) {
  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;

  double between = 0.0;
  for (int g = 0; g < n_groups; ++g) {
    double gsum = 0.0, gcount = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (groups[i] == g) {
        gsum += values[i];
        gcount += 1.0;
      }
    }
    if (gcount == 0.0) continue;
    double gm = gsum / gcount;
    between += gcount * (gm - mean) * (gm - mean);
  }
  double total = 0.0;
  for (double v : values) total += (v - mean) * (v - mean);
  return std::sqrt(between / total);
}

// AUROC by explicit pair counting in doubled integer units; bitwise
// comparable with the rank-based implementation.
inline double auroc(const std::vector<double>& scores, const std::vector<int>& labels) {
  std::uint64_t wins2 = 0, n_pos = 0, n_neg = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!labels[i]) continue;
    ++n_pos;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j]) continue;
      if (scores[i] > scores[j]) wins2 += 2;
      else if (scores[i] == scores[j]) wins2 += 1;
    }
  }
  for (int l : labels) n_neg += !l;
  return static_cast<double>(wins2) / (2.0 * static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

// Average precision evaluated from scratch at each distinct threshold.
inline double pr_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  std::vector<double> thresholds = scores;
  std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

  double n_pos = 0.0;
  for (int l : labels) n_pos += l;

  double ap = 0.0, prev_recall = 0.0;
  for (double t : thresholds) {
    double tp = 0.0, fp = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (scores[i] >= t) (labels[i] ? tp : fp) += 1.0;
    }
    double recall = tp / n_pos;
    double precision = tp / (tp + fp);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
  }
  return ap;
}

}  // namespace oracle
