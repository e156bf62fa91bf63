#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "retab/error.hpp"
#include "retab/rng.hpp"
#include "retab/stats.hpp"

using namespace retab;

TEST_CASE("ks statistic basics") {
  CHECK(stats::ks_statistic({1, 2, 3}, {1, 2, 3}) == 0.0);
  CHECK(stats::ks_statistic({0, 1, 2}, {10, 11, 12}) == 1.0);
  // half the mass shifted
  CHECK(stats::ks_statistic({0, 0, 1, 1}, {1, 1, 2, 2}) == doctest::Approx(0.5));
}

TEST_CASE("tvd basics") {
  CHECK(stats::tvd({5, 5}, {5, 5}) == 0.0);
  CHECK(stats::tvd({1, 1}, {2, 0}) == doctest::Approx(0.5));
  CHECK(stats::tvd({1, 0}, {0, 1}) == doctest::Approx(1.0));
}

TEST_CASE("pearson extremes and degenerate input") {
  std::vector<double> x{1, 2, 3, 4};
  std::vector<double> y{2, 4, 6, 8};
  CHECK(stats::pearson(x, y) == doctest::Approx(1.0));
  std::vector<double> neg{8, 6, 4, 2};
  CHECK(stats::pearson(x, neg) == doctest::Approx(-1.0));
  CHECK(std::isnan(stats::pearson(x, {1, 1, 1, 1})));
}

TEST_CASE("cramers v extremes") {
  std::vector<int> a{0, 0, 1, 1, 0, 1};
  CHECK(stats::cramers_v(a, 2, a, 2) == doctest::Approx(1.0));
  std::vector<int> b{1, 1, 0, 0, 1, 0};
  CHECK(stats::cramers_v(a, 2, b, 2) == doctest::Approx(1.0));  // perfect (anti-)association
  std::vector<int> single(6, 0);
  CHECK(std::isnan(stats::cramers_v(a, 2, single, 2)));
}

TEST_CASE("correlation ratio on grouped data") {
  // groups fully determine the value -> eta = 1
  std::vector<int> g{0, 0, 1, 1};
  std::vector<double> v{1, 1, 5, 5};
  CHECK(stats::correlation_ratio(g, 2, v) == doctest::Approx(1.0));
  // identical group means -> eta = 0
  std::vector<double> flat{1, 3, 1, 3};
  CHECK(stats::correlation_ratio(g, 2, flat) == doctest::Approx(0.0));
  CHECK(std::isnan(stats::correlation_ratio(g, 2, {2, 2, 2, 2})));
}

TEST_CASE("auroc hand cases") {
  CHECK(stats::rank_metrics({0.9, 0.8, 0.1}, {1, 1, 0}).auroc == 1.0);
  CHECK(stats::rank_metrics({0.5, 0.5}, {1, 0}).auroc == 0.5);
  CHECK(stats::rank_metrics({0.1, 0.9}, {1, 0}).auroc == 0.0);
  CHECK_THROWS_AS(stats::rank_metrics({0.1, 0.9}, {1, 1}), UserError);
}

TEST_CASE("auroc label flip antisymmetry and monotone invariance") {
  Rng rng(5);
  std::vector<double> scores;
  std::vector<int> labels, flipped;
  for (int i = 0; i < 200; ++i) {
    scores.push_back(rng.uniform());
    labels.push_back(rng.below(2) == 1);
    flipped.push_back(1 - labels.back());
  }
  double a = stats::rank_metrics(scores, labels).auroc;
  CHECK(stats::rank_metrics(scores, flipped).auroc == doctest::Approx(1.0 - a).epsilon(1e-12));

  std::vector<double> transformed;
  for (double s : scores) transformed.push_back(std::exp(3.0 * s) + 7.0);
  CHECK(stats::rank_metrics(transformed, labels).auroc == a);
}

TEST_CASE("rank metrics match the brute-force oracles on random instances") {
  Rng rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    std::size_t n = 5 + rng.below(60);
    std::vector<double> scores;
    std::vector<int> labels;
    bool has0 = false, has1 = false;
    for (std::size_t i = 0; i < n; ++i) {
      // quantized scores force tie handling
      scores.push_back(static_cast<double>(rng.below(8)) / 8.0);
      labels.push_back(static_cast<int>(rng.below(2)));
      (labels.back() ? has1 : has0) = true;
    }
    if (!has0 || !has1) continue;
    auto rm = stats::rank_metrics(scores, labels);
    CHECK(rm.auroc == oracle::auroc(scores, labels));  // exact
    CHECK(rm.pr_auc == doctest::Approx(oracle::pr_auc(scores, labels)).epsilon(1e-12));
  }
}

TEST_CASE("ks/tvd/pearson/v/eta match oracles on random data") {
  Rng rng(123);
  for (int trial = 0; trial < 200; ++trial) {
    std::size_t n = 10 + rng.below(80);

    std::vector<double> a, b;
    for (std::size_t i = 0; i < n; ++i) {
      a.push_back(std::round(rng.uniform() * 10.0) / 10.0);
      b.push_back(std::round((rng.uniform() + 0.2 * rng.uniform()) * 10.0) / 10.0);
    }
    CHECK(stats::ks_statistic(a, b) == doctest::Approx(oracle::ks_statistic(a, b)).epsilon(1e-9));
    CHECK(stats::pearson(a, b) == doctest::Approx(oracle::pearson(a, b)).epsilon(1e-9));

    std::vector<int> ca, cb;
    std::vector<double> counts_a(3, 0.0), counts_b(4, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      ca.push_back(static_cast<int>(rng.below(3)));
      cb.push_back(static_cast<int>(rng.below(4)));
      counts_a[ca.back()] += 1.0;
      counts_b[cb.back()] += 1.0;
    }
    CHECK(stats::tvd(counts_a, {1, 1, 1}) ==
          doctest::Approx(oracle::tvd(counts_a, {1, 1, 1})).epsilon(1e-9));
    double v = stats::cramers_v(ca, 3, cb, 4);
    if (!std::isnan(v)) {
      CHECK(v == doctest::Approx(std::min(1.0, oracle::cramers_v(ca, 3, cb, 4))).epsilon(1e-9));
    }
    double eta = stats::correlation_ratio(ca, 3, a);
    if (!std::isnan(eta)) {
      CHECK(eta == doctest::Approx(oracle::correlation_ratio(ca, 3, a)).epsilon(1e-9));
    }
  }
}

TEST_CASE("tpr at fpr conventions") {
  // perfect separation
  CHECK(stats::tpr_at_fpr({10, 11, 12}, {1, 2, 3}, 0.01) == doctest::Approx(1.0));
  // 10 nonmembers at fpr 0.01: zero false positives allowed; only members
  // strictly above the best nonmember count
  std::vector<double> pos{0.95, 0.9, 0.5};
  std::vector<double> neg{0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2, 0.1, 0.0};
  CHECK(stats::tpr_at_fpr(pos, neg, 0.01) == doctest::Approx(1.0 / 3.0));
  // at fpr 0.10 one false positive is allowed
  CHECK(stats::tpr_at_fpr(pos, neg, 0.1001) == doctest::Approx(2.0 / 3.0));
}
