#include "retab/evalsuite.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "retab/classifiers.hpp"
#include "retab/embed.hpp"
#include "retab/kernels.hpp"
#include "retab/stats.hpp"

namespace retab {

namespace {

void require_shared_schema(const Table& real, const Table& synth, const char* who) {
  if (real.schema.columns.size() != synth.schema.columns.size()) {
    throw UserError(std::string(who) + ": column counts differ");
  }
  for (std::size_t c = 0; c < real.schema.columns.size(); ++c) {
    const Column& a = real.schema.columns[c];
    const Column& b = synth.schema.columns[c];
    if (a.name != b.name || a.kind != b.kind || a.categories != b.categories) {
      throw UserError(std::string(who) + ": schemas differ at column '" + a.name + "'");
    }
  }
}

std::vector<double> numeric_values(const Table& t, std::size_t col) {
  std::vector<double> out;
  for (const Row& row : t.rows) {
    if (row[col].kind == Cell::Kind::Number) out.push_back(row[col].number);
  }
  return out;
}

std::vector<double> category_counts(const Table& t, std::size_t col) {
  std::vector<double> counts(t.schema.columns[col].categories.size(), 0.0);
  for (const Row& row : t.rows) {
    if (row[col].kind == Cell::Kind::Category) counts[row[col].category] += 1.0;
  }
  return counts;
}

// Association coefficient for a column pair, NaN when not computable.
// Numeric pairs keep Pearson's sign; the rest are nonnegative.
double pair_coefficient(const Table& t, std::size_t a, std::size_t b) {
  const Column& ca = t.schema.columns[a];
  const Column& cb = t.schema.columns[b];
  if (ca.numeric() && cb.numeric()) {
    std::vector<double> xs, ys;
    for (const Row& row : t.rows) {
      if (row[a].kind == Cell::Kind::Number && row[b].kind == Cell::Kind::Number) {
        xs.push_back(row[a].number);
        ys.push_back(row[b].number);
      }
    }
    return stats::pearson(xs, ys);
  }
  if (ca.categorical() && cb.categorical()) {
    std::vector<int> xs, ys;
    for (const Row& row : t.rows) {
      if (row[a].kind == Cell::Kind::Category && row[b].kind == Cell::Kind::Category) {
        xs.push_back(row[a].category);
        ys.push_back(row[b].category);
      }
    }
    return stats::cramers_v(xs, static_cast<int>(ca.categories.size()), ys,
                            static_cast<int>(cb.categories.size()));
  }
  std::size_t cat = ca.categorical() ? a : b;
  std::size_t num = ca.categorical() ? b : a;
  std::vector<int> groups;
  std::vector<double> values;
  for (const Row& row : t.rows) {
    if (row[cat].kind == Cell::Kind::Category && row[num].kind == Cell::Kind::Number) {
      groups.push_back(row[cat].category);
      values.push_back(row[num].number);
    }
  }
  return stats::correlation_ratio(groups, static_cast<int>(t.schema.columns[cat].categories.size()),
                                  values);
}

// Joint-category TVD for a categorical pair.
double contingency_tvd(const Table& real, const Table& synth, std::size_t a, std::size_t b) {
  std::size_t card_a = real.schema.columns[a].categories.size();
  std::size_t card_b = real.schema.columns[b].categories.size();
  std::vector<double> pr(card_a * card_b, 0.0), ps(card_a * card_b, 0.0);
  auto fill = [&](const Table& t, std::vector<double>& counts) {
    for (const Row& row : t.rows) {
      if (row[a].kind == Cell::Kind::Category && row[b].kind == Cell::Kind::Category) {
        counts[static_cast<std::size_t>(row[a].category) * card_b + row[b].category] += 1.0;
      }
    }
  };
  fill(real, pr);
  fill(synth, ps);
  return stats::tvd(pr, ps);
}

}  // namespace

ShapeReport shape_score(const Table& real, const Table& synth) {
  require_shared_schema(real, synth, "shape_score");
  if (real.rows.empty() || synth.rows.empty()) throw UserError("shape_score: empty table");

  ShapeReport out;
  for (std::size_t c = 0; c < real.schema.columns.size(); ++c) {
    const Column& col = real.schema.columns[c];
    double score;
    if (col.numeric()) {
      score = 1.0 - stats::ks_statistic(numeric_values(real, c), numeric_values(synth, c));
    } else {
      score = 1.0 - stats::tvd(category_counts(real, c), category_counts(synth, c));
    }
    out.per_column.push_back({col.name, score});
    out.mean += score;
  }
  out.mean /= static_cast<double>(out.per_column.size());
  return out;
}

CorrReport corr_similarity(const Table& real, const Table& synth) {
  require_shared_schema(real, synth, "corr_similarity");
  const std::size_t n = real.schema.columns.size();
  if (n < 2) throw UserError("corr_similarity: need at least 2 columns");

  CorrReport out;
  out.matrix.assign(n, std::vector<double>(n, 1.0));
  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      const bool both_cat =
          real.schema.columns[a].categorical() && real.schema.columns[b].categorical();
      double sim;
      if (both_cat) {
        sim = 1.0 - contingency_tvd(real, synth, a, b);
      } else {
        double cr = pair_coefficient(real, a, b);
        double cs = pair_coefficient(synth, a, b);
        const bool nr = std::isnan(cr), ns = std::isnan(cs);
        if (nr && ns) {
          sim = 1.0;  // degenerate in both tables: identical (absent) structure
        } else {
          if (nr || ns) {
            ++out.guarded_pairs;
            if (nr) cr = 0.0;
            if (ns) cs = 0.0;
          }
          const bool numeric_pair =
              real.schema.columns[a].numeric() && real.schema.columns[b].numeric();
          sim = numeric_pair ? 1.0 - std::fabs(cr - cs) / 2.0 : 1.0 - std::fabs(cr - cs);
        }
      }
      out.matrix[a][b] = out.matrix[b][a] = sim;
      sum += sim;
      ++pairs;
    }
  }
  out.mean = sum / static_cast<double>(pairs);
  return out;
}

FeatureTargetReport feature_target_score(const Table& real, const Table& synth) {
  require_shared_schema(real, synth, "feature_target_score");
  int t = real.schema.target_index();
  if (t < 0) throw UserError("feature_target_score: no target column");

  FeatureTargetReport out;
  for (std::size_t c = 0; c < real.schema.columns.size(); ++c) {
    if (static_cast<int>(c) == t) continue;
    double r = pair_coefficient(real, c, static_cast<std::size_t>(t));
    double s = pair_coefficient(synth, c, static_cast<std::size_t>(t));
    const bool nr = std::isnan(r), ns = std::isnan(s);
    double score;
    if (nr && ns) {
      score = 1.0;
    } else {
      if (nr || ns) {
        ++out.guarded_pairs;
        if (nr) r = 0.0;
        if (ns) s = 0.0;
      }
      score = 1.0 - 2.0 * std::fabs(s - r);
    }
    out.per_column.push_back({real.schema.columns[c].name, score});
    out.mean += score;
  }
  if (!out.per_column.empty()) out.mean /= static_cast<double>(out.per_column.size());
  return out;
}

PrecisionRecall precision_recall(const Table& real, const Table& synth, int k) {
  require_shared_schema(real, synth, "precision_recall");
  if (k < 1) throw UserError("precision_recall: k must be >= 1");

  FeatureEmbedding embedding = FeatureEmbedding::fit(real, 1.0, -1);
  Matrix r = embedding.embed_complete_rows(real);
  Matrix s = embedding.embed_complete_rows(synth);
  if (r.rows < static_cast<std::size_t>(k) + 1) {
    throw UserError("precision_recall: need more than k real rows");
  }
  if (s.rows == 0) throw UserError("precision_recall: no complete synthetic rows");

  // k-th nearest same-set squared radius per point (self excluded)
  auto knn_radius = [](const Matrix& m, int kk) {
    std::vector<double> radius(m.rows, 0.0);
    std::vector<double> dists;
    for (std::size_t i = 0; i < m.rows; ++i) {
      dists.clear();
      for (std::size_t j = 0; j < m.rows; ++j) {
        if (j == i) continue;
        dists.push_back(kernels::sq_dist(m.row(i), m.row(j), m.cols));
      }
      std::size_t k_eff = std::min<std::size_t>(static_cast<std::size_t>(kk), dists.size());
      if (k_eff == 0) continue;
      std::nth_element(dists.begin(), dists.begin() + (k_eff - 1), dists.end());
      radius[i] = dists[k_eff - 1];
    }
    return radius;
  };

  auto covered_fraction = [](const Matrix& probes, const Matrix& anchors,
                             const std::vector<double>& radius) {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < probes.rows; ++i) {
      double best = std::numeric_limits<double>::infinity();
      std::size_t best_j = 0;
      for (std::size_t j = 0; j < anchors.rows; ++j) {
        double d = kernels::sq_dist(probes.row(i), anchors.row(j), probes.cols);
        if (d < best) {
          best = d;
          best_j = j;
        }
      }
      hits += best <= radius[best_j];
    }
    return static_cast<double>(hits) / static_cast<double>(probes.rows);
  };

  PrecisionRecall out;
  out.alpha_precision = covered_fraction(s, r, knn_radius(r, k));
  out.beta_recall = covered_fraction(r, s, knn_radius(s, k));
  return out;
}

UtilityReport downstream_utility(const Table& synth_train, const Table& real_test,
                                 UtilityMetric metric, std::uint64_t seed) {
  (void)seed;  // the built-in classifiers are deterministic
  require_shared_schema(synth_train, real_test, "downstream_utility");
  int t = real_test.schema.target_index();
  if (t < 0) throw UserError("downstream_utility: no target column");
  const Column& target = real_test.schema.columns[static_cast<std::size_t>(t)];
  if (!target.categorical() || target.categories.size() != 2) {
    throw UserError("downstream_utility: target must be binary categorical");
  }

  UtilityReport out;

  Table test = drop_incomplete_rows(real_test);
  if (test.n_rows() < real_test.n_rows()) {
    out.warnings.push_back("dropped " + std::to_string(real_test.n_rows() - test.n_rows()) +
                           " incomplete test rows");
  }
  std::vector<int> labels;
  labels.reserve(test.n_rows());
  for (const Row& row : test.rows) {
    labels.push_back(row[static_cast<std::size_t>(t)].category);
  }
  bool has0 = false, has1 = false;
  for (int l : labels) (l ? has1 : has0) = true;
  if (!has0 || !has1) throw UserError("downstream_utility: test set must contain both classes");

  Table train = drop_incomplete_rows(synth_train);
  bool trainable = false;
  {
    bool t0 = false, t1 = false;
    for (const Row& row : train.rows) {
      (row[static_cast<std::size_t>(t)].category ? t1 : t0) = true;
    }
    trainable = t0 && t1;
  }

  static const char* kNames[] = {"logistic_regression", "naive_bayes", "decision_tree"};
  if (!trainable) {
    out.warnings.push_back("synthetic training data has a single class; scores degrade to 0.5");
    for (const char* name : kNames) out.classifiers.push_back({name, 0.5, 0.5});
  } else {
    auto classifiers = fit_builtin_classifiers(train);
    std::vector<double> scores(test.n_rows());
    for (const auto& clf : classifiers) {
      for (std::size_t i = 0; i < test.n_rows(); ++i) scores[i] = clf->score(test.rows[i]);
      auto rm = stats::rank_metrics(scores, labels);
      out.classifiers.push_back({std::string(clf->name()), rm.auroc, rm.pr_auc});
    }
  }

  for (const auto& c : out.classifiers) {
    out.mean_auroc += c.auroc;
    out.mean_pr_auc += c.pr_auc;
  }
  out.mean_auroc /= static_cast<double>(out.classifiers.size());
  out.mean_pr_auc /= static_cast<double>(out.classifiers.size());
  out.headline = metric == UtilityMetric::Auroc ? out.mean_auroc : out.mean_pr_auc;
  return out;
}

FidelityReport fidelity_report(const Table& real, const Table& synth, int k) {
  FidelityReport out;
  out.shape = shape_score(real, synth);
  out.corr = corr_similarity(real, synth);
  out.feature_target = feature_target_score(real, synth);
  out.pr = precision_recall(real, synth, k);
  return out;
}

nlohmann::json utility_to_json(const UtilityReport& r) {
  nlohmann::json per = nlohmann::json::array();
  for (const auto& c : r.classifiers) {
    per.push_back({{"name", c.name}, {"auroc", c.auroc}, {"pr_auc", c.pr_auc}});
  }
  return nlohmann::json{{"classifiers", std::move(per)},
                        {"mean_auroc", r.mean_auroc},
                        {"mean_pr_auc", r.mean_pr_auc},
                        {"headline", r.headline},
                        {"warnings", r.warnings}};
}

nlohmann::json fidelity_to_json(const FidelityReport& r, const Schema& schema) {
  nlohmann::json shape_cols;
  for (const auto& c : r.shape.per_column) shape_cols[c.column] = c.score;
  nlohmann::json ft_cols;
  for (const auto& c : r.feature_target.per_column) ft_cols[c.column] = c.score;
  nlohmann::json matrix = nlohmann::json::array();
  for (const auto& row : r.corr.matrix) matrix.push_back(row);
  nlohmann::json names = nlohmann::json::array();
  for (const auto& col : schema.columns) names.push_back(col.name);
  return nlohmann::json{
      {"shape", {{"per_column", std::move(shape_cols)}, {"mean", r.shape.mean}}},
      {"corr",
       {{"columns", std::move(names)},
        {"matrix", std::move(matrix)},
        {"mean", r.corr.mean},
        {"guarded_pairs", r.corr.guarded_pairs}}},
      {"feature_target", {{"per_column", std::move(ft_cols)}, {"mean", r.feature_target.mean}}},
      {"alpha_precision", r.pr.alpha_precision},
      {"beta_recall", r.pr.beta_recall}};
}

}  // namespace retab
