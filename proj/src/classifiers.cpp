#include "retab/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "retab/kernels.hpp"

namespace retab {

namespace {

int require_binary_target(const Table& train) {
  int t = train.schema.target_index();
  if (t < 0) throw UserError("classifier: no target column");
  const Column& target = train.schema.columns[static_cast<std::size_t>(t)];
  if (!target.categorical() || target.categories.size() != 2) {
    throw UserError("classifier: target must be binary categorical");
  }
  return t;
}

struct TrainMatrix {
  FeatureEmbedding embedding;
  Matrix x;
  std::vector<int> y;
};

TrainMatrix embed_training_data(const Table& train, int target_col) {
  TrainMatrix out;
  out.embedding = FeatureEmbedding::fit(train, 1.0, target_col);
  std::vector<std::size_t> kept;
  out.x = out.embedding.embed_complete_rows(train, &kept);
  // embed_complete_rows checks feature columns only; require the label too
  Matrix x(0, out.x.cols);
  for (std::size_t r = 0; r < kept.size(); ++r) {
    const Cell& label = train.rows[kept[r]][static_cast<std::size_t>(target_col)];
    if (label.kind != Cell::Kind::Category) continue;
    x.data.insert(x.data.end(), out.x.row(r), out.x.row(r) + out.x.cols);
    ++x.rows;
    out.y.push_back(label.category);
  }
  out.x = std::move(x);
  if (out.x.rows == 0) throw UserError("classifier: no complete training rows");
  return out;
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

// ---- logistic regression ---------------------------------------------------

class LogisticRegression final : public Classifier {
 public:
  LogisticRegression(FeatureEmbedding embedding, std::vector<double> weights, double bias)
      : embedding_(std::move(embedding)), weights_(std::move(weights)), bias_(bias) {}

  double score(const Row& row) const override {
    thread_local std::vector<double> features;
    features.assign(embedding_.dim(), 0.0);
    embedding_.embed(row, features.data());
    return sigmoid(bias_ + kernels::dot(weights_.data(), features.data(), features.size()));
  }

  std::string_view name() const override { return "logistic_regression"; }

 private:
  FeatureEmbedding embedding_;
  std::vector<double> weights_;
  double bias_;
};

// ---- naive Bayes -----------------------------------------------------------

class NaiveBayes final : public Classifier {
 public:
  struct NumericStats {
    int col;
    double mean[2] = {0.0, 0.0};
    double var[2] = {1.0, 1.0};
  };
  struct CategoricalStats {
    int col;
    std::vector<double> log_prob[2];  // Laplace-smoothed per class
  };

  NaiveBayes(std::vector<NumericStats> numeric, std::vector<CategoricalStats> categorical,
             double log_prior[2])
      : numeric_(std::move(numeric)), categorical_(std::move(categorical)) {
    log_prior_[0] = log_prior[0];
    log_prior_[1] = log_prior[1];
  }

  double score(const Row& row) const override {
    double log_like[2] = {log_prior_[0], log_prior_[1]};
    for (const auto& ns : numeric_) {
      const Cell& cell = row[static_cast<std::size_t>(ns.col)];
      if (cell.kind != Cell::Kind::Number) continue;
      for (int c = 0; c < 2; ++c) {
        double d = cell.number - ns.mean[c];
        log_like[c] += -0.5 * (std::log(2.0 * M_PI * ns.var[c]) + d * d / ns.var[c]);
      }
    }
    for (const auto& cs : categorical_) {
      const Cell& cell = row[static_cast<std::size_t>(cs.col)];
      if (cell.kind != Cell::Kind::Category) continue;
      for (int c = 0; c < 2; ++c) log_like[c] += cs.log_prob[c][cell.category];
    }
    double m = std::max(log_like[0], log_like[1]);
    double p0 = std::exp(log_like[0] - m);
    double p1 = std::exp(log_like[1] - m);
    return p1 / (p0 + p1);
  }

  std::string_view name() const override { return "naive_bayes"; }

 private:
  std::vector<NumericStats> numeric_;
  std::vector<CategoricalStats> categorical_;
  double log_prior_[2];
};

// ---- CART decision tree ----------------------------------------------------

struct TreeNode {
  int feature = -1;       // -1: leaf
  double threshold = 0.0;  // go left when value <= threshold
  int left = -1, right = -1;
  double leaf_score = 0.5;
};

class DecisionTree final : public Classifier {
 public:
  DecisionTree(FeatureEmbedding embedding, std::vector<TreeNode> nodes)
      : embedding_(std::move(embedding)), nodes_(std::move(nodes)) {}

  double score(const Row& row) const override {
    thread_local std::vector<double> features;
    features.assign(embedding_.dim(), 0.0);
    embedding_.embed(row, features.data());
    int node = 0;
    while (nodes_[node].feature >= 0) {
      node = features[nodes_[node].feature] <= nodes_[node].threshold ? nodes_[node].left
                                                                      : nodes_[node].right;
    }
    return nodes_[node].leaf_score;
  }

  std::string_view name() const override { return "decision_tree"; }

 private:
  FeatureEmbedding embedding_;
  std::vector<TreeNode> nodes_;
};

struct TreeBuilder {
  const Matrix& x;
  const std::vector<int>& y;
  int max_depth;
  std::vector<TreeNode> nodes;

  static double gini(double pos, double total) {
    if (total <= 0.0) return 0.0;
    double p = pos / total;
    return 2.0 * p * (1.0 - p);
  }

  int build(std::vector<std::size_t> idx, int depth) {
    double pos = 0.0;
    for (std::size_t i : idx) pos += y[i];
    const double total = static_cast<double>(idx.size());

    int node_id = static_cast<int>(nodes.size());
    nodes.emplace_back();
    nodes[node_id].leaf_score = total > 0.0 ? pos / total : 0.5;
    if (depth >= max_depth || idx.size() < 2 || pos == 0.0 || pos == total) {
      return node_id;
    }

    const double parent = gini(pos, total);
    double best_gain = 1e-12;
    int best_feature = -1;
    double best_threshold = 0.0;

    std::vector<std::pair<double, int>> column(idx.size());
    for (std::size_t f = 0; f < x.cols; ++f) {
      for (std::size_t i = 0; i < idx.size(); ++i) {
        column[i] = {x.row(idx[i])[f], y[idx[i]]};
      }
      std::sort(column.begin(), column.end());
      double left_pos = 0.0;
      for (std::size_t i = 0; i + 1 < column.size(); ++i) {
        left_pos += column[i].second;
        if (column[i].first == column[i + 1].first) continue;
        double left_n = static_cast<double>(i + 1);
        double right_n = total - left_n;
        double gain = parent - (left_n / total) * gini(left_pos, left_n) -
                      (right_n / total) * gini(pos - left_pos, right_n);
        if (gain > best_gain) {
          best_gain = gain;
          best_feature = static_cast<int>(f);
          best_threshold = 0.5 * (column[i].first + column[i + 1].first);
        }
      }
    }
    if (best_feature < 0) return node_id;

    std::vector<std::size_t> left_idx, right_idx;
    for (std::size_t i : idx) {
      (x.row(i)[best_feature] <= best_threshold ? left_idx : right_idx).push_back(i);
    }
    if (left_idx.empty() || right_idx.empty()) return node_id;

    nodes[node_id].feature = best_feature;
    nodes[node_id].threshold = best_threshold;
    int left = build(std::move(left_idx), depth + 1);
    int right = build(std::move(right_idx), depth + 1);
    nodes[node_id].left = left;
    nodes[node_id].right = right;
    return node_id;
  }
};

}  // namespace

std::unique_ptr<Classifier> fit_logistic_regression(const Table& train) {
  int t = require_binary_target(train);
  TrainMatrix data = embed_training_data(train, t);

  constexpr int kIterations = 500;
  constexpr double kLearningRate = 0.1;
  const std::size_t dim = data.x.cols;
  const double n = static_cast<double>(data.x.rows);

  std::vector<double> w(dim, 0.0), grad(dim);
  double bias = 0.0;
  for (int iter = 0; iter < kIterations; ++iter) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double grad_bias = 0.0;
    for (std::size_t r = 0; r < data.x.rows; ++r) {
      const double* xr = data.x.row(r);
      double err = sigmoid(bias + kernels::dot(w.data(), xr, dim)) - data.y[r];
      kernels::axpy(err, xr, grad.data(), dim);
      grad_bias += err;
    }
    kernels::axpy(-kLearningRate / n, grad.data(), w.data(), dim);
    bias -= kLearningRate / n * grad_bias;
  }
  return std::make_unique<LogisticRegression>(std::move(data.embedding), std::move(w), bias);
}

std::unique_ptr<Classifier> fit_naive_bayes(const Table& train) {
  int t = require_binary_target(train);

  double class_count[2] = {0.0, 0.0};
  for (const Row& row : train.rows) {
    const Cell& label = row[static_cast<std::size_t>(t)];
    if (label.kind == Cell::Kind::Category) class_count[label.category] += 1.0;
  }
  double total = class_count[0] + class_count[1];
  if (total == 0.0) throw UserError("naive_bayes: no labeled rows");
  double log_prior[2];
  for (int c = 0; c < 2; ++c) {
    log_prior[c] = std::log((class_count[c] + 1.0) / (total + 2.0));
  }

  std::vector<NaiveBayes::NumericStats> numeric;
  std::vector<NaiveBayes::CategoricalStats> categorical;
  for (std::size_t col = 0; col < train.schema.columns.size(); ++col) {
    if (static_cast<int>(col) == t) continue;
    const Column& column = train.schema.columns[col];
    if (column.numeric()) {
      NaiveBayes::NumericStats ns;
      ns.col = static_cast<int>(col);
      double sum[2] = {0, 0}, count[2] = {0, 0};
      for (const Row& row : train.rows) {
        const Cell& label = row[static_cast<std::size_t>(t)];
        if (label.kind != Cell::Kind::Category || row[col].kind != Cell::Kind::Number) continue;
        sum[label.category] += row[col].number;
        count[label.category] += 1.0;
      }
      double ss[2] = {0, 0};
      for (int c = 0; c < 2; ++c) ns.mean[c] = count[c] > 0.0 ? sum[c] / count[c] : 0.0;
      for (const Row& row : train.rows) {
        const Cell& label = row[static_cast<std::size_t>(t)];
        if (label.kind != Cell::Kind::Category || row[col].kind != Cell::Kind::Number) continue;
        double d = row[col].number - ns.mean[label.category];
        ss[label.category] += d * d;
      }
      for (int c = 0; c < 2; ++c) {
        double var = count[c] > 0.0 ? ss[c] / count[c] : 1.0;
        ns.var[c] = std::max(var, 1e-9);
      }
      numeric.push_back(ns);
    } else {
      NaiveBayes::CategoricalStats cs;
      cs.col = static_cast<int>(col);
      const std::size_t card = column.categories.size();
      std::vector<double> c0(card, 0.0), c1(card, 0.0);
      for (const Row& row : train.rows) {
        const Cell& label = row[static_cast<std::size_t>(t)];
        if (label.kind != Cell::Kind::Category || row[col].kind != Cell::Kind::Category) continue;
        (label.category == 0 ? c0 : c1)[row[col].category] += 1.0;
      }
      for (int c = 0; c < 2; ++c) {
        const std::vector<double>& counts_c = c == 0 ? c0 : c1;
        double denom = std::accumulate(counts_c.begin(), counts_c.end(), 0.0) +
                       static_cast<double>(card);
        cs.log_prob[c].resize(card);
        for (std::size_t k = 0; k < card; ++k) {
          cs.log_prob[c][k] = std::log((counts_c[k] + 1.0) / denom);
        }
      }
      categorical.push_back(std::move(cs));
    }
  }
  return std::make_unique<NaiveBayes>(std::move(numeric), std::move(categorical), log_prior);
}

std::unique_ptr<Classifier> fit_decision_tree(const Table& train, int max_depth) {
  int t = require_binary_target(train);
  TrainMatrix data = embed_training_data(train, t);

  TreeBuilder builder{data.x, data.y, max_depth, {}};
  std::vector<std::size_t> idx(data.x.rows);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  builder.build(std::move(idx), 0);
  return std::make_unique<DecisionTree>(std::move(data.embedding), std::move(builder.nodes));
}

std::vector<std::unique_ptr<Classifier>> fit_builtin_classifiers(const Table& train) {
  std::vector<std::unique_ptr<Classifier>> out;
  out.push_back(fit_logistic_regression(train));
  out.push_back(fit_naive_bayes(train));
  out.push_back(fit_decision_tree(train));
  return out;
}

}  // namespace retab
