#pragma once

#include <memory>
#include <string_view>
#include <vector>

#include "retab/embed.hpp"
#include "retab/table.hpp"

namespace retab {

// Binary classifier over raw rows; score is P(target == category index 1).
class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual double score(const Row& row) const = 0;
  virtual std::string_view name() const = 0;
};

// Logistic regression by full-batch gradient descent (500 iterations,
// learning rate 0.1) on z-scored numerics + one-hot categoricals.
std::unique_ptr<Classifier> fit_logistic_regression(const Table& train);

// Gaussian likelihoods for numeric columns, Laplace-smoothed category counts
// for categorical ones.
std::unique_ptr<Classifier> fit_naive_bayes(const Table& train);

// CART with Gini impurity on the embedded feature space.
std::unique_ptr<Classifier> fit_decision_tree(const Table& train, int max_depth = 5);

std::vector<std::unique_ptr<Classifier>> fit_builtin_classifiers(const Table& train);

}  // namespace retab
