#pragma once

#include <cstddef>
#include <vector>

#include "retab/table.hpp"

namespace retab {

struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
  double* row(std::size_t i) { return data.data() + i * cols; }
  const double* row(std::size_t i) const { return data.data() + i * cols; }
};

// Per-column z-scoring statistics over the numeric columns of a table.
// Zero-variance columns scale by 1 so they map to a constant.
struct NumericScaler {
  std::vector<int> numeric_cols;
  std::vector<double> mean;
  std::vector<double> sd;

  static NumericScaler fit(const Table& table);
  std::size_t dim() const { return numeric_cols.size(); }
  void embed(const Row& row, double* out) const;  // row must be complete
};

// Mixed-type embedding into a flat numeric space: z-scored numerics followed
// by one-hot categoricals scaled by onehot_scale. Used for k-NN distances,
// the built-in classifiers, and the privacy attacks.
struct FeatureEmbedding {
  NumericScaler scaler;
  std::vector<int> cat_cols;
  std::vector<std::size_t> cat_offsets;  // into the one-hot block
  std::vector<std::size_t> cat_card;
  std::size_t total_dim = 0;
  double onehot_scale = 1.0;

  // exclude_col < 0 embeds every column; pass the target index to embed
  // features only.
  static FeatureEmbedding fit(const Table& table, double onehot_scale = 1.0,
                              int exclude_col = -1);
  std::size_t dim() const { return total_dim; }
  void embed(const Row& row, double* out) const;
  Matrix embed_complete_rows(const Table& table, std::vector<std::size_t>* kept = nullptr) const;
};

}  // namespace retab
