#include "retab/embed.hpp"

#include <cmath>

namespace retab {

NumericScaler NumericScaler::fit(const Table& table) {
  NumericScaler s;
  for (std::size_t c = 0; c < table.schema.columns.size(); ++c) {
    if (table.schema.columns[c].numeric()) s.numeric_cols.push_back(static_cast<int>(c));
  }
  s.mean.assign(s.numeric_cols.size(), 0.0);
  s.sd.assign(s.numeric_cols.size(), 1.0);
  for (std::size_t k = 0; k < s.numeric_cols.size(); ++k) {
    std::size_t c = static_cast<std::size_t>(s.numeric_cols[k]);
    double sum = 0.0, count = 0.0;
    for (const Row& row : table.rows) {
      if (row[c].kind == Cell::Kind::Number) {
        sum += row[c].number;
        count += 1.0;
      }
    }
    if (count == 0.0) continue;
    double mean = sum / count;
    double ss = 0.0;
    for (const Row& row : table.rows) {
      if (row[c].kind == Cell::Kind::Number) {
        double d = row[c].number - mean;
        ss += d * d;
      }
    }
    s.mean[k] = mean;
    double var = ss / count;
    s.sd[k] = var > 0.0 ? std::sqrt(var) : 1.0;
  }
  return s;
}

void NumericScaler::embed(const Row& row, double* out) const {
  for (std::size_t k = 0; k < numeric_cols.size(); ++k) {
    out[k] = (row[static_cast<std::size_t>(numeric_cols[k])].number - mean[k]) / sd[k];
  }
}

FeatureEmbedding FeatureEmbedding::fit(const Table& table, double onehot_scale, int exclude_col) {
  FeatureEmbedding e;
  e.onehot_scale = onehot_scale;

  Table pruned;  // schema only; used to fit the scaler on the kept columns
  pruned.schema.target = table.schema.target;
  std::vector<int> kept_cols;
  for (std::size_t c = 0; c < table.schema.columns.size(); ++c) {
    if (static_cast<int>(c) == exclude_col) continue;
    kept_cols.push_back(static_cast<int>(c));
  }

  for (int c : kept_cols) {
    if (table.schema.columns[static_cast<std::size_t>(c)].numeric()) {
      e.scaler.numeric_cols.push_back(c);
    }
  }
  e.scaler.mean.assign(e.scaler.numeric_cols.size(), 0.0);
  e.scaler.sd.assign(e.scaler.numeric_cols.size(), 1.0);
  {
    NumericScaler full = NumericScaler::fit(table);
    for (std::size_t k = 0; k < e.scaler.numeric_cols.size(); ++k) {
      for (std::size_t j = 0; j < full.numeric_cols.size(); ++j) {
        if (full.numeric_cols[j] == e.scaler.numeric_cols[k]) {
          e.scaler.mean[k] = full.mean[j];
          e.scaler.sd[k] = full.sd[j];
        }
      }
    }
  }

  std::size_t offset = 0;
  for (int c : kept_cols) {
    const Column& col = table.schema.columns[static_cast<std::size_t>(c)];
    if (col.categorical()) {
      e.cat_cols.push_back(c);
      e.cat_offsets.push_back(offset);
      offset += col.categories.size();
    }
  }
  e.total_dim = e.scaler.dim() + offset;
  e.cat_card.clear();
  for (int c : e.cat_cols) {
    e.cat_card.push_back(table.schema.columns[static_cast<std::size_t>(c)].categories.size());
  }
  return e;
}

void FeatureEmbedding::embed(const Row& row, double* out) const {
  scaler.embed(row, out);
  double* hot = out + scaler.dim();
  for (std::size_t k = 0; k < cat_offsets.size(); ++k) {
    std::size_t width = cat_card[k];
    for (std::size_t j = 0; j < width; ++j) hot[cat_offsets[k] + j] = 0.0;
    int idx = row[static_cast<std::size_t>(cat_cols[k])].category;
    hot[cat_offsets[k] + static_cast<std::size_t>(idx)] = onehot_scale;
  }
}

Matrix FeatureEmbedding::embed_complete_rows(const Table& table,
                                             std::vector<std::size_t>* kept) const {
  std::vector<std::size_t> complete;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    bool ok = true;
    for (std::size_t k = 0; k < scaler.numeric_cols.size() && ok; ++k) {
      ok = table.rows[i][static_cast<std::size_t>(scaler.numeric_cols[k])].kind == Cell::Kind::Number;
    }
    for (std::size_t k = 0; k < cat_cols.size() && ok; ++k) {
      ok = table.rows[i][static_cast<std::size_t>(cat_cols[k])].kind == Cell::Kind::Category;
    }
    if (ok) complete.push_back(i);
  }
  Matrix m(complete.size(), total_dim);
  for (std::size_t r = 0; r < complete.size(); ++r) {
    embed(table.rows[complete[r]], m.row(r));
  }
  if (kept) *kept = std::move(complete);
  return m;
}

}  // namespace retab
