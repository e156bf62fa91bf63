#include "retab/augment.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include "retab/embed.hpp"
#include "retab/kernels.hpp"
#include "retab/rng.hpp"

namespace retab {

std::size_t multiplier(std::size_t n) {
  if (n <= 128) return 30;
  if (n <= 256) return 10;
  if (n <= 1000) return 5;
  return 1;
}

double interpolate_numeric(double seed_value, double neighbor_value, double lambda,
                           bool is_integer) {
  double v = seed_value + lambda * (neighbor_value - seed_value);
  return is_integer ? std::floor(v + 0.5) : v;
}

namespace {

// Neighbor lists are computed lazily per seed row and cached; candidate pools
// can repeat across draws. Ties break on the lower row index.
class NeighborCache {
 public:
  NeighborCache(const Matrix& z, int k) : z_(z), k_(k) {}

  const std::vector<std::size_t>& neighbors(std::size_t seed_row,
                                            const std::vector<std::size_t>& pool) {
    auto it = cache_.find(seed_row);
    if (it != cache_.end()) return it->second;

    std::vector<std::pair<double, std::size_t>> dists;
    dists.reserve(pool.size());
    for (std::size_t other : pool) {
      if (other == seed_row) continue;
      dists.emplace_back(kernels::sq_dist(z_.row(seed_row), z_.row(other), z_.cols), other);
    }
    std::vector<std::size_t> result;
    if (dists.empty()) {
      result.push_back(seed_row);  // singleton pool: the row is its own neighbor
    } else {
      std::size_t k_eff = std::min<std::size_t>(static_cast<std::size_t>(k_), dists.size());
      std::partial_sort(dists.begin(), dists.begin() + k_eff, dists.end());
      result.reserve(k_eff);
      for (std::size_t i = 0; i < k_eff; ++i) result.push_back(dists[i].second);
    }
    return cache_.emplace(seed_row, std::move(result)).first->second;
  }

 private:
  const Matrix& z_;
  int k_;
  std::unordered_map<std::size_t, std::vector<std::size_t>> cache_;
};

Row interpolate_row(const Table& table, const Row& seed, const Row& neighbor, double lambda) {
  Row out = seed;
  for (std::size_t c = 0; c < table.schema.columns.size(); ++c) {
    const Column& col = table.schema.columns[c];
    if (col.numeric()) {
      out[c] = Cell::num(
          interpolate_numeric(seed[c].number, neighbor[c].number, lambda, col.is_integer));
    }
  }
  return out;
}

Matrix zscore_numeric(const Table& table) {
  NumericScaler scaler = NumericScaler::fit(table);
  Matrix z(table.n_rows(), scaler.dim());
  for (std::size_t i = 0; i < table.n_rows(); ++i) scaler.embed(table.rows[i], z.row(i));
  return z;
}

}  // namespace

Table augment_within_buckets(const Table& table, const AugmentConfig& cfg) {
  if (cfg.k_neighbors < 1) throw UserError("augment: k_neighbors must be >= 1");
  Table cleaned = drop_incomplete_rows(table);
  if (cleaned.rows.empty()) {
    throw UserError("augment: every row has missing values");
  }
  const std::size_t n = cleaned.n_rows();
  const std::size_t m = cfg.multiplier_override.value_or(multiplier(n));

  std::vector<int> cat_cols;
  for (std::size_t c = 0; c < cleaned.schema.columns.size(); ++c) {
    if (cleaned.schema.columns[c].categorical()) cat_cols.push_back(static_cast<int>(c));
  }

  // Group rows by full categorical signature.
  std::map<std::vector<int>, std::vector<std::size_t>> buckets;
  std::vector<const std::vector<std::size_t>*> bucket_of_row(n, nullptr);
  {
    std::vector<int> sig(cat_cols.size());
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < cat_cols.size(); ++k) {
        sig[k] = cleaned.rows[i][static_cast<std::size_t>(cat_cols[k])].category;
      }
      buckets[sig].push_back(i);
    }
    for (const auto& [key, members] : buckets) {
      for (std::size_t i : members) bucket_of_row[i] = &members;
    }
  }

  Matrix z = zscore_numeric(cleaned);
  NeighborCache cache(z, cfg.k_neighbors);

  Table out = cleaned;
  out.rows.reserve(n + m * n);
  for (std::size_t i = 0; i < m * n; ++i) {
    Rng rng(Rng::derive(cfg.seed, i));
    // A uniform row draw selects its bucket with probability proportional to
    // bucket size and is itself uniform within that bucket.
    std::size_t seed_row = static_cast<std::size_t>(rng.below(n));
    const auto& pool = *bucket_of_row[seed_row];
    const auto& nbrs = cache.neighbors(seed_row, pool);
    std::size_t nbr = nbrs[static_cast<std::size_t>(rng.below(nbrs.size()))];
    double lambda = rng.uniform();
    out.rows.push_back(interpolate_row(cleaned, cleaned.rows[seed_row], cleaned.rows[nbr], lambda));
  }
  return out;
}

Table smote_generate(const Table& table, std::size_t n_samples, const AugmentConfig& cfg) {
  if (cfg.k_neighbors < 1) throw UserError("smote: k_neighbors must be >= 1");
  int t = table.schema.target_index();
  if (t < 0) throw UserError("smote: no target column");
  if (!table.schema.columns[static_cast<std::size_t>(t)].categorical()) {
    throw UserError("smote: target must be categorical");
  }

  Table cleaned = drop_incomplete_rows(table);
  Table out;
  out.schema = table.schema;
  if (n_samples == 0) return out;
  if (cleaned.rows.empty()) throw UserError("smote: every row has missing values");

  const std::size_t n_classes =
      table.schema.columns[static_cast<std::size_t>(t)].categories.size();
  std::vector<std::vector<std::size_t>> class_rows(n_classes);
  for (std::size_t i = 0; i < cleaned.n_rows(); ++i) {
    class_rows[cleaned.rows[i][static_cast<std::size_t>(t)].category].push_back(i);
  }
  std::vector<double> class_freq(n_classes);
  for (std::size_t k = 0; k < n_classes; ++k) {
    class_freq[k] = static_cast<double>(class_rows[k].size());
  }

  Matrix z = zscore_numeric(cleaned);
  NeighborCache cache(z, cfg.k_neighbors);

  constexpr double kAlpha = 0.5;
  out.rows.reserve(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    Rng rng(Rng::derive(cfg.seed, i));
    std::size_t cls = rng.weighted(class_freq);
    const auto& pool = class_rows[cls];
    std::size_t seed_row = pool[static_cast<std::size_t>(rng.below(pool.size()))];
    const auto& nbrs = cache.neighbors(seed_row, pool);
    std::size_t nbr = nbrs[static_cast<std::size_t>(rng.below(nbrs.size()))];
    Row row = interpolate_row(cleaned, cleaned.rows[seed_row], cleaned.rows[nbr], kAlpha);
    row[static_cast<std::size_t>(t)] = Cell::cat(static_cast<int>(cls));
    out.rows.push_back(std::move(row));
  }
  return out;
}

}  // namespace retab
