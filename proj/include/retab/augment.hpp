#pragma once

#include <cstdint>
#include <optional>

#include "retab/table.hpp"

namespace retab {

struct AugmentConfig {
  int k_neighbors = 5;
  std::uint64_t seed = 0;
  std::optional<std::size_t> multiplier_override;
};

// Augmentation aggressiveness schedule: 30x for tiny tables down to 1x past
// a thousand rows, so total size stays within 31x the input.
std::size_t multiplier(std::size_t n);

// Linear interpolation on a numeric cell; integer columns round half-up.
double interpolate_numeric(double seed_value, double neighbor_value, double lambda,
                           bool is_integer);

// Drops incomplete rows, then appends M(N)*N synthetic rows built by
// interpolating between k-NN pairs inside each categorical-signature bucket.
// Distances are Euclidean on z-scored numeric columns.
Table augment_within_buckets(const Table& table, const AugmentConfig& cfg);

// SMOTE-style generator baseline: every output row interpolates a seed row
// of a frequency-sampled target class halfway (alpha = 0.5) toward one of
// its k nearest same-class neighbors.
Table smote_generate(const Table& table, std::size_t n_samples, const AugmentConfig& cfg);

}  // namespace retab
