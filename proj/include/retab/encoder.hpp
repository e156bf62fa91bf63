#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "retab/rng.hpp"
#include "retab/table.hpp"

namespace retab {

// Token per column; numeric tokens index quantile bins, categorical tokens
// are category indices.
using EncodedRow = std::vector<int>;

struct ColumnCodec {
  bool numeric = false;
  bool is_integer = false;
  std::vector<double> edges;  // interior edges, strictly increasing
  double lo = 0.0;
  double hi = 0.0;
  int vocab = 0;  // edges.size()+1 for numeric, category count otherwise
};

struct BinSpec {
  int requested_bins = 32;
  std::vector<ColumnCodec> columns;

  int vocab(std::size_t col) const { return columns[col].vocab; }
  nlohmann::json to_json() const;
  static BinSpec from_json(const nlohmann::json& j);
};

struct FitBinsResult {
  BinSpec spec;
  std::vector<std::string> warnings;
};

// Interior edges at empirical quantiles j/B (linear interpolation on the
// sorted sample). Integer columns snap edges to half-integers so every bin
// holds at least one representable value; duplicate edges collapse, which can
// shrink a column's effective vocabulary.
FitBinsResult fit_bins(const Table& table, int bins);

// Right-closed bins: a value maps to the first bin whose upper edge is >= it.
// Out-of-range values clamp to the boundary bins (*clamped counts them).
EncodedRow encode_row(const Row& row, const BinSpec& spec, std::size_t* clamped = nullptr);

struct EncodeResult {
  std::vector<EncodedRow> rows;
  std::size_t clamped = 0;
  std::size_t dropped_incomplete = 0;
};

EncodeResult encode_table(const Table& table, const BinSpec& spec);

// Numeric tokens decode to a uniform draw within the bin (integer columns
// round half-up, staying inside the bin). decode then encode is exact.
Row decode_row(const EncodedRow& enc, const BinSpec& spec, Rng& rng);

Table decode_rows(const std::vector<EncodedRow>& rows, const Schema& schema,
                  const BinSpec& spec, std::uint64_t seed);

}  // namespace retab
