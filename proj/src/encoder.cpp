#include "retab/encoder.hpp"

#include <algorithm>
#include <cmath>

namespace retab {

nlohmann::json BinSpec::to_json() const {
  nlohmann::json cols = nlohmann::json::array();
  for (const auto& c : columns) {
    nlohmann::json jc;
    jc["numeric"] = c.numeric;
    if (c.numeric) {
      jc["integer"] = c.is_integer;
      jc["edges"] = c.edges;
      jc["lo"] = c.lo;
      jc["hi"] = c.hi;
    }
    jc["vocab"] = c.vocab;
    cols.push_back(std::move(jc));
  }
  return nlohmann::json{{"bins", requested_bins}, {"columns", std::move(cols)}};
}

BinSpec BinSpec::from_json(const nlohmann::json& j) {
  BinSpec spec;
  spec.requested_bins = j.at("bins").get<int>();
  for (const auto& jc : j.at("columns")) {
    ColumnCodec c;
    c.numeric = jc.at("numeric").get<bool>();
    if (c.numeric) {
      c.is_integer = jc.at("integer").get<bool>();
      c.edges = jc.at("edges").get<std::vector<double>>();
      c.lo = jc.at("lo").get<double>();
      c.hi = jc.at("hi").get<double>();
    }
    c.vocab = jc.at("vocab").get<int>();
    spec.columns.push_back(std::move(c));
  }
  return spec;
}

namespace {

double linear_quantile(const std::vector<double>& sorted, double q) {
  const std::size_t n = sorted.size();
  double h = q * static_cast<double>(n - 1);
  std::size_t k = static_cast<std::size_t>(std::floor(h));
  if (k + 1 >= n) return sorted[n - 1];
  double frac = h - static_cast<double>(k);
  return sorted[k] + frac * (sorted[k + 1] - sorted[k]);
}

}  // namespace

FitBinsResult fit_bins(const Table& table, int bins) {
  if (bins < 2) throw UserError("fit_bins: bin count must be >= 2");
  FitBinsResult out;
  out.spec.requested_bins = bins;

  for (std::size_t c = 0; c < table.schema.columns.size(); ++c) {
    const Column& col = table.schema.columns[c];
    ColumnCodec codec;
    if (col.categorical()) {
      codec.numeric = false;
      codec.vocab = static_cast<int>(col.categories.size());
      out.spec.columns.push_back(std::move(codec));
      continue;
    }
    std::vector<double> values;
    for (const Row& row : table.rows) {
      if (row[c].kind == Cell::Kind::Number) values.push_back(row[c].number);
    }
    if (values.empty()) {
      throw UserError("fit_bins: numeric column '" + col.name + "' has no values");
    }
    std::sort(values.begin(), values.end());

    codec.numeric = true;
    codec.is_integer = col.is_integer;
    codec.lo = values.front();
    codec.hi = values.back();
    for (int j = 1; j < bins; ++j) {
      double e = linear_quantile(values, static_cast<double>(j) / bins);
      if (col.is_integer) e = std::floor(e) + 0.5;  // keep every bin integer-representable
      if (e >= codec.lo && e < codec.hi) codec.edges.push_back(e);
    }
    codec.edges.erase(std::unique(codec.edges.begin(), codec.edges.end()), codec.edges.end());
    codec.vocab = static_cast<int>(codec.edges.size()) + 1;
    if (codec.vocab == 1) {
      out.warnings.push_back("column '" + col.name + "' is constant; single-bin vocabulary");
    } else if (codec.vocab < bins) {
      out.warnings.push_back("column '" + col.name + "' collapsed to " +
                             std::to_string(codec.vocab) + " bins");
    }
    out.spec.columns.push_back(std::move(codec));
  }
  return out;
}

EncodedRow encode_row(const Row& row, const BinSpec& spec, std::size_t* clamped) {
  if (row.size() != spec.columns.size()) {
    throw UserError("encode_row: row width does not match bin spec");
  }
  EncodedRow enc(row.size(), 0);
  for (std::size_t c = 0; c < row.size(); ++c) {
    const ColumnCodec& codec = spec.columns[c];
    const Cell& cell = row[c];
    if (cell.is_missing()) throw UserError("encode_row: missing cell at column " + std::to_string(c));
    if (codec.numeric) {
      double v = cell.number;
      if (clamped && (v < codec.lo || v > codec.hi)) ++*clamped;
      auto it = std::lower_bound(codec.edges.begin(), codec.edges.end(), v);
      enc[c] = static_cast<int>(it - codec.edges.begin());
    } else {
      if (cell.category < 0 || cell.category >= codec.vocab) {
        throw UserError("encode_row: category token out of range at column " + std::to_string(c));
      }
      enc[c] = cell.category;
    }
  }
  return enc;
}

EncodeResult encode_table(const Table& table, const BinSpec& spec) {
  EncodeResult out;
  for (const Row& row : table.rows) {
    if (!table.row_complete(row)) {
      ++out.dropped_incomplete;
      continue;
    }
    out.rows.push_back(encode_row(row, spec, &out.clamped));
  }
  return out;
}

Row decode_row(const EncodedRow& enc, const BinSpec& spec, Rng& rng) {
  if (enc.size() != spec.columns.size()) {
    throw UserError("decode_row: row width does not match bin spec");
  }
  Row row(enc.size());
  for (std::size_t c = 0; c < enc.size(); ++c) {
    const ColumnCodec& codec = spec.columns[c];
    int t = enc[c];
    if (t < 0 || t >= codec.vocab) {
      throw UserError("decode_row: token out of range at column " + std::to_string(c));
    }
    if (!codec.numeric) {
      row[c] = Cell::cat(t);
      continue;
    }
    double lower = t == 0 ? codec.lo : codec.edges[static_cast<std::size_t>(t) - 1];
    double upper = t == codec.vocab - 1 ? codec.hi : codec.edges[static_cast<std::size_t>(t)];
    double v;
    if (codec.is_integer) {
      // Edges sit on half-integers, so rounding half-up keeps v inside the bin.
      double u = rng.uniform(lower, upper);
      v = std::floor(u + 0.5);
    } else if (upper <= lower) {
      v = lower;  // constant column
    } else {
      v = rng.uniform(lower, upper);
      // Bins are right-open at the lower edge for t > 0.
      if (t > 0 && v <= lower) v = std::nextafter(lower, upper);
    }
    row[c] = Cell::num(v);
  }
  return row;
}

Table decode_rows(const std::vector<EncodedRow>& rows, const Schema& schema,
                  const BinSpec& spec, std::uint64_t seed) {
  Table out;
  out.schema = schema;
  out.rows.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    Rng rng(Rng::derive(seed, i));
    out.rows.push_back(decode_row(rows[i], spec, rng));
  }
  return out;
}

}  // namespace retab
