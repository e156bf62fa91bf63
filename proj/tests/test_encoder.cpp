#include <doctest.h>

#include <cmath>
#include <set>

#include "retab/encoder.hpp"
#include "retab/rng.hpp"

using namespace retab;

namespace {

Table numeric_column(const std::vector<double>& values, bool is_integer = false) {
  Table t;
  t.schema.columns.push_back({"x", ColumnKind::Numeric, is_integer, {}});
  t.schema.columns.push_back({"y", ColumnKind::Categorical, false, {"a", "b"}});
  t.schema.target = "y";
  for (double v : values) {
    t.rows.push_back({Cell::num(v), Cell::cat(static_cast<int>(t.rows.size() % 2))});
  }
  return t;
}

}  // namespace

TEST_CASE("fit_bins quantile edges by linear interpolation") {
  std::vector<double> values;
  for (int i = 0; i < 100; ++i) values.push_back(i);
  auto fit = fit_bins(numeric_column(values), 4);
  const auto& codec = fit.spec.columns[0];
  REQUIRE(codec.edges.size() == 3);
  CHECK(codec.edges[0] == doctest::Approx(24.75));
  CHECK(codec.edges[1] == doctest::Approx(49.5));
  CHECK(codec.edges[2] == doctest::Approx(74.25));
  CHECK(codec.vocab == 4);
  CHECK(codec.lo == 0.0);
  CHECK(codec.hi == 99.0);
}

TEST_CASE("fit_bins constant column collapses to one bin with a warning") {
  auto fit = fit_bins(numeric_column({5, 5, 5}), 4);
  CHECK(fit.spec.columns[0].vocab == 1);
  REQUIRE(fit.warnings.size() == 1);
  CHECK(fit.warnings[0].find("constant") != std::string::npos);
}

TEST_CASE("fit_bins B=2 on a two-point sample puts the edge at the median") {
  auto fit = fit_bins(numeric_column({0, 1}), 2);
  REQUIRE(fit.spec.columns[0].edges.size() == 1);
  CHECK(fit.spec.columns[0].edges[0] == doctest::Approx(0.5));
}

TEST_CASE("encode bin lookup and tie convention") {
  std::vector<double> values;
  for (int i = 0; i < 100; ++i) values.push_back(i);
  auto fit = fit_bins(numeric_column(values), 4);

  Row row{Cell::num(10.0), Cell::cat(1)};
  EncodedRow enc = encode_row(row, fit.spec);
  CHECK(enc[0] == 0);
  CHECK(enc[1] == 1);  // category index lookup

  row[0] = Cell::num(24.75);  // exactly on an edge -> lower bin
  CHECK(encode_row(row, fit.spec)[0] == 0);
  row[0] = Cell::num(24.7500001);
  CHECK(encode_row(row, fit.spec)[0] == 1);
  row[0] = Cell::num(99.0);
  CHECK(encode_row(row, fit.spec)[0] == 3);
}

TEST_CASE("out-of-range values clamp to boundary bins and are counted") {
  std::vector<double> values;
  for (int i = 0; i < 100; ++i) values.push_back(i);
  auto fit = fit_bins(numeric_column(values), 4);
  std::size_t clamped = 0;
  CHECK(encode_row({Cell::num(-50.0), Cell::cat(0)}, fit.spec, &clamped)[0] == 0);
  CHECK(encode_row({Cell::num(1000.0), Cell::cat(0)}, fit.spec, &clamped)[0] == 3);
  CHECK(clamped == 2);
}

TEST_CASE("monotonicity of numeric encoding") {
  Rng rng(17);
  std::vector<double> values;
  for (int i = 0; i < 500; ++i) values.push_back(rng.normal() * 10.0);
  auto fit = fit_bins(numeric_column(values), 16);
  for (int i = 0; i < 500; ++i) {
    double v1 = rng.uniform(-40.0, 40.0);
    double v2 = rng.uniform(-40.0, 40.0);
    if (v1 > v2) std::swap(v1, v2);
    int t1 = encode_row({Cell::num(v1), Cell::cat(0)}, fit.spec)[0];
    int t2 = encode_row({Cell::num(v2), Cell::cat(0)}, fit.spec)[0];
    CHECK(t1 <= t2);
  }
}

TEST_CASE("bin occupancy within one of n/B on distinct values") {
  std::vector<double> values;
  for (int i = 0; i < 128; ++i) values.push_back(i * 1.37);
  auto fit = fit_bins(numeric_column(values), 8);
  std::vector<int> counts(8, 0);
  for (double v : values) counts[encode_row({Cell::num(v), Cell::cat(0)}, fit.spec)[0]] += 1;
  for (int c : counts) {
    CHECK(c >= 15);
    CHECK(c <= 17);
  }
}

TEST_CASE("decode stays in the bin and round-trips exactly") {
  Rng data_rng(23);
  std::vector<double> values;
  for (int i = 0; i < 300; ++i) values.push_back(data_rng.normal() * 7.0);
  Table t = numeric_column(values);
  // add an integer column with a narrow range to stress integer bins
  t.schema.columns.insert(t.schema.columns.begin() + 1,
                          {"n", ColumnKind::Numeric, true, {}});
  for (auto& row : t.rows) {
    row.insert(row.begin() + 1, Cell::num(std::floor(data_rng.uniform(0.0, 7.0))));
  }
  auto fit = fit_bins(t, 8);

  Rng rng(29);
  for (int trial = 0; trial < 2000; ++trial) {
    EncodedRow enc{static_cast<int>(rng.below(fit.spec.columns[0].vocab)),
                   static_cast<int>(rng.below(fit.spec.columns[1].vocab)),
                   static_cast<int>(rng.below(2))};
    Row row = decode_row(enc, fit.spec, rng);
    CHECK(row[1].number == std::floor(row[1].number));  // integer column stays whole
    EncodedRow back = encode_row(row, fit.spec);
    REQUIRE(back == enc);
  }
}

TEST_CASE("integer bins with tight ranges still round-trip") {
  // two integer values force snapped half-integer edges
  Table t = numeric_column({2, 3}, true);
  auto fit = fit_bins(t, 4);
  const auto& codec = fit.spec.columns[0];
  CHECK(codec.vocab == 2);  // snapped duplicates collapse
  Rng rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    for (int tok = 0; tok < codec.vocab; ++tok) {
      EncodedRow enc{tok, 0};
      Row row = decode_row(enc, fit.spec, rng);
      CHECK(encode_row(row, fit.spec) == enc);
    }
  }
}

TEST_CASE("categorical tokens round-trip as identities") {
  Table t = numeric_column({1, 2, 3});
  auto fit = fit_bins(t, 4);
  Rng rng(37);
  for (int tok = 0; tok < 2; ++tok) {
    EncodedRow enc{0, tok};
    Row row = decode_row(enc, fit.spec, rng);
    CHECK(row[1].category == tok);
  }
}

TEST_CASE("decoded numeric mean approaches the bin midpoint") {
  std::vector<double> values;
  for (int i = 0; i < 100; ++i) values.push_back(i);
  auto fit = fit_bins(numeric_column(values), 4);
  const auto& codec = fit.spec.columns[0];
  double lo = codec.edges[0], hi = codec.edges[1];  // token 1 interval

  Rng rng(41);
  double sum = 0.0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    Row row = decode_row({1, 0}, fit.spec, rng);
    CHECK(row[0].number > lo);
    CHECK(row[0].number <= hi);
    sum += row[0].number;
  }
  double width = hi - lo;
  double sigma = width / std::sqrt(12.0) / std::sqrt(static_cast<double>(n));
  CHECK(std::fabs(sum / n - (lo + hi) / 2.0) <= 3.0 * sigma);
}

TEST_CASE("binspec json round-trip is exact") {
  Rng rng(43);
  std::vector<double> values;
  for (int i = 0; i < 77; ++i) values.push_back(rng.normal() * 3.7);
  auto fit = fit_bins(numeric_column(values), 16);
  BinSpec back = BinSpec::from_json(fit.spec.to_json());
  REQUIRE(back.columns.size() == fit.spec.columns.size());
  for (std::size_t c = 0; c < back.columns.size(); ++c) {
    CHECK(back.columns[c].edges == fit.spec.columns[c].edges);  // bit-exact doubles
    CHECK(back.columns[c].lo == fit.spec.columns[c].lo);
    CHECK(back.columns[c].hi == fit.spec.columns[c].hi);
    CHECK(back.columns[c].vocab == fit.spec.columns[c].vocab);
  }
}

TEST_CASE("encode_table drops incomplete rows and reports counts") {
  Table t = numeric_column({1, 2, 3, 4});
  t.rows[2][0] = Cell::missing();
  auto fit = fit_bins(t, 2);
  EncodeResult enc = encode_table(t, fit.spec);
  CHECK(enc.rows.size() == 3);
  CHECK(enc.dropped_incomplete == 1);
}
