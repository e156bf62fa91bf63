#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "retab/augment.hpp"
#include "retab/rng.hpp"

using namespace retab;

namespace {

// two numerics (one integer-typed), one categorical bucket key, binary target
Table mixed_table(std::size_t n, std::uint64_t seed) {
  Table t;
  t.schema.columns.push_back({"x", ColumnKind::Numeric, false, {}});
  t.schema.columns.push_back({"count", ColumnKind::Numeric, true, {}});
  t.schema.columns.push_back({"group", ColumnKind::Categorical, false, {"g0", "g1", "g2"}});
  t.schema.columns.push_back({"y", ColumnKind::Categorical, false, {"neg", "pos"}});
  t.schema.target = "y";
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    int group = static_cast<int>(rng.below(3));
    int label = static_cast<int>(rng.below(2));
    t.rows.push_back({Cell::num(rng.uniform(-5.0, 5.0) + 3.0 * group),
                      Cell::num(std::floor(rng.uniform(0.0, 50.0))), Cell::cat(group),
                      Cell::cat(label)});
  }
  return t;
}

std::vector<int> signature(const Table& t, const Row& row) {
  std::vector<int> sig;
  for (std::size_t c = 0; c < t.schema.columns.size(); ++c) {
    if (t.schema.columns[c].categorical()) sig.push_back(row[c].category);
  }
  return sig;
}

}  // namespace

TEST_CASE("multiplier schedule") {
  CHECK(multiplier(64) == 30);
  CHECK(multiplier(128) == 30);
  CHECK(multiplier(129) == 10);
  CHECK(multiplier(256) == 10);
  CHECK(multiplier(500) == 5);
  CHECK(multiplier(1000) == 5);
  CHECK(multiplier(1001) == 1);
  CHECK(multiplier(5000) == 1);
}

TEST_CASE("interpolation rule and integer rounding") {
  CHECK(interpolate_numeric(0.0, 2.0, 0.5, false) == 1.0);
  CHECK(interpolate_numeric(0.0, 4.0, 0.5, false) == 2.0);
  CHECK(interpolate_numeric(10.0, 20.0, 0.5, false) == 15.0);
  CHECK(interpolate_numeric(0.0, 3.0, 0.5, true) == 2.0);   // 1.5 rounds half-up
  CHECK(interpolate_numeric(0.0, -3.0, 0.5, true) == -1.0); // -1.5 rounds half-up
}

TEST_CASE("augment size identity across the schedule") {
  for (std::size_t n : {40u, 150u, 400u}) {
    Table t = mixed_table(n, n);
    Table out = augment_within_buckets(t, {5, 7, std::nullopt});
    CHECK(out.n_rows() == n + multiplier(n) * n);
  }
  Table t = mixed_table(100, 1);
  Table out = augment_within_buckets(t, {5, 7, std::nullopt});
  CHECK(out.n_rows() == 100 + 30 * 100);
}

TEST_CASE("augment drops missing rows first and errors when none survive") {
  Table t = mixed_table(50, 2);
  t.rows[3][0] = Cell::missing();
  t.rows[17][1] = Cell::missing();
  Table out = augment_within_buckets(t, {5, 3, std::nullopt});
  CHECK(out.n_rows() == 48 + 30 * 48);

  Table all_missing = mixed_table(5, 3);
  for (auto& row : all_missing.rows) row[0] = Cell::missing();
  CHECK_THROWS_AS(augment_within_buckets(all_missing, {5, 3, std::nullopt}), UserError);
}

TEST_CASE("augmented rows keep their bucket signature and bucket numeric range") {
  Table t = mixed_table(80, 4);
  Table out = augment_within_buckets(t, {5, 9, std::nullopt});

  // per-bucket numeric ranges of the original data
  std::map<std::vector<int>, std::pair<double, double>> x_range;
  for (std::size_t i = 0; i < 80; ++i) {
    auto sig = signature(t, t.rows[i]);
    double x = t.rows[i][0].number;
    auto it = x_range.find(sig);
    if (it == x_range.end()) {
      x_range[sig] = {x, x};
    } else {
      it->second.first = std::min(it->second.first, x);
      it->second.second = std::max(it->second.second, x);
    }
  }
  for (std::size_t i = 80; i < out.n_rows(); ++i) {
    auto sig = signature(out, out.rows[i]);
    REQUIRE(x_range.count(sig) == 1);  // synthetic signature exists among the originals
    auto [lo, hi] = x_range[sig];
    CHECK(out.rows[i][0].number >= lo);
    CHECK(out.rows[i][0].number <= hi);
    // integer column stays whole
    CHECK(out.rows[i][1].number == std::floor(out.rows[i][1].number));
  }
}

TEST_CASE("singleton bucket replicates its seed row") {
  Table t;
  t.schema.columns.push_back({"x", ColumnKind::Numeric, false, {}});
  t.schema.columns.push_back({"y", ColumnKind::Categorical, false, {"a", "b"}});
  t.schema.target = "y";
  t.rows.push_back({Cell::num(3.25), Cell::cat(0)});
  Table out = augment_within_buckets(t, {5, 21, std::nullopt});
  REQUIRE(out.n_rows() == 31);
  for (const auto& row : out.rows) {
    CHECK(row[0].number == 3.25);
    CHECK(row[1].category == 0);
  }
}

TEST_CASE("augment multiplier override and determinism") {
  Table t = mixed_table(60, 5);
  Table a = augment_within_buckets(t, {5, 13, 3});
  CHECK(a.n_rows() == 60 + 3 * 60);
  Table b = augment_within_buckets(t, {5, 13, 3});
  CHECK(to_csv_string(a) == to_csv_string(b));
  Table c = augment_within_buckets(t, {5, 14, 3});
  CHECK(to_csv_string(a) != to_csv_string(c));
}

TEST_CASE("smote class frequencies within binomial bounds") {
  Table t;
  t.schema.columns.push_back({"x", ColumnKind::Numeric, false, {}});
  t.schema.columns.push_back({"y", ColumnKind::Categorical, false, {"neg", "pos"}});
  t.schema.target = "y";
  Rng rng(6);
  for (int i = 0; i < 900; ++i) t.rows.push_back({Cell::num(rng.normal()), Cell::cat(1)});
  for (int i = 0; i < 100; ++i) t.rows.push_back({Cell::num(rng.normal() + 4.0), Cell::cat(0)});

  Table synth = smote_generate(t, 1000, {5, 31, std::nullopt});
  REQUIRE(synth.n_rows() == 1000);
  std::size_t pos = 0;
  for (const auto& row : synth.rows) pos += row[1].category == 1;
  double sigma = std::sqrt(1000 * 0.9 * 0.1);
  CHECK(std::fabs(static_cast<double>(pos) - 900.0) <= 3.0 * sigma);
}

TEST_CASE("smote interpolates halfway and respects class values") {
  // two rows in one class: neighbor is forced, so output is the midpoint
  Table t;
  t.schema.columns.push_back({"x", ColumnKind::Numeric, false, {}});
  t.schema.columns.push_back({"y", ColumnKind::Categorical, false, {"only"}});
  t.schema.target = "y";
  t.rows.push_back({Cell::num(10.0), Cell::cat(0)});
  t.rows.push_back({Cell::num(20.0), Cell::cat(0)});
  Table synth = smote_generate(t, 50, {5, 1, std::nullopt});
  for (const auto& row : synth.rows) CHECK(row[0].number == 15.0);
}

TEST_CASE("smote single-row class copies the row") {
  Table t;
  t.schema.columns.push_back({"x", ColumnKind::Numeric, false, {}});
  t.schema.columns.push_back({"y", ColumnKind::Categorical, false, {"a", "b"}});
  t.schema.target = "y";
  t.rows.push_back({Cell::num(7.5), Cell::cat(0)});
  t.rows.push_back({Cell::num(1.0), Cell::cat(1)});
  t.rows.push_back({Cell::num(2.0), Cell::cat(1)});
  Table synth = smote_generate(t, 200, {5, 17, std::nullopt});
  for (const auto& row : synth.rows) {
    if (row[1].category == 0) CHECK(row[0].number == 7.5);
  }
}

TEST_CASE("smote n_samples zero yields an empty table with the schema") {
  Table t = mixed_table(20, 8);
  Table synth = smote_generate(t, 0, {5, 0, std::nullopt});
  CHECK(synth.n_rows() == 0);
  CHECK(synth.schema.columns.size() == t.schema.columns.size());
}
