#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "retab/table.hpp"

using namespace retab;

namespace {

std::string write_temp(const std::string& content) {
  static int counter = 0;
  std::string path = "tabular_test_" + std::to_string(counter++) + ".csv";
  std::ofstream out(path, std::ios::binary);
  out << content;
  return path;
}

Schema two_col_schema() {
  Schema s;
  s.columns.push_back({"a", ColumnKind::Numeric, false, {}});
  s.columns.push_back({"y", ColumnKind::Categorical, false, {"neg", "pos"}});
  s.target = "y";
  return s;
}

}  // namespace

TEST_CASE("load_csv parses a small file") {
  auto path = write_temp("a,y\n1,pos\n2,neg\n");
  Table t = load_csv(path, two_col_schema());
  std::remove(path.c_str());
  CHECK(t.n_rows() == 2);
  CHECK(t.n_cols() == 2);
  CHECK(t.rows[0][0].number == 1.0);
  CHECK(t.rows[0][1].category == 1);
  CHECK(t.rows[1][1].category == 0);
}

TEST_CASE("load_csv header-only file gives zero rows") {
  auto path = write_temp("a,y\n");
  Table t = load_csv(path, two_col_schema());
  std::remove(path.c_str());
  CHECK(t.n_rows() == 0);
  CHECK(t.schema.columns.size() == 2);
}

TEST_CASE("empty field becomes Missing") {
  Schema s;
  for (const char* name : {"x", "y", "z"}) {
    s.columns.push_back({name, ColumnKind::Numeric, false, {}});
  }
  s.target = "z";
  auto path = write_temp("x,y,z\n1,,3\n");
  Table t = load_csv(path, s);
  std::remove(path.c_str());
  REQUIRE(t.n_rows() == 1);
  CHECK(t.rows[0][0].number == 1.0);
  CHECK(t.rows[0][1].is_missing());
  CHECK(t.rows[0][2].number == 3.0);
}

TEST_CASE("ragged row errors with its line number") {
  auto path = write_temp("a,y\n1,pos\n2\n");
  CHECK_THROWS_WITH_AS(load_csv(path, two_col_schema()), doctest::Contains("line 3"), UserError);
  std::remove(path.c_str());
}

TEST_CASE("unknown category under a provided schema errors") {
  auto path = write_temp("a,y\n1,maybe\n");
  CHECK_THROWS_WITH_AS(load_csv(path, two_col_schema()), doctest::Contains("maybe"), UserError);
  std::remove(path.c_str());
}

TEST_CASE("unparseable numeric cell becomes Missing") {
  auto path = write_temp("a,y\nnot_a_number,pos\n");
  Table t = load_csv(path, two_col_schema());
  std::remove(path.c_str());
  CHECK(t.rows[0][0].is_missing());
}

TEST_CASE("quoted fields with commas and escaped quotes") {
  Schema s;
  s.columns.push_back({"name", ColumnKind::Categorical, false, {"a,b", "say \"hi\""}});
  s.columns.push_back({"v", ColumnKind::Numeric, false, {}});
  s.target = "name";
  auto path = write_temp("name,v\n\"a,b\",1\n\"say \"\"hi\"\"\",2\n");
  Table t = load_csv(path, s);
  std::remove(path.c_str());
  REQUIRE(t.n_rows() == 2);
  CHECK(t.rows[0][0].category == 0);
  CHECK(t.rows[1][0].category == 1);
}

TEST_CASE("infer_schema low-cardinality and non-numeric rules") {
  std::vector<std::string> header{"c1", "c2", "c3", "y"};
  std::vector<std::vector<std::string>> grid;
  for (int i = 0; i < 1000; ++i) {
    grid.push_back({i % 2 ? "a" : "b",           // two strings -> categorical
                    std::to_string(i) + ".5",    // 1000 distinct reals -> numeric
                    std::to_string(1 + i % 15),  // 15 unique ints -> categorical
                    i % 2 ? "pos" : "neg"});
  }
  auto result = infer_schema(header, grid, "y");
  CHECK(result.schema.columns[0].categorical());
  CHECK(result.schema.columns[0].categories == std::vector<std::string>{"a", "b"});
  CHECK(result.schema.columns[1].numeric());
  CHECK_FALSE(result.schema.columns[1].is_integer);
  CHECK(result.schema.columns[2].categorical());
  CHECK(result.schema.columns[2].categories.size() == 15);
}

TEST_CASE("infer_schema integer detection and unique-ratio rule") {
  std::vector<std::string> header{"id", "y"};
  std::vector<std::vector<std::string>> grid;
  // 30 unique integers over 1000 rows: ratio 0.03 <= 0.05 -> categorical
  for (int i = 0; i < 1000; ++i) grid.push_back({std::to_string(i % 30), i % 2 ? "1" : "0"});
  auto result = infer_schema(header, grid, "y");
  CHECK(result.schema.columns[0].categorical());

  // 300 unique integers over 1000 rows: ratio 0.3, count 300 -> numeric integer
  grid.clear();
  for (int i = 0; i < 1000; ++i) grid.push_back({std::to_string(i % 300), i % 2 ? "1" : "0"});
  result = infer_schema(header, grid, "y");
  CHECK(result.schema.columns[0].numeric());
  CHECK(result.schema.columns[0].is_integer);
}

TEST_CASE("infer_schema flags single-value columns and rejects empty grids") {
  std::vector<std::string> header{"k", "y"};
  std::vector<std::vector<std::string>> grid{{"c", "pos"}, {"c", "neg"}};
  auto result = infer_schema(header, grid, "y");
  REQUIRE(result.warnings.size() == 1);
  CHECK(result.warnings[0].find("'k'") != std::string::npos);

  CHECK_THROWS_AS(infer_schema(header, {}, "y"), UserError);
  CHECK_THROWS_AS(infer_schema(header, grid, "nope"), UserError);
}

namespace {

Table numbered_table(std::size_t n) {
  Table t;
  t.schema = two_col_schema();
  for (std::size_t i = 0; i < n; ++i) {
    t.rows.push_back({Cell::num(static_cast<double>(i)), Cell::cat(static_cast<int>(i % 2))});
  }
  return t;
}

}  // namespace

TEST_CASE("split_holdout 80/20 and determinism") {
  Table t = numbered_table(100);
  auto [train, test] = split_holdout(t, {0.8, 11, std::nullopt});
  CHECK(train.n_rows() == 80);
  CHECK(test.n_rows() == 20);

  auto [train2, test2] = split_holdout(t, {0.8, 11, std::nullopt});
  CHECK(to_csv_string(train) == to_csv_string(train2));
  CHECK(to_csv_string(test) == to_csv_string(test2));

  // partition: every input value appears exactly once across the two sides
  std::multiset<double> seen;
  for (const auto& row : train.rows) seen.insert(row[0].number);
  for (const auto& row : test.rows) seen.insert(row[0].number);
  CHECK(seen.size() == 100);
  std::multiset<double> expect;
  for (int i = 0; i < 100; ++i) expect.insert(i);
  CHECK(seen == expect);
}

TEST_CASE("split_holdout train_cap truncates after the shuffle") {
  Table t = numbered_table(100);
  auto [train, test] = split_holdout(t, {0.8, 11, 32});
  CHECK(train.n_rows() == 32);
  CHECK(test.n_rows() == 20);
  CHECK_THROWS_AS(split_holdout(t, HoldoutSpec{0.8, 11, 81}), UserError);
}

TEST_CASE("split_holdout minimal 2-row split") {
  Table t = numbered_table(2);
  auto [train, test] = split_holdout(t, {0.5, 0, std::nullopt});
  CHECK(train.n_rows() == 1);
  CHECK(test.n_rows() == 1);
}

TEST_CASE("downsample_minority hits the requested prevalence") {
  Table t;
  t.schema = two_col_schema();
  for (int i = 0; i < 9900; ++i) t.rows.push_back({Cell::num(i), Cell::cat(0)});
  for (int i = 0; i < 1000; ++i) t.rows.push_back({Cell::num(i), Cell::cat(1)});
  Table out = downsample_minority(t, {0.01, 5});
  std::size_t minority = 0;
  for (const auto& row : out.rows) minority += row[1].category == 1;
  CHECK(minority == 100);
  CHECK(out.n_rows() == 10000);

  // idempotence: already at the target
  Table again = downsample_minority(out, {0.01, 6});
  CHECK(to_csv_string(again) == to_csv_string(out));
}

TEST_CASE("downsample_minority floors at one row and preserves majority") {
  Table t;
  t.schema = two_col_schema();
  for (int i = 0; i < 10; ++i) t.rows.push_back({Cell::num(i), Cell::cat(0)});
  for (int i = 0; i < 10; ++i) t.rows.push_back({Cell::num(100 + i), Cell::cat(1)});
  Table out = downsample_minority(t, {0.1, 9});
  std::size_t majority = 0, minority = 0;
  for (const auto& row : out.rows) (row[1].category == 1 ? minority : majority) += 1;
  CHECK(majority == 10);
  CHECK(minority == 1);
  // prevalence 1/11 is within 1/(10+1) of the request
  CHECK(std::fabs(1.0 / 11.0 - 0.1) <= 1.0 / 11.0);

  // majority rows untouched, in their original order
  std::size_t majority_seen = 0;
  for (const auto& row : out.rows) {
    if (row[1].category == 0) {
      CHECK(row[0].number == static_cast<double>(majority_seen));
      ++majority_seen;
    }
  }
}

TEST_CASE("downsample_minority rejects non-binary targets") {
  Table t;
  t.schema.columns.push_back({"y", ColumnKind::Categorical, false, {"a", "b", "c"}});
  t.schema.target = "y";
  t.rows.push_back({Cell::cat(0)});
  t.rows.push_back({Cell::cat(1)});
  CHECK_THROWS_AS(downsample_minority(t, {0.1, 0}), UserError);
}

namespace {

Table shift_table() {
  Table t;
  t.schema.columns.push_back({"country", ColumnKind::Categorical, false, {"DE", "US"}});
  t.schema.columns.push_back({"v", ColumnKind::Numeric, false, {}});
  t.schema.columns.push_back({"y", ColumnKind::Categorical, false, {"neg", "pos"}});
  t.schema.target = "y";
  t.rows.push_back({Cell::cat(1), Cell::num(1), Cell::cat(0)});
  t.rows.push_back({Cell::cat(1), Cell::num(2), Cell::cat(1)});
  t.rows.push_back({Cell::cat(0), Cell::num(3), Cell::cat(0)});
  t.rows.push_back({Cell::cat(0), Cell::num(4), Cell::cat(1)});
  return t;
}

}  // namespace

TEST_CASE("split_shift partitions on the split column and drops it") {
  Table t = shift_table();
  auto [train, test] = split_shift(t, {"country", {"US"}});
  CHECK(train.n_rows() == 2);
  CHECK(test.n_rows() == 2);
  CHECK(train.schema.columns.size() == 2);
  CHECK(train.schema.find("country") < 0);
  CHECK(test.schema.find("country") < 0);
  CHECK(train.rows[0][0].number == 1.0);
  CHECK(test.rows[0][0].number == 3.0);
}

TEST_CASE("split_shift rejects degenerate value sets") {
  Table t = shift_table();
  CHECK_THROWS_WITH_AS(split_shift(t, {"country", {"US", "DE"}}), doctest::Contains("test"),
                       UserError);
  CHECK_THROWS_AS(split_shift(t, ShiftSpec{"country", {"FR"}}), UserError);
  CHECK_THROWS_AS(split_shift(t, ShiftSpec{"v", {"1"}}), UserError);
}

TEST_CASE("schema json round-trip") {
  Schema s = shift_table().schema;
  Schema back = Schema::from_json(s.to_json());
  CHECK(back.to_json() == s.to_json());
  CHECK(back.target == "y");
  CHECK(back.columns[0].categories == std::vector<std::string>{"DE", "US"});
}

TEST_CASE("csv round-trip preserves doubles exactly") {
  Table t;
  t.schema.columns.push_back({"x", ColumnKind::Numeric, false, {}});
  t.schema.columns.push_back({"y", ColumnKind::Categorical, false, {"neg", "pos"}});
  t.schema.target = "y";
  t.rows.push_back({Cell::num(0.1), Cell::cat(0)});
  t.rows.push_back({Cell::num(1.0 / 3.0), Cell::cat(1)});
  t.rows.push_back({Cell::num(1e-17), Cell::cat(0)});

  auto path = write_temp(to_csv_string(t));
  Table back = load_csv(path, t.schema);
  std::remove(path.c_str());
  REQUIRE(back.n_rows() == 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(back.rows[i][0].number == t.rows[i][0].number);

  // writing again is byte-identical
  CHECK(to_csv_string(back) == to_csv_string(t));
}
