#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "retab/error.hpp"

namespace retab {

enum class ColumnKind { Numeric, Categorical };

struct Column {
  std::string name;
  ColumnKind kind = ColumnKind::Numeric;
  bool is_integer = false;                  // Numeric columns only
  std::vector<std::string> categories;      // Categorical columns only

  bool numeric() const { return kind == ColumnKind::Numeric; }
  bool categorical() const { return kind == ColumnKind::Categorical; }
};

struct Schema {
  std::vector<Column> columns;
  std::string target;

  std::size_t size() const { return columns.size(); }
  int find(const std::string& name) const;
  int target_index() const;
  const Column& at(std::size_t i) const { return columns[i]; }

  // Throws UserError on duplicate names, missing target, empty category
  // lists, or duplicate categories.
  void validate() const;

  nlohmann::json to_json() const;
  static Schema from_json(const nlohmann::json& j);
};

struct Cell {
  enum class Kind : std::uint8_t { Missing, Number, Category };

  Kind kind = Kind::Missing;
  double number = 0.0;
  int category = -1;

  static Cell missing() { return Cell{}; }
  static Cell num(double v) { return Cell{Kind::Number, v, -1}; }
  static Cell cat(int idx) { return Cell{Kind::Category, 0.0, idx}; }

  bool is_missing() const { return kind == Kind::Missing; }
};

using Row = std::vector<Cell>;

struct Table {
  Schema schema;
  std::vector<Row> rows;

  std::size_t n_rows() const { return rows.size(); }
  std::size_t n_cols() const { return schema.columns.size(); }
  bool row_complete(const Row& row) const;

  // Checks cell kinds against column kinds, category ranges, and integer
  // wholeness. Throws UserError naming the first offending row.
  void validate() const;
};

// ---- Split specifications -------------------------------------------------

struct HoldoutSpec {
  double ratio = 0.8;
  std::uint64_t seed = 0;
  std::optional<std::size_t> train_cap;
};

struct ImbalanceSpec {
  double prevalence = 0.01;
  std::uint64_t seed = 0;
};

struct ShiftSpec {
  std::string split_column;
  std::vector<std::string> train_values;
};

// ---- Operations -----------------------------------------------------------

struct SchemaInference {
  Schema schema;
  std::vector<std::string> warnings;
};

// Grid rows are raw CSV fields (header excluded). A column becomes
// Categorical when any value fails numeric parsing, or when it is
// low-cardinality (unique count <= 20 or unique ratio <= 0.05); otherwise
// Numeric, integer-typed when every value is whole. Categories sorted
// lexicographically.
SchemaInference infer_schema(const std::vector<std::string>& header,
                             const std::vector<std::vector<std::string>>& grid,
                             const std::string& target);

// RFC 4180 CSV with a mandatory header; empty fields are Missing. Without a
// schema, infer_schema decides column kinds (inference warnings appended to
// *warnings when given).
Table load_csv(const std::string& path, const std::optional<Schema>& schema = {},
               std::vector<std::string>* warnings = nullptr);

Table table_from_grid(const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& grid,
                      const std::vector<std::size_t>& record_lines,
                      const std::optional<Schema>& schema,
                      const std::string& target_if_inferring,
                      std::vector<std::string>* warnings = nullptr);

void write_csv(const Table& table, const std::string& path);
std::string to_csv_string(const Table& table);

// Shortest round-trip decimal form; integer columns print without a point.
std::string format_cell(const Cell& cell, const Column& col);

std::pair<Table, Table> split_holdout(const Table& table, const HoldoutSpec& spec);

// Removes minority-class rows (seeded) until
// minority = round(prevalence/(1-prevalence) * majority), floored at 1.
Table downsample_minority(const Table& table, const ImbalanceSpec& spec);

// Partitions on split-column membership in train_values and drops the split
// column from both sides.
std::pair<Table, Table> split_shift(const Table& table, const ShiftSpec& spec);

// Rows with no Missing cells, in order.
Table drop_incomplete_rows(const Table& table);

}  // namespace retab
