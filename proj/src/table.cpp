#include "retab/table.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "retab/rng.hpp"

namespace retab {

// ---- Schema ----------------------------------------------------------------

int Schema::find(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

int Schema::target_index() const { return find(target); }

void Schema::validate() const {
  std::unordered_set<std::string> names;
  for (const auto& col : columns) {
    if (!names.insert(col.name).second) {
      throw UserError("schema: duplicate column name '" + col.name + "'");
    }
    if (col.categorical()) {
      if (col.categories.empty()) {
        throw UserError("schema: column '" + col.name + "' has no categories");
      }
      std::unordered_set<std::string> cats;
      for (const auto& c : col.categories) {
        if (!cats.insert(c).second) {
          throw UserError("schema: column '" + col.name + "' repeats category '" + c + "'");
        }
      }
    }
  }
  if (find(target) < 0) {
    throw UserError("schema: target column '" + target + "' does not exist");
  }
}

nlohmann::json Schema::to_json() const {
  nlohmann::json cols = nlohmann::json::array();
  for (const auto& col : columns) {
    nlohmann::json jc;
    jc["name"] = col.name;
    if (col.numeric()) {
      jc["kind"] = "numeric";
      jc["integer"] = col.is_integer;
    } else {
      jc["kind"] = "categorical";
      jc["categories"] = col.categories;
    }
    cols.push_back(std::move(jc));
  }
  return nlohmann::json{{"columns", std::move(cols)}, {"target", target}};
}

Schema Schema::from_json(const nlohmann::json& j) {
  Schema s;
  if (!j.contains("columns") || !j.contains("target")) {
    throw UserError("schema json: expected {columns, target}");
  }
  for (const auto& jc : j.at("columns")) {
    Column col;
    col.name = jc.at("name").get<std::string>();
    std::string kind = jc.at("kind").get<std::string>();
    if (kind == "numeric") {
      col.kind = ColumnKind::Numeric;
      col.is_integer = jc.value("integer", false);
    } else if (kind == "categorical") {
      col.kind = ColumnKind::Categorical;
      col.categories = jc.at("categories").get<std::vector<std::string>>();
    } else {
      throw UserError("schema json: unknown column kind '" + kind + "'");
    }
    s.columns.push_back(std::move(col));
  }
  s.target = j.at("target").get<std::string>();
  s.validate();
  return s;
}

// ---- Table ------------------------------------------------------------------

bool Table::row_complete(const Row& row) const {
  for (const auto& cell : row) {
    if (cell.is_missing()) return false;
  }
  return true;
}

void Table::validate() const {
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const Row& row = rows[r];
    if (row.size() != schema.columns.size()) {
      throw UserError("table: row " + std::to_string(r) + " has " +
                      std::to_string(row.size()) + " cells, expected " +
                      std::to_string(schema.columns.size()));
    }
    for (std::size_t c = 0; c < row.size(); ++c) {
      const Cell& cell = row[c];
      const Column& col = schema.columns[c];
      if (cell.is_missing()) continue;
      if (col.numeric()) {
        if (cell.kind != Cell::Kind::Number) {
          throw UserError("table: row " + std::to_string(r) + " column '" + col.name +
                          "' holds a non-numeric cell");
        }
        if (col.is_integer && cell.number != std::floor(cell.number)) {
          throw UserError("table: row " + std::to_string(r) + " column '" + col.name +
                          "' holds a fractional value in an integer column");
        }
      } else {
        if (cell.kind != Cell::Kind::Category) {
          throw UserError("table: row " + std::to_string(r) + " column '" + col.name +
                          "' holds a non-categorical cell");
        }
        if (cell.category < 0 || cell.category >= static_cast<int>(col.categories.size())) {
          throw UserError("table: row " + std::to_string(r) + " column '" + col.name +
                          "' category index out of range");
        }
      }
    }
  }
}

// ---- CSV parsing -----------------------------------------------------------

namespace {

struct CsvGrid {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> records;
  std::vector<std::size_t> record_lines;  // physical line each record starts on
};

CsvGrid parse_csv(std::istream& in, const std::string& origin) {
  CsvGrid grid;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool saw_any = false;
  bool header_done = false;
  std::size_t line = 1;
  std::size_t record_line = 1;

  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
  };
  auto end_record = [&] {
    end_field();
    if (!header_done) {
      grid.header = std::move(record);
      header_done = true;
    } else {
      grid.records.push_back(std::move(record));
      grid.record_lines.push_back(record_line);
    }
    record.clear();
    record_line = line;
  };

  char ch;
  while (in.get(ch)) {
    saw_any = true;
    if (in_quotes) {
      if (ch == '"') {
        if (in.peek() == '"') {
          in.get(ch);
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        if (ch == '\n') ++line;
        field.push_back(ch);
      }
    } else if (ch == '"') {
      in_quotes = true;
    } else if (ch == ',') {
      end_field();
    } else if (ch == '\r') {
      if (in.peek() == '\n') in.get(ch);
      ++line;
      end_record();
    } else if (ch == '\n') {
      ++line;
      end_record();
    } else {
      field.push_back(ch);
    }
  }
  if (in_quotes) {
    throw UserError(origin + ": unterminated quoted field");
  }
  if (!field.empty() || !record.empty()) {
    end_record();
  }
  if (!saw_any || !header_done) {
    throw UserError(origin + ": missing header row");
  }
  return grid;
}

bool parse_number(const std::string& raw, double* out) {
  std::size_t b = 0, e = raw.size();
  while (b < e && (raw[b] == ' ' || raw[b] == '\t')) ++b;
  while (e > b && (raw[e - 1] == ' ' || raw[e - 1] == '\t')) --e;
  if (b == e) return false;
  double value = 0.0;
  auto res = std::from_chars(raw.data() + b, raw.data() + e, value);
  if (res.ec != std::errc{} || res.ptr != raw.data() + e) return false;
  if (!std::isfinite(value)) return false;
  *out = value;
  return true;
}

}  // namespace

SchemaInference infer_schema(const std::vector<std::string>& header,
                             const std::vector<std::vector<std::string>>& grid,
                             const std::string& target) {
  if (grid.empty()) throw UserError("infer_schema: no data rows");
  bool target_found = false;
  for (const auto& name : header) target_found |= (name == target);
  if (!target_found) throw UserError("infer_schema: target column '" + target + "' not in header");

  SchemaInference out;
  out.schema.target = target;
  for (std::size_t c = 0; c < header.size(); ++c) {
    std::set<std::string> unique;
    std::size_t observed = 0;
    bool all_numeric = true;
    bool all_whole = true;
    for (const auto& row : grid) {
      const std::string& raw = row[c];
      if (raw.empty()) continue;
      ++observed;
      unique.insert(raw);
      double v = 0.0;
      if (parse_number(raw, &v)) {
        all_whole &= (v == std::floor(v));
      } else {
        all_numeric = false;
      }
    }
    if (observed == 0) {
      throw UserError("infer_schema: column '" + header[c] + "' has no observed values");
    }
    double unique_ratio = static_cast<double>(unique.size()) / static_cast<double>(observed);
    bool low_cardinality = unique.size() <= 20 || unique_ratio <= 0.05;

    Column col;
    col.name = header[c];
    if (!all_numeric || low_cardinality) {
      col.kind = ColumnKind::Categorical;
      col.categories.assign(unique.begin(), unique.end());  // set: lexicographic
    } else {
      col.kind = ColumnKind::Numeric;
      col.is_integer = all_whole;
    }
    if (unique.size() == 1) {
      out.warnings.push_back("column '" + header[c] + "' has a single unique value");
    }
    out.schema.columns.push_back(std::move(col));
  }
  return out;
}

Table table_from_grid(const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& grid,
                      const std::vector<std::size_t>& record_lines,
                      const std::optional<Schema>& schema,
                      const std::string& target_if_inferring,
                      std::vector<std::string>* warnings) {
  for (std::size_t r = 0; r < grid.size(); ++r) {
    if (grid[r].size() != header.size()) {
      std::size_t line = r < record_lines.size() ? record_lines[r] : r + 2;
      throw UserError("csv line " + std::to_string(line) + ": has " +
                      std::to_string(grid[r].size()) + " fields, header has " +
                      std::to_string(header.size()));
    }
  }

  Table table;
  const bool provided = schema.has_value();
  if (provided) {
    table.schema = *schema;
    table.schema.validate();
    if (header.size() != table.schema.columns.size()) {
      throw UserError("csv: header has " + std::to_string(header.size()) +
                      " columns, schema expects " + std::to_string(table.schema.columns.size()));
    }
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (header[c] != table.schema.columns[c].name) {
        throw UserError("csv: header column " + std::to_string(c) + " is '" + header[c] +
                        "', schema expects '" + table.schema.columns[c].name + "'");
      }
    }
  } else {
    auto inferred = infer_schema(header, grid, target_if_inferring);
    table.schema = std::move(inferred.schema);
    if (warnings) {
      warnings->insert(warnings->end(), inferred.warnings.begin(), inferred.warnings.end());
    }
  }

  // Category lookup per categorical column
  std::vector<std::unordered_map<std::string, int>> lookup(table.schema.columns.size());
  for (std::size_t c = 0; c < table.schema.columns.size(); ++c) {
    const Column& col = table.schema.columns[c];
    if (!col.categorical()) continue;
    for (std::size_t k = 0; k < col.categories.size(); ++k) {
      lookup[c][col.categories[k]] = static_cast<int>(k);
    }
  }

  table.rows.reserve(grid.size());
  for (std::size_t r = 0; r < grid.size(); ++r) {
    Row row(table.schema.columns.size());
    for (std::size_t c = 0; c < header.size(); ++c) {
      const std::string& raw = grid[r][c];
      const Column& col = table.schema.columns[c];
      if (raw.empty()) {
        row[c] = Cell::missing();
        continue;
      }
      if (col.numeric()) {
        double v = 0.0;
        if (!parse_number(raw, &v)) {
          row[c] = Cell::missing();  // unparseable numeric -> Missing
          continue;
        }
        if (col.is_integer && v != std::floor(v)) {
          std::size_t line = r < record_lines.size() ? record_lines[r] : r + 2;
          throw UserError("csv line " + std::to_string(line) + ": column '" + col.name +
                          "' is integer-typed but holds '" + raw + "'");
        }
        row[c] = Cell::num(v);
      } else {
        auto it = lookup[c].find(raw);
        if (it == lookup[c].end()) {
          std::size_t line = r < record_lines.size() ? record_lines[r] : r + 2;
          throw UserError("csv line " + std::to_string(line) + ": unknown category '" + raw +
                          "' for column '" + col.name + "'");
        }
        row[c] = Cell::cat(it->second);
      }
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

Table load_csv(const std::string& path, const std::optional<Schema>& schema,
               std::vector<std::string>* warnings) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UserError("cannot open csv file: " + path);
  CsvGrid grid = parse_csv(in, path);
  std::string target = schema ? schema->target : (grid.header.empty() ? "" : grid.header.back());
  if (!schema && grid.records.empty()) {
    // Header-only file: no rows to infer from, so every column defaults to a
    // non-integer numeric column and the last header column is the target.
    Table t;
    t.schema.target = target;
    for (const auto& name : grid.header) {
      Column col;
      col.name = name;
      col.kind = ColumnKind::Numeric;
      t.schema.columns.push_back(std::move(col));
    }
    return t;
  }
  return table_from_grid(grid.header, grid.records, grid.record_lines, schema, target, warnings);
}

// ---- CSV writing -----------------------------------------------------------

namespace {

std::string csv_escape(const std::string& s) {
  bool needs_quotes = s.find_first_of(",\"\n\r") != std::string::npos;
  if (!needs_quotes) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += "\"";
  return out;
}

}  // namespace

std::string format_cell(const Cell& cell, const Column& col) {
  if (cell.is_missing()) return "";
  if (col.numeric()) {
    if (col.is_integer) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%lld", static_cast<long long>(cell.number));
      return buf;
    }
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), cell.number);
    return std::string(buf, res.ptr);
  }
  return col.categories[static_cast<std::size_t>(cell.category)];
}

std::string to_csv_string(const Table& table) {
  std::string out;
  for (std::size_t c = 0; c < table.schema.columns.size(); ++c) {
    if (c) out.push_back(',');
    out += csv_escape(table.schema.columns[c].name);
  }
  out.push_back('\n');
  for (const Row& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out.push_back(',');
      out += csv_escape(format_cell(row[c], table.schema.columns[c]));
    }
    out.push_back('\n');
  }
  return out;
}

void write_csv(const Table& table, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UserError("cannot write csv file: " + path);
  out << to_csv_string(table);
}

// ---- Splits ----------------------------------------------------------------

std::pair<Table, Table> split_holdout(const Table& table, const HoldoutSpec& spec) {
  if (spec.ratio <= 0.0 || spec.ratio >= 1.0) {
    throw UserError("split_holdout: ratio must be in (0, 1)");
  }
  if (table.n_rows() < 2) throw UserError("split_holdout: need at least 2 rows");

  std::vector<std::size_t> order(table.n_rows());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(spec.seed);
  rng.shuffle(order);

  std::size_t n_train = static_cast<std::size_t>(
      std::floor(spec.ratio * static_cast<double>(table.n_rows()) + 0.5));
  if (spec.train_cap) {
    if (*spec.train_cap > n_train) {
      throw UserError("split_holdout: train_cap " + std::to_string(*spec.train_cap) +
                      " exceeds available train rows " + std::to_string(n_train));
    }
  }

  Table train, test;
  train.schema = table.schema;
  test.schema = table.schema;
  std::size_t cap = spec.train_cap.value_or(n_train);
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (i < n_train) {
      if (train.rows.size() < cap) train.rows.push_back(table.rows[order[i]]);
    } else {
      test.rows.push_back(table.rows[order[i]]);
    }
  }
  return {std::move(train), std::move(test)};
}

Table downsample_minority(const Table& table, const ImbalanceSpec& spec) {
  if (spec.prevalence <= 0.0 || spec.prevalence >= 1.0) {
    throw UserError("downsample_minority: prevalence must be in (0, 1)");
  }
  int t = table.schema.target_index();
  if (t < 0) throw UserError("downsample_minority: no target column");
  const Column& target = table.schema.columns[static_cast<std::size_t>(t)];
  if (!target.categorical() || target.categories.size() != 2) {
    throw UserError("downsample_minority: target must be binary categorical");
  }

  std::size_t counts[2] = {0, 0};
  for (const Row& row : table.rows) {
    const Cell& cell = row[static_cast<std::size_t>(t)];
    if (cell.kind == Cell::Kind::Category) counts[cell.category] += 1;
  }
  if (counts[0] == 0 || counts[1] == 0) {
    throw UserError("downsample_minority: both classes must be present");
  }
  // Tie on counts: call index 1 the minority.
  int minority = counts[0] < counts[1] ? 0 : 1;
  std::size_t n_major = counts[1 - minority];
  std::size_t n_minor = counts[minority];

  std::size_t desired = static_cast<std::size_t>(std::floor(
      spec.prevalence / (1.0 - spec.prevalence) * static_cast<double>(n_major) + 0.5));
  if (desired < 1) desired = 1;
  if (desired >= n_minor) return table;  // cannot upsample; already at/below target

  std::vector<std::size_t> minority_rows;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const Cell& cell = table.rows[i][static_cast<std::size_t>(t)];
    if (cell.kind == Cell::Kind::Category && cell.category == minority) {
      minority_rows.push_back(i);
    }
  }
  Rng rng(spec.seed);
  rng.shuffle(minority_rows);
  std::vector<bool> keep(table.rows.size(), true);
  for (std::size_t i = desired; i < minority_rows.size(); ++i) keep[minority_rows[i]] = false;

  Table out;
  out.schema = table.schema;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    if (keep[i]) out.rows.push_back(table.rows[i]);
  }
  return out;
}

std::pair<Table, Table> split_shift(const Table& table, const ShiftSpec& spec) {
  int sc = table.schema.find(spec.split_column);
  if (sc < 0) throw UserError("split_shift: no column named '" + spec.split_column + "'");
  const Column& col = table.schema.columns[static_cast<std::size_t>(sc)];
  if (!col.categorical()) throw UserError("split_shift: split column must be categorical");
  if (spec.train_values.empty()) throw UserError("split_shift: train_values is empty");

  std::vector<bool> in_train(col.categories.size(), false);
  for (const auto& v : spec.train_values) {
    auto it = std::find(col.categories.begin(), col.categories.end(), v);
    if (it == col.categories.end()) {
      throw UserError("split_shift: '" + v + "' is not a category of '" + spec.split_column + "'");
    }
    in_train[static_cast<std::size_t>(it - col.categories.begin())] = true;
  }

  Schema reduced;
  reduced.target = table.schema.target;
  if (table.schema.target == spec.split_column) {
    throw UserError("split_shift: cannot split on the target column");
  }
  for (std::size_t c = 0; c < table.schema.columns.size(); ++c) {
    if (static_cast<int>(c) != sc) reduced.columns.push_back(table.schema.columns[c]);
  }

  Table train, test;
  train.schema = reduced;
  test.schema = reduced;
  for (const Row& row : table.rows) {
    const Cell& cell = row[static_cast<std::size_t>(sc)];
    bool to_train = cell.kind == Cell::Kind::Category && in_train[cell.category];
    Row rest;
    rest.reserve(row.size() - 1);
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (static_cast<int>(c) != sc) rest.push_back(row[c]);
    }
    (to_train ? train : test).rows.push_back(std::move(rest));
  }
  if (train.rows.empty()) throw UserError("split_shift: train side is empty");
  if (test.rows.empty()) throw UserError("split_shift: test side is empty");
  return {std::move(train), std::move(test)};
}

Table drop_incomplete_rows(const Table& table) {
  Table out;
  out.schema = table.schema;
  for (const Row& row : table.rows) {
    if (table.row_complete(row)) out.rows.push_back(row);
  }
  return out;
}

}  // namespace retab
