#include "retab/constraints.hpp"

#include <fstream>
#include <unordered_set>

namespace retab {

namespace {

RuleAtom parse_atom(const nlohmann::json& j, const Schema& schema, const std::string& rule_id) {
  RuleAtom atom;
  std::string col = j.at("col").get<std::string>();
  std::string value = j.at("value").get<std::string>();
  atom.col = schema.find(col);
  if (atom.col < 0) {
    throw UserError("rule '" + rule_id + "': unknown column '" + col + "'");
  }
  const Column& column = schema.columns[static_cast<std::size_t>(atom.col)];
  if (!column.categorical()) {
    throw UserError("rule '" + rule_id + "': column '" + col + "' is not categorical");
  }
  for (std::size_t k = 0; k < column.categories.size(); ++k) {
    if (column.categories[k] == value) {
      atom.category = static_cast<int>(k);
      return atom;
    }
  }
  throw UserError("rule '" + rule_id + "': '" + value + "' is not a category of '" + col + "'");
}

}  // namespace

std::vector<Rule> parse_rules(const nlohmann::json& doc, const Schema& schema) {
  if (!doc.is_array()) throw UserError("rules: expected a JSON array");
  std::vector<Rule> rules;
  std::unordered_set<std::string> ids;
  for (const auto& jr : doc) {
    Rule rule;
    rule.id = jr.at("id").get<std::string>();
    if (!ids.insert(rule.id).second) {
      throw UserError("rule '" + rule.id + "': duplicate id");
    }
    rule.premise = parse_atom(jr.at("if"), schema, rule.id);
    rule.consequent = parse_atom(jr.at("then"), schema, rule.id);
    std::string op = jr.at("then").value("op", "eq");
    if (op == "eq") {
      rule.consequent_is_eq = true;
    } else if (op == "neq") {
      rule.consequent_is_eq = false;
    } else {
      throw UserError("rule '" + rule.id + "': op must be 'eq' or 'neq'");
    }
    if (rule.premise.col == rule.consequent.col) {
      throw UserError("rule '" + rule.id + "': premise and consequent share a column");
    }
    rules.push_back(std::move(rule));
  }
  return rules;
}

std::vector<Rule> load_rules(const std::string& path, const Schema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UserError("cannot open rules file: " + path);
  nlohmann::json doc;
  in >> doc;
  return parse_rules(doc, schema);
}

nlohmann::json rules_to_json(const std::vector<Rule>& rules, const Schema& schema) {
  nlohmann::json out = nlohmann::json::array();
  auto category_name = [&](const RuleAtom& atom) {
    return schema.columns[static_cast<std::size_t>(atom.col)]
        .categories[static_cast<std::size_t>(atom.category)];
  };
  for (const Rule& rule : rules) {
    nlohmann::json jr;
    jr["id"] = rule.id;
    jr["if"] = {{"col", schema.columns[static_cast<std::size_t>(rule.premise.col)].name},
                {"value", category_name(rule.premise)}};
    jr["then"] = {{"col", schema.columns[static_cast<std::size_t>(rule.consequent.col)].name},
                  {"value", category_name(rule.consequent)},
                  {"op", rule.consequent_is_eq ? "eq" : "neq"}};
    out.push_back(std::move(jr));
  }
  return out;
}

namespace {

bool consequent_holds_token(int token, const Rule& rule) {
  return rule.consequent_is_eq ? token == rule.consequent.category
                               : token != rule.consequent.category;
}

}  // namespace

bool rule_violated(const Row& row, const Rule& rule) {
  const Cell& p = row[static_cast<std::size_t>(rule.premise.col)];
  if (p.kind != Cell::Kind::Category || p.category != rule.premise.category) return false;
  const Cell& c = row[static_cast<std::size_t>(rule.consequent.col)];
  if (c.kind != Cell::Kind::Category) return false;
  return !consequent_holds_token(c.category, rule);
}

std::vector<double> violation_rate(const Table& table, const std::vector<Rule>& rules) {
  std::vector<double> rates;
  rates.reserve(rules.size());
  for (const Rule& rule : rules) {
    std::size_t violations = 0;
    for (const Row& row : table.rows) violations += rule_violated(row, rule);
    rates.push_back(table.rows.empty()
                        ? 0.0
                        : static_cast<double>(violations) / static_cast<double>(table.n_rows()));
  }
  return rates;
}

std::optional<std::pair<int, int>> sample_violation(const std::vector<int>& cat_tokens,
                                                    const Rule& rule, const Schema& schema,
                                                    Rng& rng) {
  const int p_tok = cat_tokens[static_cast<std::size_t>(rule.premise.col)];
  const int c_tok = cat_tokens[static_cast<std::size_t>(rule.consequent.col)];
  const bool premise_true = p_tok == rule.premise.category;
  const bool consequent_true = consequent_holds_token(c_tok, rule);

  // For a satisfying row exactly one move can exist: premise true forces the
  // consequent flip, consequent false forces the premise flip.
  if (premise_true && consequent_true) {
    if (rule.consequent_is_eq) {
      const auto& cats =
          schema.columns[static_cast<std::size_t>(rule.consequent.col)].categories;
      if (cats.size() < 2) return std::nullopt;
      // uniform over categories other than the required one
      int pick = static_cast<int>(rng.below(cats.size() - 1));
      if (pick >= rule.consequent.category) ++pick;
      return std::make_pair(rule.consequent.col, pick);
    }
    return std::make_pair(rule.consequent.col, rule.consequent.category);
  }
  if (!premise_true && !consequent_true) {
    return std::make_pair(rule.premise.col, rule.premise.category);
  }
  return std::nullopt;  // premise false, consequent true: no single-cell violation
}

Row inject_violation(const Row& row, const Rule& rule, const Schema& schema, Rng& rng) {
  if (rule_violated(row, rule)) {
    throw UserError("inject_violation: row already violates rule '" + rule.id + "'");
  }
  if (row[static_cast<std::size_t>(rule.premise.col)].is_missing() ||
      row[static_cast<std::size_t>(rule.consequent.col)].is_missing()) {
    throw UserError("inject_violation: rule '" + rule.id + "' touches a missing cell");
  }
  std::vector<int> tokens(row.size(), -1);
  for (std::size_t c = 0; c < row.size(); ++c) {
    if (row[c].kind == Cell::Kind::Category) tokens[c] = row[c].category;
  }
  auto move = sample_violation(tokens, rule, schema, rng);
  if (!move) {
    throw UserError("inject_violation: rule '" + rule.id +
                    "' cannot be violated by a single-cell change of this row");
  }
  Row out = row;
  out[static_cast<std::size_t>(move->first)] = Cell::cat(move->second);
  return out;
}

}  // namespace retab
