#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "retab/rng.hpp"
#include "retab/table.hpp"

namespace retab {

// Single-premise categorical implication: premise.col == premise.category
// implies the consequent (an equality or inequality on another column).
struct RuleAtom {
  int col = -1;
  int category = -1;
};

struct Rule {
  std::string id;
  RuleAtom premise;
  RuleAtom consequent;
  bool consequent_is_eq = true;
};

// Parses and validates [{id, if:{col,value}, then:{col,value,op}}, ...];
// errors name the offending rule id. Duplicate ids are rejected.
std::vector<Rule> parse_rules(const nlohmann::json& doc, const Schema& schema);
std::vector<Rule> load_rules(const std::string& path, const Schema& schema);
nlohmann::json rules_to_json(const std::vector<Rule>& rules, const Schema& schema);

// A row with a Missing cell in either rule column never counts as violating.
bool rule_violated(const Row& row, const Rule& rule);

// Per-rule fraction of rows where the premise holds and the consequent fails.
// Integer counts divide once at the end; an empty table scores 0.
std::vector<double> violation_rate(const Table& table, const std::vector<Rule>& rules);

// The single-cell change that flips a satisfying row into a violating one:
// flip the consequent under a true premise, or force the premise true when
// the consequent is already false. Returns (column, violating category);
// nullopt when the row cannot be violated in one move.
std::optional<std::pair<int, int>> sample_violation(const std::vector<int>& cat_tokens,
                                                    const Rule& rule, const Schema& schema,
                                                    Rng& rng);

// Row-level wrapper around sample_violation; throws when the row does not
// satisfy the rule or no single-cell violation exists.
Row inject_violation(const Row& row, const Rule& rule, const Schema& schema, Rng& rng);

}  // namespace retab
