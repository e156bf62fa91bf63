#include "retab/preference.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "retab/classifiers.hpp"
#include "retab/rng.hpp"
#include "retab/stats.hpp"

namespace retab {

std::string_view perturb_kind_name(PerturbKind kind) {
  switch (kind) {
    case PerturbKind::TypeI:
      return "type1";
    case PerturbKind::TypeII:
      return "type2";
    case PerturbKind::Constraint:
      return "constraint";
  }
  return "type1";
}

namespace {

// Association strength between two columns over their complete value pairs.
// NaN means not computable (degenerate column).
double pair_strength(const Table& table, int a, int b) {
  const Column& ca = table.schema.columns[static_cast<std::size_t>(a)];
  const Column& cb = table.schema.columns[static_cast<std::size_t>(b)];

  if (ca.numeric() && cb.numeric()) {
    std::vector<double> xs, ys;
    for (const Row& row : table.rows) {
      if (row[a].kind == Cell::Kind::Number && row[b].kind == Cell::Kind::Number) {
        xs.push_back(row[a].number);
        ys.push_back(row[b].number);
      }
    }
    return std::fabs(stats::pearson(xs, ys));
  }
  if (ca.categorical() && cb.categorical()) {
    std::vector<int> xs, ys;
    for (const Row& row : table.rows) {
      if (row[a].kind == Cell::Kind::Category && row[b].kind == Cell::Kind::Category) {
        xs.push_back(row[a].category);
        ys.push_back(row[b].category);
      }
    }
    return stats::cramers_v(xs, static_cast<int>(ca.categories.size()), ys,
                            static_cast<int>(cb.categories.size()));
  }
  // mixed: correlation ratio of the numeric side grouped by the categorical
  const bool a_is_cat = ca.categorical();
  int cat_col = a_is_cat ? a : b;
  int num_col = a_is_cat ? b : a;
  int card = static_cast<int>(
      table.schema.columns[static_cast<std::size_t>(cat_col)].categories.size());
  std::vector<int> groups;
  std::vector<double> values;
  for (const Row& row : table.rows) {
    if (row[cat_col].kind == Cell::Kind::Category && row[num_col].kind == Cell::Kind::Number) {
      groups.push_back(row[cat_col].category);
      values.push_back(row[num_col].number);
    }
  }
  return stats::correlation_ratio(groups, card, values);
}

}  // namespace

std::vector<CorrelatedPair> correlated_pairs(const Table& table, double threshold) {
  const int t = table.schema.target_index();
  std::vector<CorrelatedPair> pairs;
  const int n = static_cast<int>(table.schema.columns.size());
  for (int a = 0; a < n; ++a) {
    if (a == t) continue;
    for (int b = a + 1; b < n; ++b) {
      if (b == t) continue;
      double s = pair_strength(table, a, b);
      if (std::isnan(s) || s < threshold) continue;
      pairs.push_back(CorrelatedPair{a, b, s});
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const CorrelatedPair& x, const CorrelatedPair& y) {
    if (x.strength != y.strength) return x.strength > y.strength;
    if (x.col_a != y.col_a) return x.col_a < y.col_a;
    return x.col_b < y.col_b;
  });
  return pairs;
}

namespace {

int draw_other_token(int current, int vocab, Rng& rng) {
  int pick = static_cast<int>(rng.below(static_cast<std::uint64_t>(vocab - 1)));
  if (pick >= current) ++pick;
  return pick;
}

PreferenceTuple make_tuple(const EncodedRow& row, int column, int rejected, PerturbKind kind) {
  PreferenceTuple t;
  t.prompt = row;
  t.prompt[static_cast<std::size_t>(column)] = -1;
  t.column = column;
  t.chosen = row[static_cast<std::size_t>(column)];
  t.rejected = rejected;
  t.kind = kind;
  return t;
}

}  // namespace

PrefBuildResult build_preferences(const std::vector<EncodedRow>& rows, const Table& table,
                                  const PrefBuildConfig& cfg,
                                  const std::vector<CorrelatedPair>& pairs,
                                  const std::vector<Rule>& rules, const BinSpec& spec) {
  if (cfg.p_type1 < 0.0 || cfg.p_type1 > 1.0) {
    throw UserError("build_preferences: p_type1 must be in [0, 1]");
  }
  const int t = table.schema.target_index();
  if (t < 0) throw UserError("build_preferences: no target column");

  // empirical target marginal over the training rows
  const int target_vocab = spec.vocab(static_cast<std::size_t>(t));
  std::vector<double> marginal(static_cast<std::size_t>(target_vocab), 0.0);
  for (const EncodedRow& row : rows) marginal[row[static_cast<std::size_t>(t)]] += 1.0;

  std::vector<double> pair_weights;
  pair_weights.reserve(pairs.size());
  for (const auto& p : pairs) pair_weights.push_back(p.strength);

  PrefBuildResult out;
  out.tuples.reserve(rows.size());

  for (std::size_t i = 0; i < rows.size(); ++i) {
    const EncodedRow& row = rows[i];
    Rng rng(Rng::derive(cfg.seed, i));

    auto emit_type1 = [&]() {
      int chosen = row[static_cast<std::size_t>(t)];
      std::vector<double> weights = marginal;
      weights[chosen] = 0.0;
      double mass = 0.0;
      for (double w : weights) mass += w;
      if (mass <= 0.0) {
        throw UserError("build_preferences: target has a single observed class; "
                        "no rejected token exists");
      }
      int rejected = static_cast<int>(rng.weighted(weights));
      out.tuples.push_back(make_tuple(row, t, rejected, PerturbKind::TypeI));
    };

    auto emit_type2 = [&]() -> bool {
      if (pairs.empty()) return false;
      const CorrelatedPair& pair = pairs[rng.weighted(pair_weights)];
      int first = rng.below(2) == 0 ? pair.col_a : pair.col_b;
      int second = first == pair.col_a ? pair.col_b : pair.col_a;
      for (int col : {first, second}) {
        int vocab = spec.vocab(static_cast<std::size_t>(col));
        if (vocab < 2) continue;
        int rejected = draw_other_token(row[static_cast<std::size_t>(col)], vocab, rng);
        out.tuples.push_back(make_tuple(row, col, rejected, PerturbKind::TypeII));
        return true;
      }
      return false;
    };

    bool want_type1 = rng.uniform() < cfg.p_type1;
    if (want_type1) {
      emit_type1();
      continue;
    }

    if (!rules.empty() && rng.uniform() < cfg.constraint_fraction) {
      const Rule& rule = rules[rng.below(rules.size())];
      auto move = sample_violation(row, rule, table.schema, rng);
      if (move) {
        out.tuples.push_back(make_tuple(row, move->first, move->second, PerturbKind::Constraint));
        continue;
      }
      ++out.constraint_fallbacks;
    }

    if (!emit_type2()) {
      ++out.type2_fallbacks;
      emit_type1();
    }
  }
  return out;
}

std::vector<PreferenceTuple> oracle_edit(const std::vector<EncodedRow>& rows, const Table& table,
                                         const Classifier& clf) {
  const int t = table.schema.target_index();
  std::vector<PreferenceTuple> tuples;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    int predicted = clf.score(table.rows[i]) >= 0.5 ? 1 : 0;
    int observed = rows[i][static_cast<std::size_t>(t)];
    if (predicted == observed) continue;
    PreferenceTuple tup = make_tuple(rows[i], t, observed, PerturbKind::TypeI);
    tup.chosen = predicted;  // prefer the classifier's label over the recorded one
    tuples.push_back(std::move(tup));
  }
  return tuples;
}

std::vector<std::size_t> oracle_screen(const std::vector<EncodedRow>& rows, const Table& table,
                                       const Classifier& clf) {
  const int t = table.schema.target_index();
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    int predicted = clf.score(table.rows[i]) >= 0.5 ? 1 : 0;
    if (predicted == rows[i][static_cast<std::size_t>(t)]) kept.push_back(i);
  }
  return kept;
}

std::string tuples_to_jsonl(const std::vector<PreferenceTuple>& tuples) {
  std::string out;
  for (const auto& t : tuples) {
    nlohmann::json j;
    nlohmann::json prompt = nlohmann::json::array();
    for (std::size_t c = 0; c < t.prompt.size(); ++c) {
      if (t.prompt[c] >= 0) prompt.push_back({static_cast<int>(c), t.prompt[c]});
    }
    j["prompt"] = std::move(prompt);
    j["col"] = t.column;
    j["chosen"] = t.chosen;
    j["rejected"] = t.rejected;
    j["kind"] = perturb_kind_name(t.kind);
    out += j.dump();
    out.push_back('\n');
  }
  return out;
}

std::vector<PreferenceTuple> tuples_from_jsonl(const std::string& text, std::size_t n_cols) {
  std::vector<PreferenceTuple> tuples;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line);
    PreferenceTuple t;
    t.prompt.assign(n_cols, -1);
    for (const auto& pair : j.at("prompt")) {
      t.prompt[pair.at(0).get<std::size_t>()] = pair.at(1).get<int>();
    }
    t.column = j.at("col").get<int>();
    t.chosen = j.at("chosen").get<int>();
    t.rejected = j.at("rejected").get<int>();
    std::string kind = j.at("kind").get<std::string>();
    t.kind = kind == "type2"     ? PerturbKind::TypeII
             : kind == "constraint" ? PerturbKind::Constraint
                                    : PerturbKind::TypeI;
    tuples.push_back(std::move(t));
  }
  return tuples;
}

}  // namespace retab
