#include "retab/dpo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "retab/kernels.hpp"

namespace retab {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

double softplus(double x) {  // log(1 + e^x), stable on both tails
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

struct TupleEval {
  double lp_chosen, lp_rejected, lr_chosen, lr_rejected;
};

}  // namespace

DpoLossDetail dpo_loss(const PolicyParams& policy, const PolicyParams& ref,
                       const PreferenceTuple& tuple, const DpoConfig& cfg,
                       std::vector<double>* grad) {
  if (!(policy.layout == ref.layout)) {
    throw UserError("dpo_loss: policy and reference architectures differ");
  }
  if (tuple.chosen == tuple.rejected) {
    throw UserError("dpo_loss: chosen and rejected tokens coincide");
  }
  if (cfg.beta <= 0.0) throw UserError("dpo_loss: beta must be positive");
  if (cfg.lambda < 0.0) throw UserError("dpo_loss: lambda must be nonnegative");

  Workspace ws_policy, ws_ref;
  cond_forward(policy, tuple.prompt, tuple.column, ws_policy);
  cond_forward(ref, tuple.prompt, tuple.column, ws_ref);

  TupleEval e;
  e.lp_chosen = ws_policy.logprobs[tuple.chosen];
  e.lp_rejected = ws_policy.logprobs[tuple.rejected];
  e.lr_chosen = ws_ref.logprobs[tuple.chosen];
  e.lr_rejected = ws_ref.logprobs[tuple.rejected];

  DpoLossDetail out;
  out.margin = e.lp_chosen - e.lp_rejected;
  out.delta = out.margin - (e.lr_chosen - e.lr_rejected);
  double hinge = std::max(0.0, e.lr_chosen - e.lp_chosen);
  out.loss = softplus(-cfg.beta * out.delta) + cfg.lambda * hinge;

  if (grad) {
    double s = sigmoid(-cfg.beta * out.delta);
    double d_chosen = -cfg.beta * s;
    double d_rejected = cfg.beta * s;
    if (e.lr_chosen > e.lp_chosen) d_chosen -= cfg.lambda;  // hinge subgradient 0 at the kink

    const int vocab = policy.layout.vocab[tuple.column];
    ws_policy.glogits.resize(vocab);
    double total = d_chosen + d_rejected;
    for (int k = 0; k < vocab; ++k) {
      ws_policy.glogits[k] = -total * std::exp(ws_policy.logprobs[k]);
    }
    ws_policy.glogits[tuple.chosen] += d_chosen;
    ws_policy.glogits[tuple.rejected] += d_rejected;
    cond_backward(policy, tuple.prompt, tuple.column, ws_policy, *grad);
  }
  return out;
}

std::vector<EpochStats> dpo_steps(PolicyParams& policy, const PolicyParams& ref,
                                  const std::vector<PreferenceTuple>& tuples,
                                  const DpoConfig& cfg, std::size_t n_steps, Rng& rng) {
  if (tuples.empty()) throw UserError("dpo: no preference tuples");
  if (cfg.batch_size < 1) throw UserError("dpo: batch_size must be >= 1");

  std::vector<std::size_t> order(tuples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::size_t cursor = tuples.size();

  std::vector<double> grad(policy.layout.total);
  std::vector<EpochStats> stats;
  double pass_loss = 0.0, pass_margin = 0.0;
  std::size_t pass_rows = 0, pass_positive = 0;
  int pass_index = 0;

  auto flush_pass = [&] {
    if (pass_rows == 0) return;
    EpochStats s;
    s.stage = "dpo";
    s.epoch = ++pass_index;
    s.mean_loss = pass_loss / static_cast<double>(pass_rows);
    s.mean_margin = pass_margin / static_cast<double>(pass_rows);
    s.frac_positive = static_cast<double>(pass_positive) / static_cast<double>(pass_rows);
    stats.push_back(std::move(s));
    pass_loss = pass_margin = 0.0;
    pass_rows = pass_positive = 0;
  };

  for (std::size_t step = 0; step < n_steps; ++step) {
    if (cursor == tuples.size()) {
      flush_pass();
      rng.shuffle(order);
      cursor = 0;
    }
    std::size_t take = std::min<std::size_t>(cfg.batch_size, tuples.size() - cursor);
    std::fill(grad.begin(), grad.end(), 0.0);
    for (std::size_t b = 0; b < take; ++b) {
      const PreferenceTuple& t = tuples[order[cursor++]];
      DpoLossDetail d = dpo_loss(policy, ref, t, cfg, &grad);
      pass_loss += d.loss;
      pass_margin += d.margin;
      pass_positive += d.margin > 0.0;
    }
    pass_rows += take;
    kernels::axpy(-cfg.learning_rate / static_cast<double>(take), grad.data(), policy.w.data(),
                  policy.layout.total);
  }
  flush_pass();
  return stats;
}

std::vector<EpochStats> dpo_train(PolicyParams& policy, const PolicyParams& ref,
                                  const std::vector<PreferenceTuple>& tuples,
                                  const DpoConfig& cfg, std::uint64_t seed) {
  if (tuples.empty()) throw UserError("dpo_train: no preference tuples");
  if (cfg.epochs < 1) throw UserError("dpo_train: epochs must be >= 1");
  Rng rng(seed);
  std::size_t per_epoch = (tuples.size() + cfg.batch_size - 1) / cfg.batch_size;
  return dpo_steps(policy, ref, tuples, cfg, per_epoch * static_cast<std::size_t>(cfg.epochs),
                   rng);
}

MarginStats margin_stats(const PolicyParams& policy, const PolicyParams& ref,
                         const std::vector<PreferenceTuple>& tuples) {
  MarginStats out;
  if (tuples.empty()) return out;
  Workspace ws_policy, ws_ref;
  std::size_t positive = 0;
  for (const PreferenceTuple& t : tuples) {
    cond_forward(policy, t.prompt, t.column, ws_policy);
    cond_forward(ref, t.prompt, t.column, ws_ref);
    double margin = ws_policy.logprobs[t.chosen] - ws_policy.logprobs[t.rejected];
    double ref_margin = ws_ref.logprobs[t.chosen] - ws_ref.logprobs[t.rejected];
    out.mean_margin += margin;
    out.mean_delta += margin - ref_margin;
    positive += margin > 0.0;
  }
  const double n = static_cast<double>(tuples.size());
  out.mean_margin /= n;
  out.mean_delta /= n;
  out.frac_positive = static_cast<double>(positive) / n;
  return out;
}

StagedResult staged_finetune(PolicyParams& policy, const std::vector<EncodedRow>& rows,
                             const std::vector<PreferenceTuple>& tuples,
                             std::size_t total_steps, const DpoConfig& cfg, std::uint64_t seed,
                             std::optional<double> sft_learning_rate) {
  if (cfg.rho < 0.0 || cfg.rho > 1.0) throw UserError("staged_finetune: rho must be in [0, 1]");

  StagedResult out;
  out.sft_steps = static_cast<std::size_t>(
      std::ceil((1.0 - cfg.rho) * static_cast<double>(total_steps)));
  out.sft_steps = std::min(out.sft_steps, total_steps);
  out.dpo_steps = total_steps - out.sft_steps;

  Rng rng(seed);
  if (out.sft_steps > 0) {
    double lr = sft_learning_rate.value_or(cfg.learning_rate);
    auto means = sft_steps(policy, rows, lr, cfg.batch_size, out.sft_steps, rng);
    for (std::size_t i = 0; i < means.size(); ++i) {
      EpochStats s;
      s.stage = "sft";
      s.epoch = static_cast<int>(i) + 1;
      s.mean_loss = means[i];
      s.mean_margin = kNan;
      s.frac_positive = kNan;
      out.sft.push_back(std::move(s));
    }
  }
  out.ref = policy;  // frozen reference for the DPO phase
  if (out.dpo_steps > 0) {
    out.dpo = dpo_steps(policy, out.ref, tuples, cfg, out.dpo_steps, rng);
  }
  return out;
}

}  // namespace retab
