#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "retab/policy.hpp"
#include "retab/preference.hpp"

namespace retab {

struct DpoConfig {
  double beta = 0.1;
  double lambda = 0.1;
  double learning_rate = 1e-4;
  int epochs = 3;
  int batch_size = 64;
  double rho = 0.5;  // fraction of the fine-tuning step budget given to DPO
};

struct DpoLossDetail {
  double loss = 0.0;
  double margin = 0.0;  // log pi(C|X) - log pi(R|X) under the trained policy
  double delta = 0.0;   // margin minus the reference margin
};

// DPO-Positive loss for one tuple: -log sigmoid(beta * delta) plus a hinge
// keeping the chosen completion's likelihood at or above the reference.
// Equals ln 2 exactly when policy == ref. Gradients (policy side only)
// accumulate into *grad when given.
DpoLossDetail dpo_loss(const PolicyParams& policy, const PolicyParams& ref,
                       const PreferenceTuple& tuple, const DpoConfig& cfg,
                       std::vector<double>* grad = nullptr);

struct EpochStats {
  std::string stage;
  int epoch = 0;
  double mean_loss = 0.0;
  double mean_margin = 0.0;   // NaN for SFT entries
  double frac_positive = 0.0; // NaN for SFT entries
};

// Mini-batch gradient descent on the mean tuple loss; ref is never touched.
std::vector<EpochStats> dpo_train(PolicyParams& policy, const PolicyParams& ref,
                                  const std::vector<PreferenceTuple>& tuples,
                                  const DpoConfig& cfg, std::uint64_t seed);

// Exactly n_steps batch updates (short batch at each pass boundary); one
// stats entry per completed or partial pass.
std::vector<EpochStats> dpo_steps(PolicyParams& policy, const PolicyParams& ref,
                                  const std::vector<PreferenceTuple>& tuples,
                                  const DpoConfig& cfg, std::size_t n_steps, Rng& rng);

struct MarginStats {
  double mean_margin = 0.0;
  double mean_delta = 0.0;
  double frac_positive = 0.0;
};

MarginStats margin_stats(const PolicyParams& policy, const PolicyParams& ref,
                         const std::vector<PreferenceTuple>& tuples);

struct StagedResult {
  PolicyParams ref;  // snapshot taken between the SFT and DPO phases
  std::vector<EpochStats> sft;
  std::vector<EpochStats> dpo;
  std::size_t sft_steps = 0;
  std::size_t dpo_steps = 0;
};

// ceil((1-rho) * total_steps) SFT batch updates, reference snapshot, then
// floor(rho * total_steps) DPO updates. sft_learning_rate falls back to
// cfg.learning_rate.
StagedResult staged_finetune(PolicyParams& policy, const std::vector<EncodedRow>& rows,
                             const std::vector<PreferenceTuple>& tuples,
                             std::size_t total_steps, const DpoConfig& cfg, std::uint64_t seed,
                             std::optional<double> sft_learning_rate = {});

}  // namespace retab
