#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "retab/encoder.hpp"
#include "retab/rng.hpp"
#include "retab/table.hpp"

namespace retab {

// Partially observed row: token per column, -1 where unobserved.
using Context = std::vector<int>;

// Flat-parameter layout of the any-order generator: per-(column, token) value
// embeddings, per-column query embeddings, one shared relu hidden layer, and
// per-column softmax heads. Conditionals are exact for any (context, column)
// pair because the context enters as a mean-pooled embedding.
struct ParamLayout {
  int d = 32;
  int h = 64;
  std::vector<int> vocab;

  std::vector<std::size_t> embed_off;   // per column: vocab * d
  std::size_t query_off = 0;            // n_cols * d
  std::size_t wh_off = 0;               // h * 2d
  std::size_t bh_off = 0;               // h
  std::vector<std::size_t> head_w_off;  // per column: vocab * h
  std::vector<std::size_t> head_b_off;  // per column: vocab
  std::size_t total = 0;

  static ParamLayout make(std::vector<int> vocab, int d, int h);
  std::size_t n_cols() const { return vocab.size(); }
  bool operator==(const ParamLayout& other) const {
    return d == other.d && h == other.h && vocab == other.vocab;
  }
};

struct PolicyParams {
  ParamLayout layout;
  std::vector<double> w;

  double* embedding(int col, int token) {
    return w.data() + layout.embed_off[col] + static_cast<std::size_t>(token) * layout.d;
  }
  const double* embedding(int col, int token) const {
    return w.data() + layout.embed_off[col] + static_cast<std::size_t>(token) * layout.d;
  }
  double* query(int col) { return w.data() + layout.query_off + static_cast<std::size_t>(col) * layout.d; }
  const double* query(int col) const {
    return w.data() + layout.query_off + static_cast<std::size_t>(col) * layout.d;
  }
};

// Scratch buffers reused across forward/backward passes.
struct Workspace {
  std::vector<double> ctx, input, pre_h, hidden, logits, logprobs, glogits;
};

PolicyParams init_params(const std::vector<int>& vocab, int d, int h, std::uint64_t seed);

std::vector<int> vocab_from_binspec(const BinSpec& spec);

// Log-softmax over target column tokens given the context; the target column
// must be absent from the context. Context columns contribute through an
// order-free mean, so supplying the same pairs in any order is bit-identical.
void cond_forward(const PolicyParams& params, const Context& context, int target_col,
                  Workspace& ws);

double cond_logprob(const PolicyParams& params, const Context& context, int target_col,
                    int token);

std::vector<double> cond_logprobs(const PolicyParams& params, const Context& context,
                                  int target_col);

// Accumulates d(loss)/d(params) into grad for a loss whose gradient at the
// logits is ws.glogits; call cond_forward first.
void cond_backward(const PolicyParams& params, const Context& context, int target_col,
                   const Workspace& ws, std::vector<double>& grad);

// Ancestral sampling under a fresh uniform column permutation.
EncodedRow sample_row(const PolicyParams& params, Rng& rng);

std::vector<EncodedRow> sample_rows(const PolicyParams& params, std::size_t n,
                                    std::uint64_t seed);

struct TrainConfig {
  double learning_rate = 1e-4;
  int epochs = 3;
  int batch_size = 64;
  std::uint64_t seed = 0;
};

// Chain-loss NLL of one row under a given column permutation, with gradient
// accumulation when grad is non-null.
double row_chain_nll(const PolicyParams& params, const EncodedRow& row,
                     const std::vector<int>& perm, Workspace& ws, std::vector<double>* grad);

// One SFT epoch of mini-batch gradient descent (fresh column permutation per
// row); returns the epoch-mean per-row NLL.
double sft_epoch(PolicyParams& params, const std::vector<EncodedRow>& data,
                 const TrainConfig& cfg, std::uint64_t epoch_seed);

// Runs exactly n_steps batch updates, cycling (reshuffled) epochs as needed.
// Returns mean NLL per completed pass; rng drives shuffles and permutations.
std::vector<double> sft_steps(PolicyParams& params, const std::vector<EncodedRow>& data,
                              double learning_rate, int batch_size, std::size_t n_steps,
                              Rng& rng);

// Max relative error between the analytic gradient of `loss` and central
// finite differences over a random >=50-coordinate subsample.
double grad_check(const PolicyParams& params,
                  const std::function<double(const PolicyParams&, std::vector<double>*)>& loss,
                  double eps, Rng& rng);

// ---- Checkpointing ---------------------------------------------------------

struct Checkpoint {
  Schema schema;
  BinSpec binspec;
  PolicyParams params;
};

nlohmann::json checkpoint_to_json(const Checkpoint& ckpt);
Checkpoint checkpoint_from_json(const nlohmann::json& j);
void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace retab
