#include "retab/policy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "retab/kernels.hpp"

namespace retab {

ParamLayout ParamLayout::make(std::vector<int> vocab, int d, int h) {
  if (d < 1 || h < 1) throw UserError("policy: embed and hidden dims must be >= 1");
  for (int v : vocab) {
    if (v < 1) throw UserError("policy: every column needs a vocabulary of >= 1");
  }
  ParamLayout lay;
  lay.d = d;
  lay.h = h;
  lay.vocab = std::move(vocab);

  std::size_t off = 0;
  for (int v : lay.vocab) {
    lay.embed_off.push_back(off);
    off += static_cast<std::size_t>(v) * d;
  }
  lay.query_off = off;
  off += lay.vocab.size() * static_cast<std::size_t>(d);
  lay.wh_off = off;
  off += static_cast<std::size_t>(h) * (2 * d);
  lay.bh_off = off;
  off += static_cast<std::size_t>(h);
  for (int v : lay.vocab) {
    lay.head_w_off.push_back(off);
    off += static_cast<std::size_t>(v) * h;
    lay.head_b_off.push_back(off);
    off += static_cast<std::size_t>(v);
  }
  lay.total = off;
  return lay;
}

std::vector<int> vocab_from_binspec(const BinSpec& spec) {
  std::vector<int> vocab;
  vocab.reserve(spec.columns.size());
  for (const auto& c : spec.columns) vocab.push_back(c.vocab);
  return vocab;
}

PolicyParams init_params(const std::vector<int>& vocab, int d, int h, std::uint64_t seed) {
  PolicyParams p;
  p.layout = ParamLayout::make(vocab, d, h);
  p.w.assign(p.layout.total, 0.0);
  Rng rng(seed);
  auto fill_normal = [&](std::size_t off, std::size_t count) {
    for (std::size_t i = 0; i < count; ++i) p.w[off + i] = 0.02 * rng.normal();
  };
  const auto& lay = p.layout;
  for (std::size_t c = 0; c < lay.n_cols(); ++c) {
    fill_normal(lay.embed_off[c], static_cast<std::size_t>(lay.vocab[c]) * lay.d);
  }
  fill_normal(lay.query_off, lay.n_cols() * static_cast<std::size_t>(lay.d));
  fill_normal(lay.wh_off, static_cast<std::size_t>(lay.h) * 2 * lay.d);
  for (std::size_t c = 0; c < lay.n_cols(); ++c) {
    fill_normal(lay.head_w_off[c], static_cast<std::size_t>(lay.vocab[c]) * lay.h);
  }
  // b_h and per-column b_c stay zero
  return p;
}

void cond_forward(const PolicyParams& params, const Context& context, int target_col,
                  Workspace& ws) {
  const auto& lay = params.layout;
  const int d = lay.d;
  const int h = lay.h;
  const std::size_t n_cols = lay.n_cols();
  if (context.size() != n_cols) throw UserError("cond_forward: context width mismatch");
  if (target_col < 0 || static_cast<std::size_t>(target_col) >= n_cols) {
    throw UserError("cond_forward: target column out of range");
  }
  if (context[target_col] >= 0) {
    throw UserError("cond_forward: target column present in context");
  }
  const int vocab = lay.vocab[target_col];

  ws.ctx.assign(d, 0.0);
  int n_ctx = 0;
  for (std::size_t c = 0; c < n_cols; ++c) {  // fixed column order: exact order-invariance
    int tok = context[c];
    if (tok < 0) continue;
    if (tok >= lay.vocab[c]) throw UserError("cond_forward: context token out of range");
    kernels::axpy(1.0, params.embedding(static_cast<int>(c), tok), ws.ctx.data(), d);
    ++n_ctx;
  }
  if (n_ctx > 0) {
    double inv = 1.0 / n_ctx;
    for (int i = 0; i < d; ++i) ws.ctx[i] *= inv;
  }

  ws.input.resize(2 * static_cast<std::size_t>(d));
  std::copy(ws.ctx.begin(), ws.ctx.end(), ws.input.begin());
  const double* q = params.query(target_col);
  std::copy(q, q + d, ws.input.begin() + d);

  ws.pre_h.resize(h);
  ws.hidden.resize(h);
  const double* wh = params.w.data() + lay.wh_off;
  const double* bh = params.w.data() + lay.bh_off;
  for (int r = 0; r < h; ++r) {
    double z = bh[r] + kernels::dot(wh + static_cast<std::size_t>(r) * 2 * d, ws.input.data(),
                                    2 * static_cast<std::size_t>(d));
    ws.pre_h[r] = z;
    ws.hidden[r] = z > 0.0 ? z : 0.0;
  }

  ws.logits.resize(vocab);
  const double* wc = params.w.data() + lay.head_w_off[target_col];
  const double* bc = params.w.data() + lay.head_b_off[target_col];
  for (int k = 0; k < vocab; ++k) {
    ws.logits[k] = bc[k] + kernels::dot(wc + static_cast<std::size_t>(k) * h, ws.hidden.data(),
                                        static_cast<std::size_t>(h));
  }

  double max_logit = *std::max_element(ws.logits.begin(), ws.logits.end());
  double z = 0.0;
  for (int k = 0; k < vocab; ++k) z += std::exp(ws.logits[k] - max_logit);
  double log_z = max_logit + std::log(z);
  ws.logprobs.resize(vocab);
  for (int k = 0; k < vocab; ++k) ws.logprobs[k] = ws.logits[k] - log_z;
}

double cond_logprob(const PolicyParams& params, const Context& context, int target_col,
                    int token) {
  Workspace ws;
  cond_forward(params, context, target_col, ws);
  if (token < 0 || token >= params.layout.vocab[target_col]) {
    throw UserError("cond_logprob: token out of range");
  }
  return ws.logprobs[token];
}

std::vector<double> cond_logprobs(const PolicyParams& params, const Context& context,
                                  int target_col) {
  Workspace ws;
  cond_forward(params, context, target_col, ws);
  return ws.logprobs;
}

void cond_backward(const PolicyParams& params, const Context& context, int target_col,
                   const Workspace& ws, std::vector<double>& grad) {
  const auto& lay = params.layout;
  const int d = lay.d;
  const int h = lay.h;
  const int vocab = lay.vocab[target_col];

  // heads
  double* gwc = grad.data() + lay.head_w_off[target_col];
  double* gbc = grad.data() + lay.head_b_off[target_col];
  for (int k = 0; k < vocab; ++k) {
    double g = ws.glogits[k];
    if (g == 0.0) continue;
    kernels::axpy(g, ws.hidden.data(), gwc + static_cast<std::size_t>(k) * h,
                  static_cast<std::size_t>(h));
    gbc[k] += g;
  }

  // back through hidden
  thread_local std::vector<double> dhidden, dpre, dinput;
  dhidden.assign(h, 0.0);
  const double* wc = params.w.data() + lay.head_w_off[target_col];
  for (int k = 0; k < vocab; ++k) {
    double g = ws.glogits[k];
    if (g == 0.0) continue;
    kernels::axpy(g, wc + static_cast<std::size_t>(k) * h, dhidden.data(),
                  static_cast<std::size_t>(h));
  }
  dpre.resize(h);
  for (int r = 0; r < h; ++r) dpre[r] = ws.pre_h[r] > 0.0 ? dhidden[r] : 0.0;

  double* gwh = grad.data() + lay.wh_off;
  double* gbh = grad.data() + lay.bh_off;
  const double* wh = params.w.data() + lay.wh_off;
  dinput.assign(2 * static_cast<std::size_t>(d), 0.0);
  for (int r = 0; r < h; ++r) {
    double g = dpre[r];
    if (g == 0.0) continue;
    kernels::axpy(g, ws.input.data(), gwh + static_cast<std::size_t>(r) * 2 * d,
                  2 * static_cast<std::size_t>(d));
    gbh[r] += g;
    kernels::axpy(g, wh + static_cast<std::size_t>(r) * 2 * d, dinput.data(),
                  2 * static_cast<std::size_t>(d));
  }

  // query embedding of the target column
  kernels::axpy(1.0, dinput.data() + d,
                grad.data() + lay.query_off + static_cast<std::size_t>(target_col) * d,
                static_cast<std::size_t>(d));

  // context value embeddings (mean pooling)
  int n_ctx = 0;
  for (std::size_t c = 0; c < lay.n_cols(); ++c) n_ctx += context[c] >= 0;
  if (n_ctx > 0) {
    double inv = 1.0 / n_ctx;
    for (std::size_t c = 0; c < lay.n_cols(); ++c) {
      int tok = context[c];
      if (tok < 0) continue;
      kernels::axpy(inv, dinput.data(),
                    grad.data() + lay.embed_off[c] + static_cast<std::size_t>(tok) * d,
                    static_cast<std::size_t>(d));
    }
  }
}

EncodedRow sample_row(const PolicyParams& params, Rng& rng) {
  const auto& lay = params.layout;
  std::vector<int> perm(lay.n_cols());
  std::iota(perm.begin(), perm.end(), 0);
  rng.shuffle(perm);

  Context ctx(lay.n_cols(), -1);
  Workspace ws;
  for (int col : perm) {
    cond_forward(params, ctx, col, ws);
    double u = rng.uniform();
    double acc = 0.0;
    int tok = lay.vocab[col] - 1;
    for (int k = 0; k < lay.vocab[col]; ++k) {
      acc += std::exp(ws.logprobs[k]);
      if (u < acc) {
        tok = k;
        break;
      }
    }
    ctx[col] = tok;
  }
  return ctx;
}

std::vector<EncodedRow> sample_rows(const PolicyParams& params, std::size_t n,
                                    std::uint64_t seed) {
  std::vector<EncodedRow> rows;
  rows.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng(Rng::derive(seed, i));
    rows.push_back(sample_row(params, rng));
  }
  return rows;
}

double row_chain_nll(const PolicyParams& params, const EncodedRow& row,
                     const std::vector<int>& perm, Workspace& ws, std::vector<double>* grad) {
  Context ctx(params.layout.n_cols(), -1);
  double nll = 0.0;
  for (int col : perm) {
    cond_forward(params, ctx, col, ws);
    int tok = row[col];
    nll -= ws.logprobs[tok];
    if (grad) {
      const int vocab = params.layout.vocab[col];
      ws.glogits.resize(vocab);
      for (int k = 0; k < vocab; ++k) {
        ws.glogits[k] = std::exp(ws.logprobs[k]) - (k == tok ? 1.0 : 0.0);
      }
      cond_backward(params, ctx, col, ws, *grad);
    }
    ctx[col] = tok;
  }
  return nll;
}

std::vector<double> sft_steps(PolicyParams& params, const std::vector<EncodedRow>& data,
                              double learning_rate, int batch_size, std::size_t n_steps,
                              Rng& rng) {
  if (data.empty()) throw UserError("sft: no training rows");
  if (batch_size < 1) throw UserError("sft: batch_size must be >= 1");

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::size_t cursor = data.size();  // forces a shuffle on first use

  std::vector<double> grad(params.layout.total);
  Workspace ws;
  std::vector<int> perm(params.layout.n_cols());

  std::vector<double> pass_means;
  double pass_loss = 0.0;
  std::size_t pass_rows = 0;

  // Batches never straddle a pass boundary: the last batch of a pass may be
  // short, so one pass visits every row exactly once.
  for (std::size_t step = 0; step < n_steps; ++step) {
    if (cursor == data.size()) {
      if (pass_rows > 0) {
        pass_means.push_back(pass_loss / static_cast<double>(pass_rows));
        pass_loss = 0.0;
        pass_rows = 0;
      }
      rng.shuffle(order);
      cursor = 0;
    }
    std::size_t take = std::min<std::size_t>(batch_size, data.size() - cursor);
    std::fill(grad.begin(), grad.end(), 0.0);
    double batch_loss = 0.0;
    for (std::size_t b = 0; b < take; ++b) {
      const EncodedRow& row = data[order[cursor++]];
      std::iota(perm.begin(), perm.end(), 0);
      rng.shuffle(perm);
      batch_loss += row_chain_nll(params, row, perm, ws, &grad);
    }
    pass_loss += batch_loss;
    pass_rows += take;
    kernels::axpy(-learning_rate / static_cast<double>(take), grad.data(), params.w.data(),
                  params.layout.total);
  }
  if (pass_rows > 0) pass_means.push_back(pass_loss / static_cast<double>(pass_rows));
  return pass_means;
}

double sft_epoch(PolicyParams& params, const std::vector<EncodedRow>& data,
                 const TrainConfig& cfg, std::uint64_t epoch_seed) {
  if (data.empty()) throw UserError("sft_epoch: no training rows");
  Rng rng(epoch_seed);
  std::size_t steps = (data.size() + cfg.batch_size - 1) / cfg.batch_size;
  auto means = sft_steps(params, data, cfg.learning_rate, cfg.batch_size, steps, rng);
  double weighted = 0.0;
  // one full pass: sft_steps reports it as a single mean
  for (double m : means) weighted += m;
  return means.empty() ? 0.0 : weighted / static_cast<double>(means.size());
}

double grad_check(const PolicyParams& params,
                  const std::function<double(const PolicyParams&, std::vector<double>*)>& loss,
                  double eps, Rng& rng) {
  if (eps <= 0.0) throw UserError("grad_check: eps must be positive");
  std::vector<double> analytic(params.layout.total, 0.0);
  loss(params, &analytic);

  std::size_t n_coords = std::max<std::size_t>(50, params.layout.total / 100);
  n_coords = std::min(n_coords, params.layout.total);
  std::vector<std::size_t> all(params.layout.total);
  std::iota(all.begin(), all.end(), std::size_t{0});
  rng.shuffle(all);

  PolicyParams probe = params;
  double worst = 0.0;
  for (std::size_t i = 0; i < n_coords; ++i) {
    std::size_t c = all[i];
    double original = probe.w[c];
    probe.w[c] = original + eps;
    double up = loss(probe, nullptr);
    probe.w[c] = original - eps;
    double down = loss(probe, nullptr);
    probe.w[c] = original;
    double fd = (up - down) / (2.0 * eps);
    double rel = std::fabs(analytic[c] - fd) / std::max(1e-8, std::fabs(fd));
    worst = std::max(worst, rel);
  }
  return worst;
}

// ---- Checkpointing ---------------------------------------------------------

nlohmann::json checkpoint_to_json(const Checkpoint& ckpt) {
  nlohmann::json j;
  j["schema"] = ckpt.schema.to_json();
  j["binspec"] = ckpt.binspec.to_json();
  j["d"] = ckpt.params.layout.d;
  j["h"] = ckpt.params.layout.h;
  j["weights"] = ckpt.params.w;
  return j;
}

Checkpoint checkpoint_from_json(const nlohmann::json& j) {
  Checkpoint ckpt;
  ckpt.schema = Schema::from_json(j.at("schema"));
  ckpt.binspec = BinSpec::from_json(j.at("binspec"));
  int d = j.at("d").get<int>();
  int h = j.at("h").get<int>();
  ckpt.params.layout = ParamLayout::make(vocab_from_binspec(ckpt.binspec), d, h);
  ckpt.params.w = j.at("weights").get<std::vector<double>>();
  if (ckpt.params.w.size() != ckpt.params.layout.total) {
    throw UserError("checkpoint: weight count does not match architecture");
  }
  return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UserError("cannot write checkpoint: " + path);
  out << checkpoint_to_json(ckpt).dump(2) << '\n';
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UserError("cannot open checkpoint: " + path);
  nlohmann::json j;
  in >> j;
  return checkpoint_from_json(j);
}

}  // namespace retab
