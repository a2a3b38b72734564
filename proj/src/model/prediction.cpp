#include "biclkt/prediction.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <limits>

#include "biclkt/errors.hpp"
#include "biclkt/evaluation.hpp"

namespace biclkt {
namespace {

void validate(const HeadConfig& cfg) {
  if (cfg.kind != "r" && cfg.kind != "m")
    throw ConfigError("head.kind must be r or m, got '" + cfg.kind + "'");
  if (cfg.hidden_dim < 1 || cfg.n_mem < 1 || cfg.d_k < 1 || cfg.d_v < 1 || cfg.response_dim < 1)
    throw ConfigError("head dimensions must be >= 1");
  if (!(cfg.lr >= 0.0)) throw ConfigError("head.lr must be >= 0");
  if (cfg.epochs < 1) throw ConfigError("head.epochs must be >= 1");
  if (cfg.batch_size < 1) throw ConfigError("head.batch_size must be >= 1");
  if (cfg.val_fraction < 0.0 || cfg.val_fraction >= 1.0)
    throw ConfigError("head.val_fraction must be in [0, 1)");
  if (cfg.patience < 1) throw ConfigError("head.patience must be >= 1");
  if (!(cfg.divergence_threshold > 0.0))
    throw ConfigError("head.divergence_threshold must be > 0");
}

Var hidden_step(Tape& t, Var x_t, Var h_prev, DktParams& p) {
  Var pre = t.add(t.matmul(x_t, t.leaf(p.w_hx)), t.matmul(h_prev, t.leaf(p.w_hh)));
  return t.tanh(t.add_rowvec(pre, t.leaf(p.b_h)));
}

Var output_logits(Tape& t, Var h, DktParams& p) {
  return t.add_rowvec(t.matmul(h, t.leaf(p.w_yh)), t.leaf(p.b_y));
}

// shared forward: logits column for targets 2..T, kind-dispatched
Var seq_logits_impl(Tape& t, PredictorState& s, const Sequence& seq) {
  const int T = static_cast<int>(seq.exercises.size());
  if (T < 2) throw ContractError("a sequence needs >= 2 interactions to form a target");
  if (static_cast<int>(seq.correct.size()) != T)
    throw DimensionError("answer list length mismatches exercise list");
  for (int e : seq.exercises)
    if (e < 0 || e >= s.n_exercises)
      throw LookupError("exercise " + std::to_string(e) + " outside the fused table");
  for (int a : seq.correct)
    if (a != 0 && a != 1) throw DataError("answers must be 0 or 1");

  Var fused_rows = s.cfg.finetune_fused ? t.leaf(s.fused) : t.constant(s.fused.value);
  Var ex_rows = t.gather_rows(fused_rows, seq.exercises);
  Var resp_rows = t.gather_rows(t.leaf(s.response), seq.correct);
  Var x_all = t.concat_cols(ex_rows, resp_rows);

  Var logits{-1};
  if (s.cfg.kind == "r") {
    Var h = t.constant(Matrix::zeros(1, s.dkt.hidden_dim));
    for (int step = 0; step + 1 < T; ++step) {
      h = hidden_step(t, t.gather_rows(x_all, {step}), h, s.dkt);
      Var picked = t.gather_cols(output_logits(t, h, s.dkt), {seq.exercises[step + 1]});
      logits = logits.id < 0 ? picked : t.concat_rows(logits, picked);
    }
  } else {
    Var k_all = t.add_rowvec(t.matmul(ex_rows, t.leaf(s.key_w)), t.leaf(s.key_b));
    Var v_all = t.add_rowvec(t.matmul(x_all, t.leaf(s.val_w)), t.leaf(s.val_b));
    Var m_val = t.leaf(s.dkvmn.m_val0);
    for (int step = 0; step < T; ++step) {
      DkvmnStep out = dkvmn_step(t, t.gather_rows(k_all, {step}), t.gather_rows(v_all, {step}),
                                 m_val, s.dkvmn);
      if (step >= 1) logits = logits.id < 0 ? out.logit : t.concat_rows(logits, out.logit);
      m_val = out.m_val_next;
    }
  }
  return logits;
}

std::vector<Matrix> snapshot(const std::vector<Param*>& params) {
  std::vector<Matrix> out;
  out.reserve(params.size());
  for (Param* p : params) out.push_back(p->value);
  return out;
}

void restore(const std::vector<Param*>& params, const std::vector<Matrix>& snap) {
  for (size_t i = 0; i < params.size(); ++i) params[i]->value = snap[i];
}

}  // namespace

FuseMode fuse_mode_from_string(const std::string& s) {
  if (s == "e2e") return FuseMode::e2e;
  if (s == "c2c") return FuseMode::c2c;
  if (s == "concate") return FuseMode::concate;
  throw ConfigError("fusion mode must be e2e, c2c, or concate, got '" + s + "'");
}

std::string fuse_mode_to_string(FuseMode m) {
  switch (m) {
    case FuseMode::e2e: return "e2e";
    case FuseMode::c2c: return "c2c";
    default: return "concate";
  }
}

FusedTable fuse(const Matrix& e2e, const Matrix& c2c, const Catalog& catalog, FuseMode mode) {
  const int ne = catalog.n_exercises();
  if (e2e.rows != ne) throw LookupError("exercise table does not cover the catalog");
  Matrix mean_c2c = Matrix::zeros(ne, c2c.cols);
  if (mode != FuseMode::e2e) {
    for (int e = 0; e < ne; ++e) {
      const auto& cs = catalog.exercise_concepts[e];
      if (cs.empty()) throw LookupError("exercise " + std::to_string(e) + " has no concepts");
      for (int c : cs) {
        if (c < 0 || c >= c2c.rows)
          throw LookupError("concept " + std::to_string(c) + " outside the concept table");
        for (int j = 0; j < c2c.cols; ++j) mean_c2c.at(e, j) += c2c.at(c, j);
      }
      for (int j = 0; j < c2c.cols; ++j) mean_c2c.at(e, j) /= static_cast<double>(cs.size());
    }
  }

  FusedTable out;
  out.mode = mode;
  if (mode == FuseMode::e2e) {
    out.rows = e2e;
  } else if (mode == FuseMode::c2c) {
    out.rows = std::move(mean_c2c);
  } else {
    out.rows = Matrix::zeros(ne, e2e.cols + c2c.cols);
    for (int i = 0; i < ne; ++i) {
      for (int j = 0; j < e2e.cols; ++j) out.rows.at(i, j) = e2e.at(i, j);
      for (int j = 0; j < c2c.cols; ++j) out.rows.at(i, e2e.cols + j) = mean_c2c.at(i, j);
    }
  }
  return out;
}

DktParams DktParams::init(int input_dim, int hidden_dim, int n_outputs, Rng& rng) {
  if (input_dim < 1 || hidden_dim < 1 || n_outputs < 1)
    throw ConfigError("recurrent head dimensions must be >= 1");
  DktParams p;
  p.input_dim = input_dim;
  p.hidden_dim = hidden_dim;
  p.n_outputs = n_outputs;
  p.w_hx = Param("dkt.w_hx", Matrix::xavier(input_dim, hidden_dim, rng));
  p.w_hh = Param("dkt.w_hh", Matrix::xavier(hidden_dim, hidden_dim, rng));
  p.b_h = Param("dkt.b_h", Matrix::zeros(1, hidden_dim));
  p.w_yh = Param("dkt.w_yh", Matrix::xavier(hidden_dim, n_outputs, rng));
  p.b_y = Param("dkt.b_y", Matrix::zeros(1, n_outputs));
  return p;
}

std::vector<Param*> DktParams::all() { return {&w_hx, &w_hh, &b_h, &w_yh, &b_y}; }

std::pair<Var, Var> dkt_step(Tape& t, Var x_t, Var h_prev, DktParams& p) {
  if (t.val(x_t).cols != p.input_dim || t.val(h_prev).cols != p.hidden_dim)
    throw DimensionError("recurrent step input widths mismatch the parameters");
  Var h = hidden_step(t, x_t, h_prev, p);
  return {h, t.sigmoid(output_logits(t, h, p))};
}

DkvmnParams DkvmnParams::init(int n_mem, int d_k, int d_v, Rng& rng) {
  if (n_mem < 1 || d_k < 1 || d_v < 1) throw ConfigError("memory head dimensions must be >= 1");
  DkvmnParams p;
  p.n_mem = n_mem;
  p.d_k = d_k;
  p.d_v = d_v;
  p.summary_dim = d_k;
  p.m_key = Param("dkvmn.m_key", Matrix::xavier(n_mem, d_k, rng));
  p.m_val0 = Param("dkvmn.m_val0", Matrix::xavier(n_mem, d_v, rng));
  p.erase_w = Param("dkvmn.erase_w", Matrix::xavier(d_v, d_v, rng));
  p.erase_b = Param("dkvmn.erase_b", Matrix::zeros(1, d_v));
  p.add_w = Param("dkvmn.add_w", Matrix::xavier(d_v, d_v, rng));
  p.add_b = Param("dkvmn.add_b", Matrix::zeros(1, d_v));
  p.sum_w = Param("dkvmn.sum_w", Matrix::xavier(d_v + d_k, p.summary_dim, rng));
  p.sum_b = Param("dkvmn.sum_b", Matrix::zeros(1, p.summary_dim));
  p.out_w = Param("dkvmn.out_w", Matrix::xavier(p.summary_dim, 1, rng));
  p.out_b = Param("dkvmn.out_b", Matrix::zeros(1, 1));
  return p;
}

std::vector<Param*> DkvmnParams::all() {
  return {&m_key, &m_val0, &erase_w, &erase_b, &add_w, &add_b, &sum_w, &sum_b, &out_w, &out_b};
}

std::vector<Param*> DkvmnParams::trainable() {
  return {&m_val0, &erase_w, &erase_b, &add_w, &add_b, &sum_w, &sum_b, &out_w, &out_b};
}

DkvmnStep dkvmn_step(Tape& t, Var k_t, Var v_t, Var m_val_prev, DkvmnParams& p) {
  if (t.val(k_t).cols != p.d_k || t.val(v_t).cols != p.d_v ||
      t.val(m_val_prev).rows != p.n_mem || t.val(m_val_prev).cols != p.d_v)
    throw DimensionError("memory step input shapes mismatch the parameters");

  // m_key never trains, so it enters the tape as a constant
  Var key = t.constant(p.m_key.value);
  Var w = t.softmax_rows(t.matmul(k_t, t.transpose(key)));
  Var read = t.matmul(w, m_val_prev);
  Var summary = t.tanh(
      t.add_rowvec(t.matmul(t.concat_cols(read, k_t), t.leaf(p.sum_w)), t.leaf(p.sum_b)));
  Var logit = t.add_rowvec(t.matmul(summary, t.leaf(p.out_w)), t.leaf(p.out_b));

  Var erase = t.sigmoid(t.add_rowvec(t.matmul(v_t, t.leaf(p.erase_w)), t.leaf(p.erase_b)));
  Var add = t.tanh(t.add_rowvec(t.matmul(v_t, t.leaf(p.add_w)), t.leaf(p.add_b)));
  Var w_col = t.transpose(w);
  Var keep = t.sub(t.constant(Matrix::full(p.n_mem, p.d_v, 1.0)), t.matmul(w_col, erase));
  Var m_next = t.add(t.hadamard(m_val_prev, keep), t.matmul(w_col, add));
  return {t.sigmoid(logit), logit, m_next};
}

PredictorState PredictorState::init(const HeadConfig& cfg, const FusedTable& fused, Rng& rng) {
  validate(cfg);
  if (fused.rows.rows < 1 || fused.rows.cols < 1)
    throw ContractError("fused table must be non-empty");

  PredictorState s;
  s.cfg = cfg;
  s.fuse_mode = fused.mode;
  s.n_exercises = fused.rows.rows;
  s.fused_dim = fused.rows.cols;
  s.input_dim = s.fused_dim + cfg.response_dim;
  s.fused = Param("head.fused", fused.rows);
  s.response = Param("head.response", Matrix::xavier(2, cfg.response_dim, rng));
  if (cfg.kind == "r") {
    s.dkt = DktParams::init(s.input_dim, cfg.hidden_dim, s.n_exercises, rng);
  } else {
    s.dkvmn = DkvmnParams::init(cfg.n_mem, cfg.d_k, cfg.d_v, rng);
    s.key_w = Param("head.key_w", Matrix::xavier(s.fused_dim, cfg.d_k, rng));
    s.key_b = Param("head.key_b", Matrix::zeros(1, cfg.d_k));
    s.val_w = Param("head.val_w", Matrix::xavier(s.input_dim, cfg.d_v, rng));
    s.val_b = Param("head.val_b", Matrix::zeros(1, cfg.d_v));
  }
  return s;
}

std::vector<Param*> PredictorState::trainable() {
  std::vector<Param*> out = {&response};
  if (cfg.kind == "r") {
    for (Param* p : dkt.all()) out.push_back(p);
  } else {
    for (Param* p : dkvmn.trainable()) out.push_back(p);
    out.push_back(&key_w);
    out.push_back(&key_b);
    out.push_back(&val_w);
    out.push_back(&val_b);
  }
  if (cfg.finetune_fused) out.push_back(&fused);
  return out;
}

std::vector<Param*> PredictorState::all() {
  std::vector<Param*> out = {&fused, &response};
  if (cfg.kind == "r") {
    for (Param* p : dkt.all()) out.push_back(p);
  } else {
    for (Param* p : dkvmn.all()) out.push_back(p);
    out.push_back(&key_w);
    out.push_back(&key_b);
    out.push_back(&val_w);
    out.push_back(&val_b);
  }
  return out;
}

Var sequence_logits(Tape& t, PredictorState& s, const Sequence& seq) {
  return seq_logits_impl(t, s, seq);
}

uint64_t table_checksum(const Matrix& m) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (double d : m.data) {
    uint64_t bits;
    std::memcpy(&bits, &d, sizeof bits);
    for (int i = 0; i < 8; ++i) {
      h ^= (bits >> (8 * i)) & 0xffu;
      h *= 0x100000001b3ull;
    }
  }
  return h;
}

TrainHeadResult train_head(const std::vector<Sequence>& seqs, const FusedTable& fused,
                           const HeadConfig& cfg) {
  validate(cfg);
  std::vector<const Sequence*> usable;
  for (const Sequence& s : seqs)
    if (s.exercises.size() >= 2) usable.push_back(&s);
  if (usable.empty()) throw DataError("no sequence with >= 2 interactions to train on");

  Rng rng(cfg.seed);
  TrainHeadResult res;
  res.state = PredictorState::init(cfg, fused, rng);
  const uint64_t fused_before = table_checksum(res.state.fused.value);

  // validation split over sequences
  std::vector<int> idx(usable.size());
  for (size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
  Rng split_rng = rng.fork(1);
  split_rng.shuffle(idx);
  const int n_val = static_cast<int>(std::llround(cfg.val_fraction * idx.size()));
  std::vector<int> val_idx(idx.begin(), idx.begin() + n_val);
  std::vector<int> train_idx(idx.begin() + n_val, idx.end());
  if (train_idx.empty()) throw DataError("validation split left no training sequences");

  std::vector<const Sequence*> val_seqs;
  for (int i : val_idx) val_seqs.push_back(usable[i]);
  bool val_has_both = false;
  {
    bool seen0 = false, seen1 = false;
    for (const Sequence* s : val_seqs)
      for (size_t k = 1; k < s->correct.size(); ++k) (s->correct[k] ? seen1 : seen0) = true;
    val_has_both = seen0 && seen1;
  }

  std::vector<Param*> params = res.state.trainable();
  AdamState adam;
  adam.lr = cfg.lr;

  double best_auc = -1.0;
  int best_epoch = 0, since_best = 0;
  std::vector<Matrix> best_params;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    Rng order_rng = rng.fork(2, static_cast<uint64_t>(epoch));
    order_rng.shuffle(train_idx);

    double loss_sum = 0.0;
    int batches = 0;
    for (size_t start = 0; start < train_idx.size(); start += cfg.batch_size) {
      const size_t end = std::min(start + cfg.batch_size, train_idx.size());
      Tape t;
      Var logits{-1};
      std::vector<double> labels;
      for (size_t k = start; k < end; ++k) {
        const Sequence& s = *usable[train_idx[k]];
        Var l = seq_logits_impl(t, res.state, s);
        logits = logits.id < 0 ? l : t.concat_rows(logits, l);
        for (size_t j = 1; j < s.correct.size(); ++j)
          labels.push_back(static_cast<double>(s.correct[j]));
      }
      Matrix targets = Matrix::zeros(static_cast<int>(labels.size()), 1);
      for (size_t j = 0; j < labels.size(); ++j) targets.at(static_cast<int>(j), 0) = labels[j];
      Var loss = t.mean_all(t.bce_with_logits(logits, std::move(targets)));

      const double lv = t.val(loss).at(0, 0);
      if (!std::isfinite(lv) || std::fabs(lv) > cfg.divergence_threshold)
        throw DivergenceError("head loss diverged at epoch " + std::to_string(epoch), epoch);
      loss_sum += lv;
      ++batches;

      for (Param* p : params) p->zero_grad();
      t.backward(loss);
      adam_update(params, adam);
    }

    HeadTraceRow row;
    row.epoch = epoch;
    row.train_loss = batches > 0 ? loss_sum / batches : 0.0;
    row.val_auc = std::numeric_limits<double>::quiet_NaN();

    if (val_has_both) {
      std::vector<double> vs;
      std::vector<int> vl;
      for (const Sequence* s : val_seqs) {
        Tape t;
        Var probs = t.sigmoid(seq_logits_impl(t, res.state, *s));
        const Matrix& pm = t.val(probs);
        for (int j = 0; j < pm.rows; ++j) {
          vs.push_back(pm.at(j, 0));
          vl.push_back(s->correct[j + 1]);
        }
      }
      row.val_auc = auc(vs, vl);
      if (row.val_auc > best_auc) {
        best_auc = row.val_auc;
        best_epoch = epoch;
        since_best = 0;
        best_params = snapshot(params);
      } else {
        ++since_best;
      }
    }

    const auto t1 = std::chrono::steady_clock::now();
    row.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count();
    res.trace.push_back(row);
    if (val_has_both && since_best >= cfg.patience) break;
  }

  if (!best_params.empty()) restore(params, best_params);
  res.best_epoch = val_has_both ? best_epoch : static_cast<int>(res.trace.size());
  res.best_val_auc = val_has_both ? best_auc : std::numeric_limits<double>::quiet_NaN();

  if (!cfg.finetune_fused && table_checksum(res.state.fused.value) != fused_before)
    throw ContractError("frozen fused table changed during head training");
  return res;
}

ScoredTargets score_sequences(PredictorState& s, const std::vector<Sequence>& seqs) {
  ScoredTargets out;
  for (const Sequence& seq : seqs) {
    if (seq.exercises.size() < 2) continue;
    Tape t;
    Var probs = t.sigmoid(seq_logits_impl(t, s, seq));
    const Matrix& pm = t.val(probs);
    for (int j = 0; j < pm.rows; ++j) {
      out.scores.push_back(pm.at(j, 0));
      out.labels.push_back(seq.correct[j + 1]);
    }
  }
  return out;
}

}  // namespace biclkt
