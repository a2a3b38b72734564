#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "biclkt/dataio.hpp"
#include "biclkt/matrix.hpp"
#include "biclkt/rng.hpp"
#include "biclkt/tape.hpp"

namespace biclkt {

// ---- fused per-exercise embeddings ----

enum class FuseMode { e2e, c2c, concate };

FuseMode fuse_mode_from_string(const std::string& s);
std::string fuse_mode_to_string(FuseMode m);

// rows: one embedding per exercise; dim d, d, or 2d by mode
struct FusedTable {
  FuseMode mode = FuseMode::e2e;
  Matrix rows;
};

// c2c rows of a multi-concept exercise are averaged; concate = [e2e ; mean-c2c]
FusedTable fuse(const Matrix& e2e, const Matrix& c2c, const Catalog& catalog, FuseMode mode);

// ---- recurrent head ----

struct DktParams {
  int input_dim = 0, hidden_dim = 0, n_outputs = 0;
  Param w_hx;  // input x hidden
  Param w_hh;  // hidden x hidden
  Param b_h;   // 1 x hidden
  Param w_yh;  // hidden x outputs
  Param b_y;   // 1 x outputs

  static DktParams init(int input_dim, int hidden_dim, int n_outputs, Rng& rng);
  std::vector<Param*> all();
};

// h_t = tanh(x W_hx + h_prev W_hh + b_h); y_t = sigmoid(h_t W_yh + b_y)
std::pair<Var, Var> dkt_step(Tape& t, Var x_t, Var h_prev, DktParams& p);

// ---- key-value memory head ----

struct DkvmnParams {
  int n_mem = 0, d_k = 0, d_v = 0, summary_dim = 0;
  Param m_key;    // n_mem x d_k, fixed after init, never updated
  Param m_val0;   // n_mem x d_v, trainable initial memory
  Param erase_w;  // d_v x d_v
  Param erase_b;  // 1 x d_v
  Param add_w;    // d_v x d_v
  Param add_b;    // 1 x d_v
  Param sum_w;    // (d_v + d_k) x summary_dim
  Param sum_b;    // 1 x summary_dim
  Param out_w;    // summary_dim x 1
  Param out_b;    // 1 x 1

  static DkvmnParams init(int n_mem, int d_k, int d_v, Rng& rng);
  std::vector<Param*> all();        // includes m_key, for serialization
  std::vector<Param*> trainable();  // excludes m_key
};

struct DkvmnStep {
  Var p;           // 1x1 probability, prediction before the write
  Var logit;       // 1x1 pre-sigmoid form of p, for loss composition
  Var m_val_next;  // n_mem x d_v
};

// attention softmax(M^k k_t), read, summary, predict, then erase/add write
DkvmnStep dkvmn_step(Tape& t, Var k_t, Var v_t, Var m_val_prev, DkvmnParams& p);

// ---- head training over answer sequences ----

struct HeadConfig {
  std::string kind = "r";  // r: recurrent, m: key-value memory
  int hidden_dim = 64;
  int n_mem = 20;
  int d_k = 64;
  int d_v = 64;
  int response_dim = 8;
  double lr = 0.001;
  int epochs = 100;
  int batch_size = 32;
  double val_fraction = 0.2;
  int patience = 10;
  uint64_t seed = 1;
  double divergence_threshold = 1e6;
  bool finetune_fused = false;  // fused rows train only when set
};

struct PredictorState {
  HeadConfig cfg;
  FuseMode fuse_mode = FuseMode::e2e;
  int n_exercises = 0, fused_dim = 0, input_dim = 0;
  Param fused;     // n_exercises x fused_dim, frozen unless cfg.finetune_fused
  Param response;  // 2 x response_dim
  DktParams dkt;   // kind r only
  DkvmnParams dkvmn;            // kind m only
  Param key_w, key_b;           // fused -> d_k, kind m
  Param val_w, val_b;           // input -> d_v, kind m

  static PredictorState init(const HeadConfig& cfg, const FusedTable& fused, Rng& rng);
  std::vector<Param*> trainable();
  std::vector<Param*> all();
};

// logits for targets 2..T of one sequence, as a (T-1)x1 column; the first
// interaction is never a target and every prediction precedes its answer
Var sequence_logits(Tape& t, PredictorState& s, const Sequence& seq);

struct HeadTraceRow {
  int epoch = 0;
  double train_loss = 0.0;
  double val_auc = 0.0;  // NaN when the validation side has a single class
  int64_t wall_ms = 0;
};

struct TrainHeadResult {
  PredictorState state;
  std::vector<HeadTraceRow> trace;
  int best_epoch = 0;
  double best_val_auc = 0.0;
};

// Adam on BCE over next-step targets; early stop on validation AUC with
// best-epoch restore; the fused table checksum must not move unless tuning
TrainHeadResult train_head(const std::vector<Sequence>& seqs, const FusedTable& fused,
                           const HeadConfig& cfg);

struct ScoredTargets {
  std::vector<double> scores;
  std::vector<int> labels;
};

// flat next-step predictions over all sequences, in input order
ScoredTargets score_sequences(PredictorState& s, const std::vector<Sequence>& seqs);

uint64_t table_checksum(const Matrix& m);

}  // namespace biclkt
