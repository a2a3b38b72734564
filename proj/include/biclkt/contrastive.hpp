#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "biclkt/augmentation.hpp"
#include "biclkt/encoders.hpp"
#include "biclkt/influence_graph.hpp"
#include "biclkt/tape.hpp"

namespace biclkt {

struct LossConfig {
  std::string kind = "nt_xent";  // or "margin"
  double temperature = 0.5;
  double margin = 1.0;  // margin kind only
  // the printed objective keeps the positive pair out of the denominator;
  // this switches to the standard form that includes it
  bool include_positive_in_denominator = false;
  double lambda = 0.5;  // joint = lambda * node + (1 - lambda) * graph
};

// One contrastive term: rows index the stacked [view1; view2] embedding
// matrix. The anchor attracts its positive and repels every negative.
struct AnchorTerm {
  int anchor_row;
  int positive_row;
  std::vector<int> negative_rows;
};

// Anchors are the nodes surviving in both views, taken from each side in
// turn. Negatives are the anchor's 1-hop neighbors (either edge direction)
// in its own view plus the other view; the union is the same row set for
// both directions. Terms with no negatives are dropped.
std::vector<AnchorTerm> sample_node_pairs(const GraphView& v1, const GraphView& v2);

// Mean contrastive loss over terms against rows of z_combined
// ([view1; view2] stacked, projected, unnormalized; cosine is applied
// inside). Throws ContractError when terms is empty.
Var contrastive_node_loss(Tape& t, Var z_combined, const std::vector<AnchorTerm>& terms,
                          const LossConfig& cfg);

// Batch-level loss between per-graph embeddings z1, z2 (row n of each is
// the same graph under the two views). Negatives for graph n are the other
// graphs' rows of the opposite view; directions 1->2 and 2->1 are averaged.
// Requires at least 2 rows.
Var contrastive_graph_loss(Tape& t, Var z1, Var z2, const LossConfig& cfg);

struct PretrainConfig {
  int epochs = 100;
  int batch_size = 8;  // graphs per optimizer step; batches of 1 are skipped
  double lr = 0.001;
  uint64_t seed = 1;
  double divergence_threshold = 1e6;
};

struct TraceRow {
  int epoch;
  double node_loss, graph_loss, joint_loss;
  long long wall_ms;
};

struct PretrainResult {
  EncoderParams node_encoder;
  EncoderParams graph_encoder;
  std::vector<TraceRow> trace;
};

// Joint two-level contrastive pretraining over per-concept graphs.
// Each optimizer step draws two views per graph (salted by epoch and
// batch), applies the node objective per graph (mean over graphs) and the
// batch-level objective over pooled embeddings, and takes one Adam step on
// both encoders. Throws DivergenceError when the joint loss stops being
// finite or exceeds the threshold.
PretrainResult pretrain(const std::vector<InfluenceGraph>& graphs,
                        const std::vector<std::vector<double>>& node_scores,
                        const EncoderConfig& enc_cfg, const AugmentConfig& aug_cfg,
                        const LossConfig& loss_cfg, const PretrainConfig& pre_cfg,
                        int n_exercises);

// Per-exercise embedding table from the trained node encoder: each graph
// is encoded uncorrupted and a multi-concept exercise averages its rows.
// An exercise in no graph is encoded as a single-node graph so the table
// has no holes.
Matrix exercise_embedding_table(EncoderParams& node_encoder,
                                const std::vector<InfluenceGraph>& graphs, int n_exercises);

// Per-concept embedding table from the trained graph encoder (row = concept).
Matrix concept_embedding_table(EncoderParams& graph_encoder,
                               const std::vector<InfluenceGraph>& graphs);

}  // namespace biclkt
