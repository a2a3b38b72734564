#pragma once

#include <cstdint>
#include <vector>

#include "biclkt/influence_graph.hpp"
#include "biclkt/matrix.hpp"

namespace biclkt {

struct AugmentConfig {
  double p_f = 0.2;     // elimination budget hit exactly at mean importance
  double p_tau = 0.7;   // hard ceiling on any elimination probability
  double p_f1 = 0.2;    // view-1 budget (scales the base probabilities)
  double p_f2 = 0.3;    // view-2 budget
  double p_mask = 0.1;  // per-dimension feature mask probability
  bool drop_nodes = true;
  bool drop_edges = true;
  bool mask_features = true;
  uint64_t seed = 1;
};

// Corrupted copy of an influence graph. node_pos indexes into the source
// graph's node list and stays ascending, so the canonical ordering
// survives augmentation. feature_mask has one keep/zero flag per input
// feature dimension, shared by every node.
struct GraphView {
  int concept_id = -1;
  int view_index = 0;  // 1 or 2; 0 marks the uncorrupted identity view
  std::vector<int> node_pos;
  std::vector<int> exercises;
  Matrix weights;
  std::vector<uint8_t> feature_mask;

  int n() const { return static_cast<int>(node_pos.size()); }
};

// Importance-adaptive elimination probabilities. Scores are mapped through
// s = log(max(score, 1e-12)); a unit at the maximum gets probability 0, a
// unit at the mean gets exactly p_f, lower scores grow linearly, and
// everything is clamped to p_tau. An all-equal population degenerates to
// min(p_f, p_tau) everywhere.
std::vector<double> elimination_probabilities(const std::vector<double>& scores, double p_f,
                                              double p_tau);

// One corrupted view: node drops, edge drops (an edge scores the mean of
// its endpoint scores), and a shared feature-dimension mask. The per-view
// budget p_f{1,2} rescales the base probabilities by p_fv / p_f and
// re-clamps at p_tau. At least one node always survives: after 10 failed
// redraws the highest-scoring node (ties: lowest index) is kept alone.
// The random stream is fully determined by (seed, concept, view, salt).
GraphView make_view(const InfluenceGraph& g, const std::vector<double>& node_scores,
                    const AugmentConfig& cfg, int view_index, int feature_dim, uint64_t salt);

struct ViewPair {
  GraphView first, second;
};
ViewPair make_views(const InfluenceGraph& g, const std::vector<double>& node_scores,
                    const AugmentConfig& cfg, int feature_dim, uint64_t salt);

// The graph itself as a view: every node, every edge, nothing masked.
GraphView identity_view(const InfluenceGraph& g, int feature_dim);

// Symmetric GCN normalization of a view's corrupted weights, same formula
// as normalize_adjacency on a full graph.
Matrix normalize_view_adjacency(const GraphView& v);

}  // namespace biclkt
