#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "biclkt/dataio.hpp"
#include "biclkt/matrix.hpp"

namespace biclkt {

// Symmetric co-answer counts between one concept's exercises. pairs is
// keyed by (i, j) with i < j over dense exercise indices; values are
// (answered-both, both-correct). 0 <= correct <= answered for every pair.
struct CoCounts {
  int concept_id = -1;
  std::vector<int> exercises;  // concept members, ascending
  std::map<std::pair<int, int>, std::pair<long long, long long>> pairs;
};

// Per-concept directed influence graph. Nodes are held in ascending
// exercise order; weights is the dense directed weight matrix aligned to
// that order (entry 0 = no edge). Keeping the canonical order here is what
// makes every downstream reduction independent of input orderings.
struct InfluenceGraph {
  int concept_id = -1;
  std::vector<int> nodes;
  Matrix weights;

  int n() const { return static_cast<int>(nodes.size()); }
  int node_pos(int exercise) const;  // -1 when absent
};

struct GraphBuildConfig {
  double tau_edge = 0.0;  // keep edge iff weight > tau_edge
  int subgraph_cap = 20;  // max nodes per concept graph
  bool count_events = false;  // default counts each student once per pair
};

// In the default student mode, a student contributes one co-answer to each
// pair of member exercises they answered, and one co-correct when the
// (by default first) attempts on both were correct. Event mode multiplies
// attempt counts instead.
CoCounts count_cooccurrences(const Dataset& d, int concept_id, const GraphBuildConfig& cfg = {});

// Edge weight i->j = both-correct(i,j) / sum_m answered-both(i,m); edges
// kept when weight > tau_edge. Graphs larger than the cap keep the
// subgraph_cap nodes with the highest weighted degree (ties: lower
// exercise index). Isolated member exercises remain as nodes.
InfluenceGraph build_influence_graph(const CoCounts& counts, const GraphBuildConfig& cfg = {});

std::vector<InfluenceGraph> build_all_graphs(const Dataset& d, const GraphBuildConfig& cfg = {},
                                             int threads = 1);

// max(W, W^T) symmetrization, self-loops added, then D^-1/2 (A+I) D^-1/2.
// Output is symmetric with entries in [0, 1].
Matrix normalize_adjacency(const Matrix& directed_weights);
Matrix normalize_adjacency(const InfluenceGraph& g);

enum class CentralityKind { uniform, degree, pagerank };
CentralityKind centrality_kind_from(const std::string& name);
std::string to_string(CentralityKind k);

// Node importance on the directed weighted graph. uniform: 1/n. degree:
// weighted in+out degree. pagerank: damping 0.85, dangling mass spread
// uniformly, converged to max-norm < 1e-10 (at most 1000 sweeps).
std::vector<double> centrality(const InfluenceGraph& g, CentralityKind kind);

// artifact round-trip; ids resolved through the catalog
void write_graphs(const std::vector<InfluenceGraph>& graphs, const Catalog& cat,
                  std::ostream& edges_out, std::ostream& nodes_out);
std::vector<InfluenceGraph> read_graphs(const Catalog& cat, std::istream& edges_in,
                                        std::istream& nodes_in);

}  // namespace biclkt
