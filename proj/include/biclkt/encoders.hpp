#pragma once

#include <string>
#include <vector>

#include "biclkt/augmentation.hpp"
#include "biclkt/rng.hpp"
#include "biclkt/tape.hpp"

namespace biclkt {

struct EncoderConfig {
  int feature_dim = 32;  // width of the trainable per-exercise feature table
  int hidden_dim = 32;   // width of every convolution layer
  int embed_dim = 32;    // output width after the skip projection
  int layers = 2;
  // concatenate all layer outputs and project; turning this off uses the
  // last layer directly and requires embed_dim == hidden_dim
  bool skip_concat = true;
};

// One graph encoder: a trainable exercise feature table, a stack of
// convolution layers, the skip projection, and a two-layer relu projection
// head for the contrastive space. Node-level and graph-level encoders are
// independent instances.
struct EncoderParams {
  EncoderConfig cfg;
  Param features;              // n_exercises x feature_dim
  std::vector<Param> layer_w;  // feature_dim -> hidden, then hidden -> hidden
  Param skip_w;                // (layers * hidden) x embed, empty when unused
  Param proj_w1, proj_b1;      // embed -> embed
  Param proj_w2, proj_b2;      // embed -> embed

  static EncoderParams init(const EncoderConfig& cfg, int n_exercises,
                            const std::string& name_prefix, Rng& rng);
  std::vector<Param*> all();
  int n_exercises() const { return features.value.rows; }
};

// Feature rows for the view's surviving exercises (masked dimensions
// zeroed), propagated through relu convolutions over the view's normalized
// adjacency, then the skip projection. Returns n x embed_dim.
Var encode_nodes(Tape& t, EncoderParams& p, const GraphView& v);

// Column-sum pooling squashed through a sigmoid; 1 x embed_dim.
Var readout_graph(Tape& t, Var node_embeddings);

// relu(h W1 + b1) W2 + b2 into the contrastive space; not normalized here.
Var project(Tape& t, EncoderParams& p, Var h);

// Embeddings outside any training pass: encode the uncorrupted graph.
Matrix node_embeddings_of(EncoderParams& p, const InfluenceGraph& g);
Matrix graph_embedding_of(EncoderParams& p, const InfluenceGraph& g);

}  // namespace biclkt
