#include "biclkt/encoders.hpp"

#include <algorithm>

#include "biclkt/errors.hpp"

namespace biclkt {

EncoderParams EncoderParams::init(const EncoderConfig& cfg, int n_exercises,
                                  const std::string& prefix, Rng& rng) {
  if (cfg.feature_dim < 1 || cfg.hidden_dim < 1 || cfg.embed_dim < 1)
    throw ConfigError("encoder dimensions must be >= 1");
  if (cfg.layers < 1) throw ConfigError("encoder.layers must be >= 1");
  if (!cfg.skip_concat && cfg.embed_dim != cfg.hidden_dim)
    throw ConfigError("encoder.skip_concat=false requires embed_dim == hidden_dim");
  if (n_exercises < 1) throw ContractError("encoder needs at least one exercise");

  EncoderParams p;
  p.cfg = cfg;
  p.features = Param(prefix + ".features", Matrix::xavier(n_exercises, cfg.feature_dim, rng));
  p.layer_w.reserve(cfg.layers);
  for (int k = 0; k < cfg.layers; ++k) {
    const int in = k == 0 ? cfg.feature_dim : cfg.hidden_dim;
    p.layer_w.emplace_back(prefix + ".layer" + std::to_string(k + 1),
                           Matrix::xavier(in, cfg.hidden_dim, rng));
  }
  if (cfg.skip_concat)
    p.skip_w = Param(prefix + ".skip", Matrix::xavier(cfg.layers * cfg.hidden_dim, cfg.embed_dim, rng));
  p.proj_w1 = Param(prefix + ".proj_w1", Matrix::xavier(cfg.embed_dim, cfg.embed_dim, rng));
  p.proj_b1 = Param(prefix + ".proj_b1", Matrix::zeros(1, cfg.embed_dim));
  p.proj_w2 = Param(prefix + ".proj_w2", Matrix::xavier(cfg.embed_dim, cfg.embed_dim, rng));
  p.proj_b2 = Param(prefix + ".proj_b2", Matrix::zeros(1, cfg.embed_dim));
  return p;
}

std::vector<Param*> EncoderParams::all() {
  std::vector<Param*> out = {&features};
  for (Param& w : layer_w) out.push_back(&w);
  if (cfg.skip_concat) out.push_back(&skip_w);
  out.push_back(&proj_w1);
  out.push_back(&proj_b1);
  out.push_back(&proj_w2);
  out.push_back(&proj_b2);
  return out;
}

Var encode_nodes(Tape& t, EncoderParams& p, const GraphView& v) {
  if (v.n() < 1) throw ContractError("cannot encode an empty view");
  for (int e : v.exercises)
    if (e < 0 || e >= p.n_exercises()) throw LookupError("view exercise outside feature table");
  if (!v.feature_mask.empty() &&
      static_cast<int>(v.feature_mask.size()) != p.cfg.feature_dim)
    throw DimensionError("feature mask width mismatches feature_dim");

  Var x = t.gather_rows(t.leaf(p.features), v.exercises);
  const bool masked =
      std::find(v.feature_mask.begin(), v.feature_mask.end(), uint8_t{0}) != v.feature_mask.end();
  if (masked) {
    Matrix m = Matrix::zeros(v.n(), p.cfg.feature_dim);
    for (int i = 0; i < v.n(); ++i)
      for (int j = 0; j < p.cfg.feature_dim; ++j) m.at(i, j) = v.feature_mask[j] ? 1.0 : 0.0;
    x = t.hadamard(x, t.constant(std::move(m)));
  }

  Var a = t.constant(normalize_view_adjacency(v));
  std::vector<Var> outs;
  outs.reserve(p.layer_w.size());
  for (Param& w : p.layer_w) {
    x = t.relu(t.matmul(a, t.matmul(x, t.leaf(w))));
    outs.push_back(x);
  }
  if (!p.cfg.skip_concat) return outs.back();
  Var h = outs[0];
  for (size_t k = 1; k < outs.size(); ++k) h = t.concat_cols(h, outs[k]);
  return t.matmul(h, t.leaf(p.skip_w));
}

Var readout_graph(Tape& t, Var node_embeddings) { return t.sigmoid(t.col_sums(node_embeddings)); }

Var project(Tape& t, EncoderParams& p, Var h) {
  Var z = t.relu(t.add_rowvec(t.matmul(h, t.leaf(p.proj_w1)), t.leaf(p.proj_b1)));
  return t.add_rowvec(t.matmul(z, t.leaf(p.proj_w2)), t.leaf(p.proj_b2));
}

Matrix node_embeddings_of(EncoderParams& p, const InfluenceGraph& g) {
  Tape t;
  return t.val(encode_nodes(t, p, identity_view(g, p.cfg.feature_dim)));
}

Matrix graph_embedding_of(EncoderParams& p, const InfluenceGraph& g) {
  // no nodes: pooled sums are zero, so the readout is the 0.5 row
  if (g.n() == 0) return Matrix::full(1, p.cfg.embed_dim, 0.5);
  Tape t;
  return t.val(readout_graph(t, encode_nodes(t, p, identity_view(g, p.cfg.feature_dim))));
}

}  // namespace biclkt
