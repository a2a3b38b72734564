#include "biclkt/contrastive.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "biclkt/errors.hpp"

namespace biclkt {
namespace {

void validate(const LossConfig& cfg) {
  if (cfg.kind != "nt_xent" && cfg.kind != "margin")
    throw ConfigError("loss.kind must be nt_xent or margin, got '" + cfg.kind + "'");
  if (!(cfg.temperature >= 1e-3))
    throw ConfigError("loss.temperature must be >= 0.001");
  if (cfg.margin < 0.0) throw ConfigError("loss.margin must be >= 0");
  if (cfg.lambda < 0.0 || cfg.lambda > 1.0) throw ConfigError("loss.lambda must be in [0, 1]");
}

// neighbors of position p in a view, either edge direction, excluding p
std::vector<int> view_neighbors(const GraphView& v, int row) {
  std::vector<int> out;
  for (int u = 0; u < v.n(); ++u) {
    if (u == row) continue;
    if (v.weights.at(row, u) != 0.0 || v.weights.at(u, row) != 0.0) out.push_back(u);
  }
  return out;
}

// mean loss over anchor rows of a similarity matrix under 0/1 masks;
// pos_mask selects exactly one entry per row
Var masked_contrastive(Tape& t, Var sim_rows, Matrix pos_mask, Matrix neg_mask,
                       const LossConfig& cfg) {
  const int rows = pos_mask.rows, cols = pos_mask.cols;
  Var pos = t.row_sums(t.hadamard(sim_rows, t.constant(std::move(pos_mask))));
  if (cfg.kind == "nt_xent") {
    Var e = t.exp(t.affine(sim_rows, 1.0 / cfg.temperature, 0.0));
    Var denom = t.row_sums(t.hadamard(e, t.constant(std::move(neg_mask))));
    Var per_term = t.sub(t.log(denom), t.affine(pos, 1.0 / cfg.temperature, 0.0));
    return t.mean_all(per_term);
  }
  // margin hinge, averaged over each row's negatives
  Matrix inv_counts = Matrix::zeros(rows, 1);
  for (int i = 0; i < rows; ++i) {
    double c = 0.0;
    for (int j = 0; j < cols; ++j) c += neg_mask.at(i, j);
    inv_counts.at(i, 0) = 1.0 / c;
  }
  Var shifted = t.add_colvec(sim_rows, t.affine(pos, -1.0, cfg.margin));
  Var hinge = t.hadamard(t.relu(shifted), t.constant(std::move(neg_mask)));
  Var per_term = t.mul_colvec(t.row_sums(hinge), t.constant(std::move(inv_counts)));
  return t.mean_all(per_term);
}

InfluenceGraph singleton_graph(int exercise) {
  InfluenceGraph g;
  g.concept_id = -1;
  g.nodes = {exercise};
  g.weights = Matrix::zeros(1, 1);
  return g;
}

}  // namespace

std::vector<AnchorTerm> sample_node_pairs(const GraphView& v1, const GraphView& v2) {
  const int n1 = v1.n();
  std::vector<AnchorTerm> terms;
  // positions are ascending in both views; walk the intersection
  int i = 0, j = 0;
  while (i < n1 && j < v2.n()) {
    if (v1.node_pos[i] < v2.node_pos[j]) {
      ++i;
    } else if (v1.node_pos[i] > v2.node_pos[j]) {
      ++j;
    } else {
      std::vector<int> negs;
      for (int u : view_neighbors(v1, i)) negs.push_back(u);
      for (int u : view_neighbors(v2, j)) negs.push_back(n1 + u);
      if (!negs.empty()) {
        terms.push_back({i, n1 + j, negs});
        terms.push_back({n1 + j, i, negs});
      }
      ++i;
      ++j;
    }
  }
  return terms;
}

Var contrastive_node_loss(Tape& t, Var z_combined, const std::vector<AnchorTerm>& terms,
                          const LossConfig& cfg) {
  validate(cfg);
  if (terms.empty()) throw ContractError("contrastive loss needs at least one anchor term");
  const int total = t.val(z_combined).rows;
  Var zh = t.normalize_rows(z_combined);
  Var sims = t.matmul(zh, t.transpose(zh));

  std::vector<int> anchor_rows(terms.size());
  Matrix pos_mask = Matrix::zeros(static_cast<int>(terms.size()), total);
  Matrix neg_mask = Matrix::zeros(static_cast<int>(terms.size()), total);
  for (size_t k = 0; k < terms.size(); ++k) {
    const AnchorTerm& term = terms[k];
    anchor_rows[k] = term.anchor_row;
    pos_mask.at(static_cast<int>(k), term.positive_row) = 1.0;
    for (int r : term.negative_rows) neg_mask.at(static_cast<int>(k), r) = 1.0;
    if (cfg.include_positive_in_denominator && cfg.kind == "nt_xent")
      neg_mask.at(static_cast<int>(k), term.positive_row) = 1.0;
  }
  Var rows = t.gather_rows(sims, anchor_rows);
  return masked_contrastive(t, rows, std::move(pos_mask), std::move(neg_mask), cfg);
}

Var contrastive_graph_loss(Tape& t, Var z1, Var z2, const LossConfig& cfg) {
  validate(cfg);
  const int n = t.val(z1).rows;
  if (t.val(z2).rows != n) throw DimensionError("view batches differ in size");
  if (n < 2) throw ContractError("batch-level contrast needs at least 2 graphs");

  Var s = t.matmul(t.normalize_rows(z1), t.transpose(t.normalize_rows(z2)));
  // rows of s are anchors of view 1 against view 2; rows of s^T the reverse
  Var both = t.concat_rows(s, t.transpose(s));
  Matrix pos_mask = Matrix::zeros(2 * n, n);
  Matrix neg_mask = Matrix::zeros(2 * n, n);
  for (int d = 0; d < 2; ++d) {
    for (int i = 0; i < n; ++i) {
      pos_mask.at(d * n + i, i) = 1.0;
      for (int m = 0; m < n; ++m)
        if (m != i) neg_mask.at(d * n + i, m) = 1.0;
      if (cfg.include_positive_in_denominator && cfg.kind == "nt_xent")
        neg_mask.at(d * n + i, i) = 1.0;
    }
  }
  return masked_contrastive(t, both, std::move(pos_mask), std::move(neg_mask), cfg);
}

PretrainResult pretrain(const std::vector<InfluenceGraph>& graphs,
                        const std::vector<std::vector<double>>& node_scores,
                        const EncoderConfig& enc_cfg, const AugmentConfig& aug_cfg,
                        const LossConfig& loss_cfg, const PretrainConfig& pre_cfg,
                        int n_exercises) {
  validate(loss_cfg);
  if (graphs.empty()) throw ContractError("pretraining needs at least one graph");
  if (node_scores.size() != graphs.size())
    throw DimensionError("one score vector per graph required");
  for (size_t i = 0; i < graphs.size(); ++i)
    if (static_cast<int>(node_scores[i].size()) != graphs[i].n())
      throw DimensionError("score vector length mismatches graph " + std::to_string(i));
  if (pre_cfg.epochs < 1) throw ConfigError("pretrain.epochs must be >= 1");
  if (pre_cfg.batch_size < 2) throw ConfigError("pretrain.batch_size must be >= 2");
  if (!(pre_cfg.lr > 0.0)) throw ConfigError("pretrain.lr must be > 0");
  if (!(pre_cfg.divergence_threshold > 0.0))
    throw ConfigError("pretrain.divergence_threshold must be > 0");

  Rng rng(pre_cfg.seed);
  PretrainResult res{EncoderParams::init(enc_cfg, n_exercises, "node", rng),
                     EncoderParams::init(enc_cfg, n_exercises, "graph", rng),
                     {}};
  std::vector<Param*> params = res.node_encoder.all();
  for (Param* p : res.graph_encoder.all()) params.push_back(p);
  AdamState adam;
  adam.lr = pre_cfg.lr;

  const int g_count = static_cast<int>(graphs.size());
  std::vector<int> order(g_count);
  for (int i = 0; i < g_count; ++i) order[i] = i;

  for (int epoch = 1; epoch <= pre_cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    Rng shuffle_rng = Rng(pre_cfg.seed).fork(0x51u, static_cast<uint64_t>(epoch));
    shuffle_rng.shuffle(order);

    double node_sum = 0.0, graph_sum = 0.0, joint_sum = 0.0;
    int steps = 0;
    for (int start = 0, b = 0; start < g_count; start += pre_cfg.batch_size, ++b) {
      const int end = std::min(start + pre_cfg.batch_size, g_count);
      if (end - start < 2) continue;
      const uint64_t salt = (static_cast<uint64_t>(epoch) << 20) ^ static_cast<uint64_t>(b);

      Tape t;
      std::vector<Var> node_losses;
      Var z1_pool{-1}, z2_pool{-1};
      for (int k = start; k < end; ++k) {
        const InfluenceGraph& g = graphs[order[k]];
        ViewPair vp = make_views(g, node_scores[order[k]], aug_cfg, enc_cfg.feature_dim, salt);

        Var h1 = encode_nodes(t, res.node_encoder, vp.first);
        Var h2 = encode_nodes(t, res.node_encoder, vp.second);
        auto terms = sample_node_pairs(vp.first, vp.second);
        if (!terms.empty()) {
          Var z = t.concat_rows(project(t, res.node_encoder, h1),
                                project(t, res.node_encoder, h2));
          node_losses.push_back(contrastive_node_loss(t, z, terms, loss_cfg));
        }

        Var g1 = project(t, res.graph_encoder,
                         readout_graph(t, encode_nodes(t, res.graph_encoder, vp.first)));
        Var g2 = project(t, res.graph_encoder,
                         readout_graph(t, encode_nodes(t, res.graph_encoder, vp.second)));
        z1_pool = z1_pool.id < 0 ? g1 : t.concat_rows(z1_pool, g1);
        z2_pool = z2_pool.id < 0 ? g2 : t.concat_rows(z2_pool, g2);
      }

      Var node_loss;
      if (node_losses.empty()) {
        node_loss = t.constant(Matrix::zeros(1, 1));
      } else {
        node_loss = node_losses[0];
        for (size_t k = 1; k < node_losses.size(); ++k)
          node_loss = t.add(node_loss, node_losses[k]);
        node_loss = t.affine(node_loss, 1.0 / static_cast<double>(node_losses.size()), 0.0);
      }
      Var graph_loss = contrastive_graph_loss(t, z1_pool, z2_pool, loss_cfg);
      Var joint = t.add(t.affine(node_loss, loss_cfg.lambda, 0.0),
                        t.affine(graph_loss, 1.0 - loss_cfg.lambda, 0.0));

      const double jv = t.val(joint).at(0, 0);
      if (!std::isfinite(jv) || std::fabs(jv) > pre_cfg.divergence_threshold)
        throw DivergenceError("joint loss diverged at epoch " + std::to_string(epoch), epoch);

      node_sum += t.val(node_loss).at(0, 0);
      graph_sum += t.val(graph_loss).at(0, 0);
      joint_sum += jv;
      ++steps;

      for (Param* p : params) p->zero_grad();
      t.backward(joint);
      adam_update(params, adam);
    }

    const auto t1 = std::chrono::steady_clock::now();
    const double inv = steps > 0 ? 1.0 / steps : 0.0;
    res.trace.push_back(
        {epoch, node_sum * inv, graph_sum * inv, joint_sum * inv,
         std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count()});
  }
  return res;
}

Matrix exercise_embedding_table(EncoderParams& node_encoder,
                                const std::vector<InfluenceGraph>& graphs, int n_exercises) {
  const int d = node_encoder.cfg.embed_dim;
  Matrix table = Matrix::zeros(n_exercises, d);
  std::vector<int> hits(n_exercises, 0);
  for (const InfluenceGraph& g : graphs) {
    Matrix h = node_embeddings_of(node_encoder, g);
    for (int i = 0; i < g.n(); ++i) {
      const int e = g.nodes[i];
      for (int j = 0; j < d; ++j) table.at(e, j) += h.at(i, j);
      ++hits[e];
    }
  }
  for (int e = 0; e < n_exercises; ++e) {
    if (hits[e] > 1) {
      for (int j = 0; j < d; ++j) table.at(e, j) /= hits[e];
    } else if (hits[e] == 0) {
      // capped out of every graph: encode alone so the row still exists
      InfluenceGraph solo = singleton_graph(e);
      Matrix h = node_embeddings_of(node_encoder, solo);
      for (int j = 0; j < d; ++j) table.at(e, j) = h.at(0, j);
    }
  }
  return table;
}

Matrix concept_embedding_table(EncoderParams& graph_encoder,
                               const std::vector<InfluenceGraph>& graphs) {
  Matrix table = Matrix::zeros(static_cast<int>(graphs.size()), graph_encoder.cfg.embed_dim);
  for (size_t i = 0; i < graphs.size(); ++i) {
    if (graphs[i].concept_id != static_cast<int>(i))
      throw LookupError("graph list must be one graph per concept in order");
    Matrix h = graph_embedding_of(graph_encoder, graphs[i]);
    for (int j = 0; j < h.cols; ++j) table.at(static_cast<int>(i), j) = h.at(0, j);
  }
  return table;
}

}  // namespace biclkt
