#include "biclkt/augmentation.hpp"

#include <algorithm>
#include <cmath>

#include "biclkt/errors.hpp"
#include "biclkt/rng.hpp"

namespace biclkt {
namespace {

void validate(const AugmentConfig& cfg) {
  if (!(cfg.p_f > 0.0) || cfg.p_f > 1.0) throw ConfigError("aug.p_f must be in (0, 1]");
  if (cfg.p_tau < 0.0 || cfg.p_tau > 1.0) throw ConfigError("aug.p_tau must be in [0, 1]");
  for (double v : {cfg.p_f1, cfg.p_f2, cfg.p_mask})
    if (v < 0.0 || v > 1.0) throw ConfigError("aug view budgets and p_mask must be in [0, 1]");
}

struct EdgeRef {
  int src, dst;
  double w;
};

std::vector<EdgeRef> list_edges(const Matrix& w) {
  std::vector<EdgeRef> out;
  for (int i = 0; i < w.rows; ++i)
    for (int j = 0; j < w.cols; ++j)
      if (w.at(i, j) != 0.0) out.push_back({i, j, w.at(i, j)});
  return out;
}

}  // namespace

std::vector<double> elimination_probabilities(const std::vector<double>& scores, double p_f,
                                              double p_tau) {
  const size_t n = scores.size();
  std::vector<double> s(n);
  for (size_t i = 0; i < n; ++i) s[i] = std::log(std::max(scores[i], 1e-12));
  double s_max = -HUGE_VAL, mean = 0.0;
  for (double v : s) {
    s_max = std::max(s_max, v);
    mean += v;
  }
  if (n > 0) mean /= static_cast<double>(n);

  std::vector<double> p(n);
  const double spread = s_max - mean;
  for (size_t i = 0; i < n; ++i) {
    // all-equal population has no ranking signal; fall back to the budget
    p[i] = spread == 0.0 ? std::min(p_f, p_tau)
                         : std::min((s_max - s[i]) / spread * p_f, p_tau);
  }
  return p;
}

GraphView make_view(const InfluenceGraph& g, const std::vector<double>& node_scores,
                    const AugmentConfig& cfg, int view_index, int feature_dim, uint64_t salt) {
  validate(cfg);
  if (view_index != 1 && view_index != 2) throw ContractError("view_index must be 1 or 2");
  const int n = g.n();
  if (static_cast<int>(node_scores.size()) != n)
    throw DimensionError("node_scores size mismatches graph node count");
  if (feature_dim < 0) throw ContractError("feature_dim must be >= 0");

  const double budget = view_index == 1 ? cfg.p_f1 : cfg.p_f2;
  const double ratio = budget / cfg.p_f;
  auto scale = [&](std::vector<double>& p) {
    for (double& v : p) v = std::min(v * ratio, cfg.p_tau);
  };

  std::vector<double> node_p = elimination_probabilities(node_scores, cfg.p_f, cfg.p_tau);
  scale(node_p);

  const std::vector<EdgeRef> edges = list_edges(g.weights);
  std::vector<double> edge_scores(edges.size());
  for (size_t e = 0; e < edges.size(); ++e)
    edge_scores[e] = 0.5 * (node_scores[edges[e].src] + node_scores[edges[e].dst]);
  std::vector<double> edge_p = elimination_probabilities(edge_scores, cfg.p_f, cfg.p_tau);
  scale(edge_p);

  Rng rng = Rng(cfg.seed).fork(static_cast<uint64_t>(g.concept_id),
                               static_cast<uint64_t>(view_index), salt);

  // fixed draw order per attempt: nodes, edges, then feature dimensions
  std::vector<uint8_t> keep_node(n, 1), drop_edge(edges.size(), 0);
  std::vector<uint8_t> mask(feature_dim, 1);
  bool any_kept = n == 0 || !cfg.drop_nodes;
  for (int attempt = 0; attempt < 10 && !any_kept; ++attempt) {
    for (int i = 0; i < n; ++i) {
      keep_node[i] = rng.bernoulli(node_p[i]) ? 0 : 1;
      any_kept = any_kept || keep_node[i];
    }
    if (!any_kept && attempt == 9) {
      // keep the single most important node so the view is never empty
      int best = 0;
      for (int i = 1; i < n; ++i)
        if (node_scores[i] > node_scores[best]) best = i;
      keep_node.assign(n, 0);
      keep_node[best] = 1;
      any_kept = true;
    }
  }
  if (cfg.drop_edges)
    for (size_t e = 0; e < edges.size(); ++e) drop_edge[e] = rng.bernoulli(edge_p[e]) ? 1 : 0;
  if (cfg.mask_features)
    for (int d = 0; d < feature_dim; ++d) mask[d] = rng.bernoulli(cfg.p_mask) ? 0 : 1;

  GraphView out;
  out.concept_id = g.concept_id;
  out.view_index = view_index;
  for (int i = 0; i < n; ++i) {
    if (!keep_node[i]) continue;
    out.node_pos.push_back(i);
    out.exercises.push_back(g.nodes[i]);
  }
  const int m = out.n();
  std::vector<int> remap(n, -1);
  for (int i = 0; i < m; ++i) remap[out.node_pos[i]] = i;
  out.weights = Matrix::zeros(m, m);
  for (size_t e = 0; e < edges.size(); ++e) {
    if (drop_edge[e]) continue;
    const int s = remap[edges[e].src], t = remap[edges[e].dst];
    if (s >= 0 && t >= 0) out.weights.at(s, t) = edges[e].w;
  }
  out.feature_mask = std::move(mask);
  return out;
}

ViewPair make_views(const InfluenceGraph& g, const std::vector<double>& node_scores,
                    const AugmentConfig& cfg, int feature_dim, uint64_t salt) {
  return {make_view(g, node_scores, cfg, 1, feature_dim, salt),
          make_view(g, node_scores, cfg, 2, feature_dim, salt)};
}

GraphView identity_view(const InfluenceGraph& g, int feature_dim) {
  GraphView out;
  out.concept_id = g.concept_id;
  out.view_index = 0;
  out.node_pos.resize(g.n());
  for (int i = 0; i < g.n(); ++i) out.node_pos[i] = i;
  out.exercises = g.nodes;
  out.weights = g.weights;
  out.feature_mask.assign(static_cast<size_t>(feature_dim), 1);
  return out;
}

Matrix normalize_view_adjacency(const GraphView& v) { return normalize_adjacency(v.weights); }

}  // namespace biclkt
