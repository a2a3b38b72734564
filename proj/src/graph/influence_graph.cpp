#include "biclkt/influence_graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <thread>

#include "biclkt/errors.hpp"
#include "biclkt/kv.hpp"

namespace biclkt {
namespace {

bool has_concept(const Interaction& it, int concept_id) {
  return std::binary_search(it.concepts.begin(), it.concepts.end(), concept_id);
}

std::string csv_escape_local(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    out += c;
  }
  out += '"';
  return out;
}

std::vector<std::string> split_simple(const std::string& line) {
  // graph artifacts are written by us and never quote ids with commas
  std::vector<std::string> out;
  std::string cur;
  std::stringstream ss(line);
  while (std::getline(ss, cur, ',')) out.push_back(kv_trim(cur));
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

}  // namespace

int InfluenceGraph::node_pos(int exercise) const {
  auto it = std::lower_bound(nodes.begin(), nodes.end(), exercise);
  if (it == nodes.end() || *it != exercise) return -1;
  return static_cast<int>(it - nodes.begin());
}

CoCounts count_cooccurrences(const Dataset& d, int concept_id, const GraphBuildConfig& cfg) {
  if (concept_id < 0 || concept_id >= static_cast<int>(d.catalog.concepts.size()))
    throw LookupError("unknown concept index " + std::to_string(concept_id));
  CoCounts out;
  out.concept_id = concept_id;
  out.exercises = d.catalog.concept_exercises[concept_id];

  for (const auto& seq : d.by_student) {
    // per-exercise attempt tallies within this concept_id, first attempt first
    std::map<int, std::pair<long long, long long>> tally;  // exercise -> (attempts, correct)
    std::map<int, bool> first_correct;
    for (const auto& it : seq) {
      if (!has_concept(it, concept_id)) continue;
      auto& t = tally[it.exercise];
      if (t.first == 0) first_correct[it.exercise] = it.correct;
      ++t.first;
      if (it.correct) ++t.second;
    }
    if (tally.size() < 2) continue;
    for (auto a = tally.begin(); a != tally.end(); ++a) {
      for (auto b = std::next(a); b != tally.end(); ++b) {
        auto& cell = out.pairs[{a->first, b->first}];
        if (cfg.count_events) {
          cell.first += a->second.first * b->second.first;
          cell.second += a->second.second * b->second.second;
        } else {
          cell.first += 1;
          if (first_correct[a->first] && first_correct[b->first]) cell.second += 1;
        }
      }
    }
  }
  return out;
}

InfluenceGraph build_influence_graph(const CoCounts& counts, const GraphBuildConfig& cfg) {
  if (cfg.subgraph_cap < 1) throw ConfigError("graph.subgraph_cap must be >= 1");
  if (cfg.tau_edge < 0.0) throw ConfigError("graph.tau_edge must be >= 0");

  const std::vector<int>& members = counts.exercises;
  const int m = static_cast<int>(members.size());
  std::map<int, int> pos;
  for (int i = 0; i < m; ++i) pos[members[i]] = i;

  // row denominator: co-answer mass of each exercise against all others
  std::vector<double> denom(m, 0.0);
  for (const auto& [key, val] : counts.pairs) {
    denom[pos.at(key.first)] += static_cast<double>(val.first);
    denom[pos.at(key.second)] += static_cast<double>(val.first);
  }

  struct Edge {
    int src, dst;
    double w;
  };
  std::vector<Edge> edges;
  for (const auto& [key, val] : counts.pairs) {
    const int i = pos.at(key.first), j = pos.at(key.second);
    const double fc = static_cast<double>(val.second);
    const double wij = fc / denom[i];
    const double wji = fc / denom[j];
    if (wij > cfg.tau_edge) edges.push_back({i, j, wij});
    if (wji > cfg.tau_edge) edges.push_back({j, i, wji});
  }

  std::vector<int> keep(m);
  std::iota(keep.begin(), keep.end(), 0);
  if (m > cfg.subgraph_cap) {
    std::vector<double> deg(m, 0.0);
    for (const auto& e : edges) {
      deg[e.src] += e.w;
      deg[e.dst] += e.w;
    }
    std::sort(keep.begin(), keep.end(), [&](int a, int b) {
      if (deg[a] != deg[b]) return deg[a] > deg[b];
      return a < b;
    });
    keep.resize(cfg.subgraph_cap);
    std::sort(keep.begin(), keep.end());
  }

  InfluenceGraph g;
  g.concept_id = counts.concept_id;
  g.nodes.reserve(keep.size());
  std::vector<int> remap(m, -1);
  for (size_t i = 0; i < keep.size(); ++i) {
    remap[keep[i]] = static_cast<int>(i);
    g.nodes.push_back(members[keep[i]]);
  }
  g.weights = Matrix::zeros(static_cast<int>(keep.size()), static_cast<int>(keep.size()));
  for (const auto& e : edges) {
    const int s = remap[e.src], t = remap[e.dst];
    if (s >= 0 && t >= 0) g.weights.at(s, t) = e.w;
  }
  return g;
}

std::vector<InfluenceGraph> build_all_graphs(const Dataset& d, const GraphBuildConfig& cfg,
                                             int threads) {
  const int nc = static_cast<int>(d.catalog.concepts.size());
  std::vector<InfluenceGraph> out(nc);
  auto work = [&](int begin, int stride) {
    for (int c = begin; c < nc; c += stride) {
      out[c] = build_influence_graph(count_cooccurrences(d, c, cfg), cfg);
    }
  };
  if (threads <= 1 || nc <= 1) {
    work(0, 1);
  } else {
    const int nt = std::min(threads, nc);
    std::vector<std::thread> pool;
    pool.reserve(nt);
    for (int t = 0; t < nt; ++t) pool.emplace_back(work, t, nt);
    for (auto& th : pool) th.join();
  }
  return out;
}

Matrix normalize_adjacency(const Matrix& w) {
  if (w.rows != w.cols) throw DimensionError("adjacency must be square, got " + w.shape_str());
  const int n = w.rows;
  Matrix a_hat = Matrix::zeros(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      a_hat.at(i, j) = std::max(w.at(i, j), w.at(j, i));
    }
    a_hat.at(i, i) += 1.0;
  }
  std::vector<double> deg(n);
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += a_hat.at(i, j);
    deg[i] = s;
  }
  // a_hat / sqrt(d_i d_j): one rounding step, so symmetry is exact
  Matrix out = Matrix::zeros(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      out.at(i, j) = a_hat.at(i, j) / std::sqrt(deg[i] * deg[j]);
  return out;
}

Matrix normalize_adjacency(const InfluenceGraph& g) { return normalize_adjacency(g.weights); }

CentralityKind centrality_kind_from(const std::string& name) {
  if (name == "uniform") return CentralityKind::uniform;
  if (name == "degree") return CentralityKind::degree;
  if (name == "pagerank") return CentralityKind::pagerank;
  throw ConfigError("unknown centrality '" + name + "' (uniform, degree, pagerank)");
}

std::string to_string(CentralityKind k) {
  switch (k) {
    case CentralityKind::uniform: return "uniform";
    case CentralityKind::degree: return "degree";
    case CentralityKind::pagerank: return "pagerank";
  }
  return "?";
}

std::vector<double> centrality(const InfluenceGraph& g, CentralityKind kind) {
  const int n = g.n();
  if (n == 0) return {};
  if (kind == CentralityKind::uniform) return std::vector<double>(n, 1.0 / n);
  if (kind == CentralityKind::degree) {
    std::vector<double> deg(n, 0.0);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        deg[i] += g.weights.at(i, j);
        deg[i] += g.weights.at(j, i);
      }
    }
    return deg;
  }

  // pagerank with uniform teleport and dangling mass spread uniformly
  constexpr double kDamping = 0.85;
  constexpr double kTol = 1e-10;
  constexpr int kMaxIters = 1000;
  std::vector<double> out_sum(n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out_sum[i] += g.weights.at(i, j);

  std::vector<double> pr(n, 1.0 / n), next(n);
  for (int iter = 0; iter < kMaxIters; ++iter) {
    double dangling = 0.0;
    for (int i = 0; i < n; ++i)
      if (out_sum[i] == 0.0) dangling += pr[i];
    const double base = (1.0 - kDamping) / n + kDamping * dangling / n;
    std::fill(next.begin(), next.end(), base);
    for (int u = 0; u < n; ++u) {
      if (out_sum[u] == 0.0) continue;
      const double share = kDamping * pr[u] / out_sum[u];
      for (int v = 0; v < n; ++v) {
        const double w = g.weights.at(u, v);
        if (w != 0.0) next[v] += share * w;
      }
    }
    double delta = 0.0;
    for (int i = 0; i < n; ++i) delta = std::max(delta, std::fabs(next[i] - pr[i]));
    pr.swap(next);
    if (delta < kTol) break;
  }
  return pr;
}

void write_graphs(const std::vector<InfluenceGraph>& graphs, const Catalog& cat,
                  std::ostream& edges_out, std::ostream& nodes_out) {
  char buf[64];
  edges_out << "concept_id,src,dst,weight\n";
  nodes_out << "concept_id,exercise\n";
  for (const auto& g : graphs) {
    const std::string& cid = csv_escape_local(cat.concepts.at(g.concept_id));
    for (int i = 0; i < g.n(); ++i)
      nodes_out << cid << ',' << csv_escape_local(cat.exercises.at(g.nodes[i])) << '\n';
    for (int i = 0; i < g.n(); ++i) {
      for (int j = 0; j < g.n(); ++j) {
        const double w = g.weights.at(i, j);
        if (w == 0.0) continue;
        std::snprintf(buf, sizeof buf, "%.17g", w);
        edges_out << cid << ',' << csv_escape_local(cat.exercises.at(g.nodes[i])) << ','
                  << csv_escape_local(cat.exercises.at(g.nodes[j])) << ',' << buf << '\n';
      }
    }
  }
}

std::vector<InfluenceGraph> read_graphs(const Catalog& cat, std::istream& edges_in,
                                        std::istream& nodes_in) {
  auto concept_of = [&](const std::string& id) {
    auto it = cat.concept_index.find(id);
    if (it == cat.concept_index.end()) throw DataError("graph artifact names unknown concept '" + id + "'");
    return it->second;
  };
  auto exercise_of = [&](const std::string& id) {
    auto it = cat.exercise_index.find(id);
    if (it == cat.exercise_index.end()) throw DataError("graph artifact names unknown exercise '" + id + "'");
    return it->second;
  };

  std::string line;
  if (!std::getline(nodes_in, line) || kv_trim(line) != "concept_id,exercise")
    throw DataError("graph nodes artifact missing header");
  std::map<int, std::vector<int>> nodes_by_concept;
  while (std::getline(nodes_in, line)) {
    if (kv_trim(line).empty()) continue;
    auto f = split_simple(line);
    if (f.size() != 2) throw DataError("bad graph nodes row: " + line);
    nodes_by_concept[concept_of(f[0])].push_back(exercise_of(f[1]));
  }

  std::vector<InfluenceGraph> out;
  std::map<int, int> graph_pos;
  for (auto& [c, nodes] : nodes_by_concept) {
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    InfluenceGraph g;
    g.concept_id = c;
    g.nodes = nodes;
    g.weights = Matrix::zeros(g.n(), g.n());
    graph_pos[c] = static_cast<int>(out.size());
    out.push_back(std::move(g));
  }

  if (!std::getline(edges_in, line) || kv_trim(line) != "concept_id,src,dst,weight")
    throw DataError("graph edges artifact missing header");
  while (std::getline(edges_in, line)) {
    if (kv_trim(line).empty()) continue;
    auto f = split_simple(line);
    if (f.size() != 4) throw DataError("bad graph edges row: " + line);
    auto it = graph_pos.find(concept_of(f[0]));
    if (it == graph_pos.end()) throw DataError("edge for concept without nodes: " + line);
    InfluenceGraph& g = out[it->second];
    const int s = g.node_pos(exercise_of(f[1]));
    const int t = g.node_pos(exercise_of(f[2]));
    if (s < 0 || t < 0) throw DataError("edge endpoint not in node list: " + line);
    size_t used = 0;
    const double w = std::stod(f[3], &used);
    if (used != f[3].size() || !(w > 0.0)) throw DataError("bad edge weight: " + line);
    g.weights.at(s, t) = w;
  }
  return out;
}

}  // namespace biclkt
