#include <cmath>
#include <tuple>
#include <vector>

#include "biclkt/contrastive.hpp"
#include "biclkt/errors.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace biclkt;
using testutil::bit_equal;
using testutil::close;
using testutil::fd_check;

namespace {

InfluenceGraph mk_graph(int concept_id, std::vector<int> nodes,
                        std::vector<std::tuple<int, int, double>> edges) {
  InfluenceGraph g;
  g.concept_id = concept_id;
  g.nodes = std::move(nodes);
  const int n = g.n();
  g.weights = Matrix::zeros(n, n);
  for (auto& [s, d, w] : edges) g.weights.at(s, d) = w;
  return g;
}

// view over an explicit survivor set, edges induced from g, all features kept
GraphView mk_view(const InfluenceGraph& g, std::vector<int> keep_pos, int view_index,
                  int feature_dim) {
  GraphView v;
  v.concept_id = g.concept_id;
  v.view_index = view_index;
  v.node_pos = std::move(keep_pos);
  const int m = static_cast<int>(v.node_pos.size());
  v.exercises.resize(m);
  v.weights = Matrix::zeros(m, m);
  for (int i = 0; i < m; ++i) {
    v.exercises[i] = g.nodes[v.node_pos[i]];
    for (int j = 0; j < m; ++j) v.weights.at(i, j) = g.weights.at(v.node_pos[i], v.node_pos[j]);
  }
  v.feature_mask.assign(feature_dim, 1);
  return v;
}

Matrix rand_rows(int r, int c, uint64_t seed) {
  Rng rng(seed);
  Matrix m = Matrix::zeros(r, c);
  for (double& x : m.data) x = rng.normal(0.0, 1.0);
  return m;
}

Matrix normalize_oracle(const Matrix& z) {
  Matrix out = z;
  for (int i = 0; i < z.rows; ++i) {
    double s = 0.0;
    for (int j = 0; j < z.cols; ++j) s += z.at(i, j) * z.at(i, j);
    double norm = std::sqrt(s);
    for (int j = 0; j < z.cols; ++j) out.at(i, j) /= norm;
  }
  return out;
}

double sim_oracle(const Matrix& zh, int a, int b) {
  double s = 0.0;
  for (int j = 0; j < zh.cols; ++j) s += zh.at(a, j) * zh.at(b, j);
  return s;
}

// plain-loop restatement of the masked loss, nt_xent and margin kinds
double loss_oracle(const Matrix& z, const std::vector<AnchorTerm>& terms, const LossConfig& cfg) {
  Matrix zh = normalize_oracle(z);
  double total = 0.0;
  for (const AnchorTerm& term : terms) {
    double pos = sim_oracle(zh, term.anchor_row, term.positive_row);
    if (cfg.kind == "nt_xent") {
      double denom = 0.0;
      for (int r : term.negative_rows)
        denom += std::exp(sim_oracle(zh, term.anchor_row, r) / cfg.temperature);
      if (cfg.include_positive_in_denominator) denom += std::exp(pos / cfg.temperature);
      total += std::log(denom) - pos / cfg.temperature;
    } else {
      double h = 0.0;
      for (int r : term.negative_rows)
        h += std::max(0.0, sim_oracle(zh, term.anchor_row, r) - pos + cfg.margin);
      total += h / static_cast<double>(term.negative_rows.size());
    }
  }
  return total / static_cast<double>(terms.size());
}

std::vector<AnchorTerm> graph_terms_oracle(int n) {
  std::vector<AnchorTerm> terms;
  // rows 0..n-1 = view 1, rows n..2n-1 = view 2 of a stacked matrix
  for (int dir = 0; dir < 2; ++dir) {
    for (int i = 0; i < n; ++i) {
      AnchorTerm term;
      term.anchor_row = dir == 0 ? i : n + i;
      term.positive_row = dir == 0 ? n + i : i;
      for (int m = 0; m < n; ++m)
        if (m != i) term.negative_rows.push_back(dir == 0 ? n + m : m);
      terms.push_back(term);
    }
  }
  return terms;
}

struct PretrainFixture {
  std::vector<InfluenceGraph> graphs;
  std::vector<std::vector<double>> scores;
  int n_exercises = 0;
};

PretrainFixture small_corpus() {
  PretrainFixture f;
  f.graphs.push_back(mk_graph(0, {0, 1, 2, 3},
                              {{0, 1, 0.6}, {1, 0, 0.4}, {1, 2, 0.5}, {2, 3, 0.7}, {3, 2, 0.2}}));
  f.graphs.push_back(mk_graph(1, {2, 4, 5}, {{0, 1, 0.5}, {1, 2, 0.8}, {2, 0, 0.3}}));
  f.graphs.push_back(mk_graph(2, {1, 5, 6, 7},
                              {{0, 1, 0.9}, {1, 0, 0.1}, {2, 3, 0.4}, {3, 0, 0.6}, {1, 3, 0.3}}));
  f.graphs.push_back(mk_graph(3, {0, 6, 8}, {{0, 1, 0.2}, {1, 2, 0.7}, {0, 2, 0.5}}));
  f.scores = {{1.0, 2.0, 3.0, 4.0}, {2.0, 2.5, 0.5}, {1.5, 3.0, 1.0, 2.0}, {0.5, 1.0, 2.0}};
  f.n_exercises = 9;
  return f;
}

EncoderConfig small_encoder() {
  EncoderConfig cfg;
  cfg.feature_dim = 6;
  cfg.hidden_dim = 5;
  cfg.embed_dim = 5;
  cfg.layers = 2;
  cfg.skip_concat = true;
  return cfg;
}

bool params_equal(std::vector<Param*> a, std::vector<Param*> b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i)
    if (!bit_equal(a[i]->value, b[i]->value)) return false;
  return true;
}

}  // namespace

TEST_CASE("anchor terms pair surviving nodes and pool neighbors from both views") {
  InfluenceGraph g = mk_graph(0, {10, 11, 12, 13}, {{0, 1, 0.5}, {1, 2, 0.5}, {2, 3, 0.5}});
  GraphView v1 = mk_view(g, {0, 1, 2}, 1, 4);
  GraphView v2 = mk_view(g, {1, 2, 3}, 2, 4);

  auto terms = sample_node_pairs(v1, v2);
  REQUIRE(terms.size() == 4);
  // survivors in both views are positions 1 and 2; v1 has 3 rows
  CHECK(terms[0].anchor_row == 1);
  CHECK(terms[0].positive_row == 3);
  CHECK(terms[0].negative_rows == std::vector<int>{0, 2, 4});
  CHECK(terms[1].anchor_row == 3);
  CHECK(terms[1].positive_row == 1);
  CHECK(terms[1].negative_rows == std::vector<int>{0, 2, 4});
  CHECK(terms[2].anchor_row == 2);
  CHECK(terms[2].positive_row == 4);
  CHECK(terms[2].negative_rows == std::vector<int>{1, 3, 5});
  CHECK(terms[3].anchor_row == 4);
  CHECK(terms[3].positive_row == 2);
  CHECK(terms[3].negative_rows == std::vector<int>{1, 3, 5});
}

TEST_CASE("nodes with no neighbor in either view contribute no terms") {
  InfluenceGraph g = mk_graph(0, {20, 21, 22}, {{0, 1, 0.5}});
  GraphView v1 = mk_view(g, {0, 1, 2}, 1, 4);
  GraphView v2 = mk_view(g, {0, 1, 2}, 2, 4);

  auto terms = sample_node_pairs(v1, v2);
  REQUIRE(terms.size() == 4);
  for (const AnchorTerm& term : terms) {
    CHECK(term.anchor_row != 2);
    CHECK(term.anchor_row != 5);
  }
  // edges are direction-agnostic for neighborhood purposes
  CHECK(terms[0].anchor_row == 0);
  CHECK(terms[0].negative_rows == std::vector<int>{1, 4});
}

TEST_CASE("node loss matches a plain-loop restatement") {
  Matrix z = rand_rows(8, 4, 42);
  std::vector<AnchorTerm> terms = {
      {0, 4, {1, 2, 5}}, {4, 0, {1, 2, 5}}, {1, 5, {0, 3, 6, 7}},
      {5, 1, {0, 3, 6, 7}}, {2, 6, {7}}, {3, 7, {0, 1, 2, 4, 5, 6}}};

  LossConfig cfg;
  SUBCASE("temperature softmax form") { cfg.kind = "nt_xent"; }
  SUBCASE("temperature softmax form, positive counted in denominator") {
    cfg.kind = "nt_xent";
    cfg.include_positive_in_denominator = true;
  }
  SUBCASE("hinge form") {
    cfg.kind = "margin";
    cfg.margin = 0.8;
  }
  SUBCASE("hinge form ignores the denominator flag") {
    cfg.kind = "margin";
    cfg.include_positive_in_denominator = true;
  }

  Tape t;
  Var loss = contrastive_node_loss(t, t.constant(z), terms, cfg);
  LossConfig oracle_cfg = cfg;
  if (cfg.kind == "margin") oracle_cfg.include_positive_in_denominator = false;
  CHECK(close(t.val(loss).at(0, 0), loss_oracle(z, terms, oracle_cfg), 1e-10));
}

TEST_CASE("batch loss matches a plain-loop restatement over both directions") {
  const int n = 5;
  Matrix z1 = rand_rows(n, 3, 7);
  Matrix z2 = rand_rows(n, 3, 8);
  Matrix stacked = Matrix::zeros(2 * n, 3);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < 3; ++j) {
      stacked.at(i, j) = z1.at(i, j);
      stacked.at(n + i, j) = z2.at(i, j);
    }

  LossConfig cfg;
  SUBCASE("temperature softmax form") {}
  SUBCASE("positive counted in denominator") { cfg.include_positive_in_denominator = true; }
  SUBCASE("hinge form") { cfg.kind = "margin"; }

  Tape t;
  Var loss = contrastive_graph_loss(t, t.constant(z1), t.constant(z2), cfg);
  CHECK(close(t.val(loss).at(0, 0), loss_oracle(stacked, graph_terms_oracle(n), cfg), 1e-10));
}

TEST_CASE("identical embeddings reduce the loss to log of the negative count") {
  Matrix z = Matrix::zeros(6, 3);
  for (int i = 0; i < 6; ++i) {
    z.at(i, 0) = 1.0;
    z.at(i, 1) = 2.0;
    z.at(i, 2) = -0.5;
  }
  LossConfig cfg;

  SUBCASE("per-node form") {
    std::vector<AnchorTerm> terms = {{0, 3, {1, 2, 4, 5}}, {3, 0, {1, 2, 4, 5}}};
    Tape t;
    CHECK(close(t.val(contrastive_node_loss(t, t.constant(z), terms, cfg)).at(0, 0),
                std::log(4.0), 1e-9));
  }
  SUBCASE("per-node form with the positive included") {
    cfg.include_positive_in_denominator = true;
    std::vector<AnchorTerm> terms = {{0, 3, {1, 2, 4, 5}}, {3, 0, {1, 2, 4, 5}}};
    Tape t;
    CHECK(close(t.val(contrastive_node_loss(t, t.constant(z), terms, cfg)).at(0, 0),
                std::log(5.0), 1e-9));
  }
  SUBCASE("batch form over four graphs") {
    Matrix zv = Matrix::zeros(4, 3);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 3; ++j) zv.at(i, j) = z.at(i, j);
    Tape t;
    CHECK(close(t.val(contrastive_graph_loss(t, t.constant(zv), t.constant(zv), cfg)).at(0, 0),
                std::log(3.0), 1e-9));
  }
  SUBCASE("single negative as similar as the positive gives zero") {
    std::vector<AnchorTerm> terms = {{0, 1, {2}}};
    Tape t;
    CHECK(std::fabs(t.val(contrastive_node_loss(t, t.constant(z), terms, cfg)).at(0, 0)) <
          1e-12);
  }
}

TEST_CASE("loss is bit-exactly invariant to power-of-two row rescaling") {
  Matrix z = rand_rows(6, 5, 99);
  std::vector<AnchorTerm> terms = {{0, 3, {1, 2, 4}}, {3, 0, {1, 2, 4}}, {1, 4, {0, 5}},
                                   {4, 1, {0, 5}}};
  LossConfig cfg;

  double base;
  {
    Tape t;
    base = t.val(contrastive_node_loss(t, t.constant(z), terms, cfg)).at(0, 0);
  }
  Matrix scaled = z;
  for (int j = 0; j < z.cols; ++j) {
    scaled.at(2, j) *= 128.0;
    scaled.at(4, j) *= 0.125;
  }
  Tape t;
  double got = t.val(contrastive_node_loss(t, t.constant(scaled), terms, cfg)).at(0, 0);
  CHECK(got == base);
}

TEST_CASE("loss inputs are validated") {
  Matrix z = rand_rows(4, 3, 5);
  std::vector<AnchorTerm> terms = {{0, 2, {1}}};
  Tape t;

  LossConfig bad_kind;
  bad_kind.kind = "triplet";
  CHECK_THROWS_AS(contrastive_node_loss(t, t.constant(z), terms, bad_kind), ConfigError);

  LossConfig bad_temp;
  bad_temp.temperature = 1e-4;
  CHECK_THROWS_AS(contrastive_node_loss(t, t.constant(z), terms, bad_temp), ConfigError);

  LossConfig bad_margin;
  bad_margin.kind = "margin";
  bad_margin.margin = -0.1;
  CHECK_THROWS_AS(contrastive_node_loss(t, t.constant(z), terms, bad_margin), ConfigError);

  LossConfig bad_lambda;
  bad_lambda.lambda = 1.5;
  CHECK_THROWS_AS(contrastive_node_loss(t, t.constant(z), terms, bad_lambda), ConfigError);

  LossConfig ok;
  CHECK_THROWS_AS(contrastive_node_loss(t, t.constant(z), {}, ok), ContractError);
  CHECK_THROWS_AS(
      contrastive_graph_loss(t, t.constant(rand_rows(1, 3, 1)), t.constant(rand_rows(1, 3, 2)), ok),
      ContractError);
  CHECK_THROWS_AS(
      contrastive_graph_loss(t, t.constant(rand_rows(3, 3, 1)), t.constant(rand_rows(2, 3, 2)), ok),
      DimensionError);
}

TEST_CASE("joint gradient agrees with finite differences") {
  PretrainFixture f = small_corpus();
  EncoderConfig enc_cfg = small_encoder();
  AugmentConfig aug_cfg;
  aug_cfg.seed = 3;
  LossConfig loss_cfg;
  loss_cfg.lambda = 0.3;

  Rng rng(11);
  EncoderParams node_enc = EncoderParams::init(enc_cfg, f.n_exercises, "node", rng);
  EncoderParams graph_enc = EncoderParams::init(enc_cfg, f.n_exercises, "graph", rng);
  std::vector<Param*> params = node_enc.all();
  for (Param* p : graph_enc.all()) params.push_back(p);

  std::vector<ViewPair> views;
  for (size_t i = 0; i < 2; ++i)
    views.push_back(make_views(f.graphs[i], f.scores[i], aug_cfg, enc_cfg.feature_dim, 77));

  auto run = [&](bool with_grad) {
    Tape t;
    std::vector<Var> node_losses;
    Var z1_pool{-1}, z2_pool{-1};
    for (const ViewPair& vp : views) {
      Var h1 = encode_nodes(t, node_enc, vp.first);
      Var h2 = encode_nodes(t, node_enc, vp.second);
      auto terms = sample_node_pairs(vp.first, vp.second);
      if (!terms.empty()) {
        Var z = t.concat_rows(project(t, node_enc, h1), project(t, node_enc, h2));
        node_losses.push_back(contrastive_node_loss(t, z, terms, loss_cfg));
      }
      Var g1 = project(t, graph_enc, readout_graph(t, encode_nodes(t, graph_enc, vp.first)));
      Var g2 = project(t, graph_enc, readout_graph(t, encode_nodes(t, graph_enc, vp.second)));
      z1_pool = z1_pool.id < 0 ? g1 : t.concat_rows(z1_pool, g1);
      z2_pool = z2_pool.id < 0 ? g2 : t.concat_rows(z2_pool, g2);
    }
    REQUIRE(!node_losses.empty());
    Var node_loss = node_losses[0];
    for (size_t k = 1; k < node_losses.size(); ++k) node_loss = t.add(node_loss, node_losses[k]);
    node_loss = t.affine(node_loss, 1.0 / static_cast<double>(node_losses.size()), 0.0);
    Var joint = t.add(t.affine(node_loss, loss_cfg.lambda, 0.0),
                      t.affine(contrastive_graph_loss(t, z1_pool, z2_pool, loss_cfg),
                               1.0 - loss_cfg.lambda, 0.0));
    if (with_grad) {
      for (Param* q : params) q->zero_grad();
      t.backward(joint);
    }
    return t.val(joint).at(0, 0);
  };

  auto rep = fd_check(params, run);
  CHECK(rep.max_rel < 1e-4);
  CHECK(rep.checked > 50);
}

TEST_CASE("pretraining emits one trace row per epoch and is deterministic") {
  PretrainFixture f = small_corpus();
  PretrainConfig pre;
  pre.epochs = 4;
  pre.batch_size = 2;
  pre.seed = 21;
  AugmentConfig aug;
  aug.seed = 21;

  PretrainResult a = pretrain(f.graphs, f.scores, small_encoder(), aug, LossConfig{}, pre,
                              f.n_exercises);
  REQUIRE(a.trace.size() == 4);
  for (int e = 0; e < 4; ++e) {
    CHECK(a.trace[e].epoch == e + 1);
    CHECK(std::isfinite(a.trace[e].joint_loss));
    CHECK(std::isfinite(a.trace[e].node_loss));
    CHECK(std::isfinite(a.trace[e].graph_loss));
    CHECK(a.trace[e].wall_ms >= 0);
  }

  PretrainResult b = pretrain(f.graphs, f.scores, small_encoder(), aug, LossConfig{}, pre,
                              f.n_exercises);
  for (int e = 0; e < 4; ++e) {
    CHECK(a.trace[e].joint_loss == b.trace[e].joint_loss);
    CHECK(a.trace[e].node_loss == b.trace[e].node_loss);
    CHECK(a.trace[e].graph_loss == b.trace[e].graph_loss);
  }
  CHECK(params_equal(a.node_encoder.all(), b.node_encoder.all()));
  CHECK(params_equal(a.graph_encoder.all(), b.graph_encoder.all()));
}

TEST_CASE("a zero mixing weight freezes the corresponding encoder exactly") {
  PretrainFixture f = small_corpus();
  EncoderConfig enc_cfg = small_encoder();
  PretrainConfig pre;
  pre.epochs = 3;
  pre.batch_size = 2;
  pre.seed = 5;
  AugmentConfig aug;
  aug.seed = 5;

  // the run draws its initial parameters from this same stream
  Rng rng(pre.seed);
  EncoderParams init_node = EncoderParams::init(enc_cfg, f.n_exercises, "node", rng);
  EncoderParams init_graph = EncoderParams::init(enc_cfg, f.n_exercises, "graph", rng);

  SUBCASE("node weight zero leaves the node encoder at its initialization") {
    LossConfig cfg;
    cfg.lambda = 0.0;
    PretrainResult r = pretrain(f.graphs, f.scores, enc_cfg, aug, cfg, pre, f.n_exercises);
    CHECK(params_equal(r.node_encoder.all(), init_node.all()));
    CHECK(!params_equal(r.graph_encoder.all(), init_graph.all()));
  }
  SUBCASE("batch weight zero leaves the batch encoder at its initialization") {
    LossConfig cfg;
    cfg.lambda = 1.0;
    PretrainResult r = pretrain(f.graphs, f.scores, enc_cfg, aug, cfg, pre, f.n_exercises);
    CHECK(!params_equal(r.node_encoder.all(), init_node.all()));
    CHECK(params_equal(r.graph_encoder.all(), init_graph.all()));
  }
}

TEST_CASE("pretraining loss decreases on a fixed seed") {
  PretrainFixture f = small_corpus();
  PretrainConfig pre;
  pre.epochs = 40;
  pre.batch_size = 4;
  pre.lr = 0.01;
  pre.seed = 2;
  AugmentConfig aug;
  aug.seed = 2;

  PretrainResult r = pretrain(f.graphs, f.scores, small_encoder(), aug, LossConfig{}, pre,
                              f.n_exercises);
  CHECK(r.trace.back().joint_loss < r.trace.front().joint_loss);
}

TEST_CASE("a tiny divergence threshold aborts with the failing epoch") {
  PretrainFixture f = small_corpus();
  PretrainConfig pre;
  pre.epochs = 2;
  pre.batch_size = 2;
  pre.divergence_threshold = 1e-12;
  AugmentConfig aug;

  try {
    pretrain(f.graphs, f.scores, small_encoder(), aug, LossConfig{}, pre, f.n_exercises);
    FAIL("expected a divergence abort");
  } catch (const DivergenceError& e) {
    CHECK(e.epoch == 1);
  }
}

TEST_CASE("pretraining configuration is validated") {
  PretrainFixture f = small_corpus();
  AugmentConfig aug;
  EncoderConfig enc = small_encoder();

  PretrainConfig bad_epochs;
  bad_epochs.epochs = 0;
  CHECK_THROWS_AS(pretrain(f.graphs, f.scores, enc, aug, LossConfig{}, bad_epochs, f.n_exercises),
                  ConfigError);
  PretrainConfig bad_batch;
  bad_batch.batch_size = 1;
  CHECK_THROWS_AS(pretrain(f.graphs, f.scores, enc, aug, LossConfig{}, bad_batch, f.n_exercises),
                  ConfigError);
  PretrainConfig bad_lr;
  bad_lr.lr = 0.0;
  CHECK_THROWS_AS(pretrain(f.graphs, f.scores, enc, aug, LossConfig{}, bad_lr, f.n_exercises),
                  ConfigError);
  PretrainConfig ok;
  CHECK_THROWS_AS(pretrain({}, {}, enc, aug, LossConfig{}, ok, f.n_exercises), ContractError);
  std::vector<std::vector<double>> short_scores = {{1.0}};
  CHECK_THROWS_AS(pretrain(f.graphs, short_scores, enc, aug, LossConfig{}, ok, f.n_exercises),
                  DimensionError);
}

TEST_CASE("exercise table averages shared nodes and fills capped-out rows") {
  EncoderConfig cfg = small_encoder();
  Rng rng(9);
  EncoderParams enc = EncoderParams::init(cfg, 5, "node", rng);

  std::vector<InfluenceGraph> graphs = {mk_graph(0, {1, 2}, {{0, 1, 0.5}, {1, 0, 0.5}}),
                                        mk_graph(1, {2, 3}, {{0, 1, 0.7}})};
  Matrix table = exercise_embedding_table(enc, graphs, 5);
  REQUIRE(table.rows == 5);
  REQUIRE(table.cols == cfg.embed_dim);

  Matrix h0 = node_embeddings_of(enc, graphs[0]);
  Matrix h1 = node_embeddings_of(enc, graphs[1]);
  for (int j = 0; j < cfg.embed_dim; ++j) {
    CHECK(table.at(1, j) == h0.at(0, j));
    CHECK(table.at(3, j) == h1.at(1, j));
    CHECK(table.at(2, j) == (h0.at(1, j) + h1.at(0, j)) / 2);
  }

  // exercises 0 and 4 appear in no graph; their rows come from a lone-node pass
  InfluenceGraph solo;
  solo.concept_id = -1;
  solo.nodes = {0};
  solo.weights = Matrix::zeros(1, 1);
  Matrix hs = node_embeddings_of(enc, solo);
  for (int j = 0; j < cfg.embed_dim; ++j) CHECK(table.at(0, j) == hs.at(0, j));
}

TEST_CASE("concept table stacks per-graph readouts in concept order") {
  EncoderConfig cfg = small_encoder();
  Rng rng(13);
  EncoderParams enc = EncoderParams::init(cfg, 6, "graph", rng);

  std::vector<InfluenceGraph> graphs = {mk_graph(0, {0, 1}, {{0, 1, 0.4}}),
                                        mk_graph(1, {2, 3, 4}, {{0, 1, 0.5}, {1, 2, 0.6}})};
  Matrix table = concept_embedding_table(enc, graphs);
  REQUIRE(table.rows == 2);
  for (size_t i = 0; i < graphs.size(); ++i) {
    Matrix g = graph_embedding_of(enc, graphs[i]);
    for (int j = 0; j < cfg.embed_dim; ++j) CHECK(table.at(static_cast<int>(i), j) == g.at(0, j));
  }

  std::vector<InfluenceGraph> misordered = {mk_graph(2, {0, 1}, {{0, 1, 0.4}})};
  CHECK_THROWS_AS(concept_embedding_table(enc, misordered), LookupError);
}
