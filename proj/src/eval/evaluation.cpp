#include "biclkt/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <thread>

#include "biclkt/errors.hpp"

namespace biclkt {
namespace {

void check_labels(const std::vector<int>& labels) {
  for (int l : labels)
    if (l != 0 && l != 1) throw DataError("labels must be 0 or 1");
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

}  // namespace

double auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size()) throw DimensionError("scores and labels differ in length");
  check_labels(labels);
  for (double s : scores)
    if (!std::isfinite(s)) throw DataError("scores must be finite");

  long long pos = 0, neg = 0;
  for (int l : labels) (l ? pos : neg)++;
  if (pos == 0 || neg == 0)
    throw MetricError("ranking quality is undefined with a single label class");

  std::vector<int> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) { return scores[a] < scores[b]; });

  // integer win/tie counts over tie groups: exact, order-free
  unsigned long long wins = 0, ties = 0;
  long long neg_seen = 0;
  size_t i = 0;
  while (i < idx.size()) {
    size_t j = i;
    long long group_pos = 0, group_neg = 0;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) {
      (labels[idx[j]] ? group_pos : group_neg)++;
      ++j;
    }
    wins += static_cast<unsigned long long>(group_pos) * static_cast<unsigned long long>(neg_seen);
    ties += static_cast<unsigned long long>(group_pos) * static_cast<unsigned long long>(group_neg);
    neg_seen += group_neg;
    i = j;
  }
  return (static_cast<double>(wins) + 0.5 * static_cast<double>(ties)) /
         (static_cast<double>(pos) * static_cast<double>(neg));
}

double acc(const std::vector<double>& scores, const std::vector<int>& labels, double threshold) {
  if (scores.size() != labels.size()) throw DimensionError("scores and labels differ in length");
  if (scores.empty()) throw ContractError("accuracy over an empty prediction set");
  check_labels(labels);
  long long hits = 0;
  for (size_t i = 0; i < scores.size(); ++i) {
    const int predicted = scores[i] > threshold ? 1 : 0;
    if (predicted == labels[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(scores.size());
}

MetricReport linear_probe(const Matrix& embeddings, const std::vector<int>& labels,
                          const ProbeConfig& cfg) {
  if (embeddings.rows != static_cast<int>(labels.size()))
    throw DimensionError("one label per embedding row required");
  if (embeddings.rows < 2) throw ContractError("probing needs at least 2 rows");
  check_labels(labels);
  if (cfg.epochs < 1 || !(cfg.lr > 0.0) || cfg.l2 < 0.0 || cfg.test_fraction <= 0.0 ||
      cfg.test_fraction >= 1.0)
    throw ConfigError("probe configuration out of range");
  {
    bool seen0 = false, seen1 = false;
    for (int l : labels) (l ? seen1 : seen0) = true;
    if (!seen0 || !seen1) throw MetricError("probe task has a single label class");
  }

  Matrix x = embeddings;
  for (int i = 0; i < x.rows; ++i) {
    double s = 0.0;
    for (int j = 0; j < x.cols; ++j) s += x.at(i, j) * x.at(i, j);
    if (s > 0.0) {
      const double inv = 1.0 / std::sqrt(s);
      for (int j = 0; j < x.cols; ++j) x.at(i, j) *= inv;
    }
  }

  std::vector<int> idx(x.rows);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(cfg.seed);
  rng.shuffle(idx);
  const int n_test = static_cast<int>(std::llround(cfg.test_fraction * x.rows));
  if (n_test == 0 || n_test == x.rows) throw DataError("probe split left an empty side");

  auto slice = [&](int lo, int hi, Matrix& mat, Matrix& tgt, std::vector<int>& lab) {
    mat = Matrix::zeros(hi - lo, x.cols);
    tgt = Matrix::zeros(hi - lo, 1);
    for (int i = lo; i < hi; ++i) {
      for (int j = 0; j < x.cols; ++j) mat.at(i - lo, j) = x.at(idx[i], j);
      tgt.at(i - lo, 0) = labels[idx[i]];
      lab.push_back(labels[idx[i]]);
    }
  };
  Matrix train_x, train_y, test_x, test_y;
  std::vector<int> train_lab, test_lab;
  slice(n_test, x.rows, train_x, train_y, train_lab);
  slice(0, n_test, test_x, test_y, test_lab);

  Param w("probe.w", Matrix::zeros(x.cols, 1));
  Param b("probe.b", Matrix::zeros(1, 1));
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Tape t;
    Var wl = t.leaf(w);
    Var logits = t.add_rowvec(t.matmul(t.constant(train_x), wl), t.leaf(b));
    Var loss = t.add(t.mean_all(t.bce_with_logits(logits, train_y)),
                     t.affine(t.sum_all(t.hadamard(wl, wl)), cfg.l2, 0.0));
    w.zero_grad();
    b.zero_grad();
    t.backward(loss);
    for (int j = 0; j < w.value.rows; ++j) w.value.at(j, 0) -= cfg.lr * w.grad.at(j, 0);
    b.value.at(0, 0) -= cfg.lr * b.grad.at(0, 0);
  }

  std::vector<double> scores(test_x.rows);
  for (int i = 0; i < test_x.rows; ++i) {
    double z = b.value.at(0, 0);
    for (int j = 0; j < test_x.cols; ++j) z += test_x.at(i, j) * w.value.at(j, 0);
    scores[i] = 1.0 / (1.0 + std::exp(-z));
  }

  MetricReport rep;
  rep.auc = auc(scores, test_lab);
  rep.acc = acc(scores, test_lab);
  rep.n_predictions = test_x.rows;
  return rep;
}

namespace {

AblationRow run_cell(const Dataset& d, const std::string& dataset_name,
                     const AblationConfig& cfg, const std::string& aug_kind,
                     const std::string& mode, const std::string& head, uint64_t seed) {
  AblationRow row;
  row.dataset = dataset_name;
  row.aug = aug_kind;
  row.embed_mode = mode;
  row.head = head;
  row.seed = seed;
  try {
    SplitSpec sp;
    sp.train_fraction = 1.0 - cfg.test_fraction;
    sp.seed = seed;
    StudentSplit split = split_students(d, sp);

    // graphs see training students only
    Dataset train_d;
    train_d.catalog = d.catalog;
    train_d.by_student.resize(d.by_student.size());
    for (int st : split.train) train_d.by_student[st] = d.by_student[st];

    std::vector<InfluenceGraph> all_graphs = build_all_graphs(train_d, cfg.graph, 1);
    const CentralityKind ck = centrality_kind_from(aug_kind);
    std::vector<InfluenceGraph> live;
    std::vector<std::vector<double>> scores;
    for (const InfluenceGraph& g : all_graphs) {
      if (g.n() == 0) continue;
      live.push_back(g);
      scores.push_back(centrality(g, ck));
    }
    if (live.empty()) throw DataError("training split produced no non-empty graph");

    PretrainConfig pc = cfg.pretrain;
    pc.seed = seed;
    AugmentConfig ac = cfg.aug;
    ac.seed = seed;
    PretrainResult pr =
        pretrain(live, scores, cfg.encoder, ac, cfg.loss, pc, d.catalog.n_exercises());

    Matrix e2e = exercise_embedding_table(pr.node_encoder, live, d.catalog.n_exercises());
    Matrix c2c = concept_embedding_table(pr.graph_encoder, all_graphs);
    FusedTable fused = fuse(e2e, c2c, d.catalog, fuse_mode_from_string(mode));

    HeadConfig hc = cfg.head;
    hc.kind = head;
    hc.seed = seed;
    TrainHeadResult tr =
        train_head(to_sequences(d, split.train, cfg.max_seq_len), fused, hc);

    ScoredTargets st =
        score_sequences(tr.state, to_sequences(d, split.test, cfg.max_seq_len));
    row.report.auc = auc(st.scores, st.labels);
    row.report.acc = acc(st.scores, st.labels);
    row.report.n_predictions = static_cast<int64_t>(st.scores.size());
  } catch (const std::exception& e) {
    row.failed = true;
    row.error = e.what();
  }
  return row;
}

}  // namespace

std::vector<AblationRow> run_ablation(const Dataset& d, const std::string& dataset_name,
                                      const AblationConfig& cfg) {
  struct Unit {
    std::string aug, mode, head;
    uint64_t seed;
  };
  std::vector<Unit> units;
  for (const std::string& a : cfg.augs)
    for (const std::string& m : cfg.modes)
      for (const std::string& h : cfg.heads)
        for (uint64_t s : cfg.seeds) units.push_back({a, m, h, s});

  std::vector<AblationRow> rows(units.size());
  const int nt = std::max(1, cfg.threads);
  if (nt == 1 || units.size() <= 1) {
    for (size_t i = 0; i < units.size(); ++i)
      rows[i] = run_cell(d, dataset_name, cfg, units[i].aug, units[i].mode, units[i].head,
                         units[i].seed);
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < nt; ++k)
      pool.emplace_back([&, k] {
        for (size_t i = static_cast<size_t>(k); i < units.size(); i += nt)
          rows[i] = run_cell(d, dataset_name, cfg, units[i].aug, units[i].mode, units[i].head,
                             units[i].seed);
      });
    for (std::thread& th : pool) th.join();
  }
  return rows;
}

std::string ablation_csv(const std::vector<AblationRow>& rows) {
  std::ostringstream out;
  out << "dataset,aug,embed_mode,head,seed,auc,acc,n_predictions\n";
  for (const AblationRow& r : rows) {
    out << r.dataset << ',' << r.aug << ',' << r.embed_mode << ',' << r.head << ',' << r.seed
        << ',';
    if (r.failed) {
      out << "nan,nan,0";
    } else {
      out << fmt("%.17g", r.report.auc) << ',' << fmt("%.17g", r.report.acc) << ','
          << r.report.n_predictions;
    }
    out << '\n';
  }
  return out.str();
}

std::string ablation_summary(const std::vector<AblationRow>& rows) {
  struct Cell {
    std::string aug, mode, head;
    std::vector<double> aucs, accs;
    int failures = 0;
  };
  std::vector<Cell> cells;
  for (const AblationRow& r : rows) {
    Cell* c = nullptr;
    for (Cell& k : cells)
      if (k.aug == r.aug && k.mode == r.embed_mode && k.head == r.head) c = &k;
    if (!c) {
      cells.push_back({r.aug, r.embed_mode, r.head, {}, {}, 0});
      c = &cells.back();
    }
    if (r.failed) {
      c->failures++;
    } else {
      c->aucs.push_back(r.report.auc);
      c->accs.push_back(r.report.acc);
    }
  }

  auto mean_std = [](const std::vector<double>& v) -> std::pair<double, double> {
    if (v.empty()) return {std::nan(""), std::nan("")};
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    s = v.size() > 1 ? std::sqrt(s / static_cast<double>(v.size() - 1)) : 0.0;
    return {m, s};
  };

  std::ostringstream out;
  out << "aug        mode      head   seeds   auc              acc              failures\n";
  for (const Cell& c : cells) {
    auto [am, as] = mean_std(c.aucs);
    auto [cm, cs] = mean_std(c.accs);
    char line[160];
    std::snprintf(line, sizeof line, "%-10s %-9s %-6s %5zu   %6.4f +- %6.4f %6.4f +- %6.4f %8d\n",
                  c.aug.c_str(), c.mode.c_str(), c.head.c_str(), c.aucs.size() + c.failures, am,
                  as, cm, cs, c.failures);
    out << line;
  }
  return out.str();
}

}  // namespace biclkt
