#include "biclkt/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "biclkt/checkpoint.hpp"
#include "biclkt/contrastive.hpp"
#include "biclkt/dataio.hpp"
#include "biclkt/errors.hpp"
#include "biclkt/evaluation.hpp"
#include "biclkt/influence_graph.hpp"
#include "biclkt/prediction.hpp"
#include "json.hpp"

namespace biclkt {
namespace {

using nlohmann::json;

// Artifact name -> stage that writes it, for actionable missing-input errors.
const std::map<std::string, std::string>& producers() {
  static const std::map<std::string, std::string> m = {
      {"dataset.csv", "synth"},          {"mastery.csv", "synth"},
      {"graphs_nodes.csv", "build-graphs"}, {"graphs_edges.csv", "build-graphs"},
      {"pretrain.ckpt", "pretrain"},     {"pretrain_trace.csv", "pretrain"},
      {"embeddings_e2e.csv", "pretrain"}, {"embeddings_c2c.csv", "pretrain"},
      {"head.ckpt", "train-head"},       {"head_trace.csv", "train-head"},
      {"metrics.csv", "evaluate"},       {"ablation.csv", "ablate"},
      {"ablation_summary.txt", "ablate"}, {"ablation.dat", "ablate"},
  };
  return m;
}

std::string basename_of(const std::string& path) {
  size_t pos = path.find_last_of('/');
  return pos == std::string::npos ? path : path.substr(pos + 1);
}

[[noreturn]] void throw_missing(const std::string& path) {
  std::string name = basename_of(path);
  auto it = producers().find(name);
  if (it == producers().end()) throw ArtifactError("missing artifact '" + path + "'");
  std::string hint = "run " + it->second + " first";
  if (name == "dataset.csv") hint += " (or set data.path and run ingest)";
  throw ArtifactError("missing artifact '" + name + "': " + hint);
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return std::string(buf);
}

long long now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_missing(path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// ---- stage helpers ----

struct StageCtx {
  RunConfig cfg;
  uint64_t fp = 0;
  bool force = false;
  StageReport rep;

  std::string path(const std::string& name) const { return artifact_path(cfg, name); }

  void note_input(const std::string& name) {
    rep.inputs[name] = fingerprint_hex(hash_file(path(name)));
  }

  void write_artifact(const std::string& name, const std::string& stage,
                      const std::string& body) {
    write_text_artifact(path(name), stage, fp, body);
    rep.outputs.push_back(name);
  }

  Dataset load_dataset() {
    // the dataset is the root of the chain: any config may consume it,
    // so its stamp is informative rather than checked
    std::string body = read_text_artifact(path("dataset.csv"), fp, false, force);
    note_input("dataset.csv");
    std::istringstream in(body);
    return parse_log(in);
  }

  std::vector<InfluenceGraph> load_graphs(const Catalog& cat) {
    std::string edges = read_text_artifact(path("graphs_edges.csv"), fp, true, force);
    std::string nodes = read_text_artifact(path("graphs_nodes.csv"), fp, true, force);
    note_input("graphs_edges.csv");
    note_input("graphs_nodes.csv");
    std::istringstream edges_in(edges), nodes_in(nodes);
    return read_graphs(cat, edges_in, nodes_in);
  }

  Matrix load_matrix(const std::string& name) {
    std::string body = read_text_artifact(path(name), fp, true, force);
    note_input(name);
    return matrix_from_csv(body);
  }

  Checkpoint load_ckpt(const std::string& name) {
    if (!std::filesystem::exists(path(name))) throw_missing(path(name));
    Checkpoint c = load_checkpoint(path(name));
    auto it = c.meta.find("config.fingerprint");
    std::string current = fingerprint_hex(fp);
    if (it == c.meta.end())
      throw ArtifactError(name + " carries no config fingerprint");
    if (it->second != current && !force)
      throw ArtifactError(name + " was produced by config " + it->second +
                          " but the current config is " + current + "; re-run " +
                          producers().at(name) + " or pass --force");
    note_input(name);
    return c;
  }

  void save_ckpt(const std::string& name, Checkpoint c, const std::string& stage) {
    c.meta["stage"] = stage;
    c.meta["config.fingerprint"] = fingerprint_hex(fp);
    save_checkpoint(c, path(name));
    rep.outputs.push_back(name);
  }

  StudentSplit split(const Dataset& d) const {
    SplitSpec spec;
    spec.train_fraction = cfg.train_fraction;
    spec.seed = cfg.seed;
    return split_students(d, spec);
  }

  Dataset train_only(const Dataset& d, const StudentSplit& s) const {
    Dataset t;
    t.catalog = d.catalog;
    t.by_student.resize(d.by_student.size());
    for (int id : s.train) t.by_student[id] = d.by_student[id];
    return t;
  }
};

std::string dataset_label(const RunConfig& cfg) {
  if (cfg.data_path.empty()) return "synth";
  std::string b = basename_of(cfg.data_path);
  if (b.size() > 4 && b.substr(b.size() - 4) == ".csv") b = b.substr(0, b.size() - 4);
  return b.empty() ? "data" : b;
}

void stage_ingest(StageCtx& ctx) {
  if (ctx.cfg.data_path.empty())
    throw ConfigError("data.path is required for ingest (or run synth instead)");
  std::ifstream in(ctx.cfg.data_path);
  if (!in) throw DataError("cannot open data.path: " + ctx.cfg.data_path);
  FormatSpec fmt;
  if (!ctx.cfg.data_format.empty()) {
    std::ifstream fin(ctx.cfg.data_format);
    if (!fin) throw ConfigError("cannot open data.format: " + ctx.cfg.data_format);
    fmt = FormatSpec::from_stream(fin);
    ctx.rep.inputs[ctx.cfg.data_format] = fingerprint_hex(hash_file(ctx.cfg.data_format));
  }
  Dataset d = parse_log(in, fmt);
  ctx.rep.inputs[ctx.cfg.data_path] = fingerprint_hex(hash_file(ctx.cfg.data_path));
  std::ostringstream body;
  serialize_log(d, body);
  ctx.write_artifact("dataset.csv", "ingest", body.str());
}

void stage_synth(StageCtx& ctx) {
  SynthResult r = generate_synthetic(ctx.cfg.synth);
  std::ostringstream body;
  serialize_log(r.dataset, body);
  ctx.write_artifact("dataset.csv", "synth", body.str());
  std::ostringstream mastery;
  write_mastery_csv(r, mastery);
  ctx.write_artifact("mastery.csv", "synth", mastery.str());
}

void stage_build_graphs(StageCtx& ctx) {
  Dataset d = ctx.load_dataset();
  StudentSplit s = ctx.split(d);
  Dataset train = ctx.train_only(d, s);
  auto graphs = build_all_graphs(train, ctx.cfg.graph, ctx.cfg.threads);
  std::ostringstream edges, nodes;
  write_graphs(graphs, d.catalog, edges, nodes);
  ctx.write_artifact("graphs_edges.csv", "build-graphs", edges.str());
  ctx.write_artifact("graphs_nodes.csv", "build-graphs", nodes.str());
}

void stage_pretrain(StageCtx& ctx) {
  Dataset d = ctx.load_dataset();
  auto graphs = ctx.load_graphs(d.catalog);
  CentralityKind kind = centrality_kind_from(ctx.cfg.centrality);
  std::vector<std::vector<double>> scores;
  scores.reserve(graphs.size());
  for (const auto& g : graphs) scores.push_back(centrality(g, kind));

  PretrainResult pre = pretrain(graphs, scores, ctx.cfg.encoder, ctx.cfg.aug,
                                ctx.cfg.loss, ctx.cfg.pretrain, d.catalog.n_exercises());

  std::string trace = "epoch,node_loss,graph_loss,joint_loss\n";
  for (const auto& row : pre.trace)
    trace += std::to_string(row.epoch) + "," + fmt17(row.node_loss) + "," +
             fmt17(row.graph_loss) + "," + fmt17(row.joint_loss) + "\n";
  ctx.write_artifact("pretrain_trace.csv", "pretrain", trace);

  Matrix e2e = exercise_embedding_table(pre.node_encoder, graphs, d.catalog.n_exercises());
  Matrix c2c = concept_embedding_table(pre.graph_encoder, graphs);
  ctx.write_artifact("embeddings_e2e.csv", "pretrain", matrix_to_csv(e2e));
  ctx.write_artifact("embeddings_c2c.csv", "pretrain", matrix_to_csv(c2c));

  std::vector<Param*> params = pre.node_encoder.all();
  for (Param* p : pre.graph_encoder.all()) params.push_back(p);
  Checkpoint ckpt = checkpoint_params(params);
  ctx.save_ckpt("pretrain.ckpt", std::move(ckpt), "pretrain");
}

FusedTable load_fused(StageCtx& ctx, const Catalog& cat) {
  Matrix e2e = ctx.load_matrix("embeddings_e2e.csv");
  Matrix c2c = ctx.load_matrix("embeddings_c2c.csv");
  return fuse(e2e, c2c, cat, fuse_mode_from_string(ctx.cfg.fuse_mode));
}

void stage_train_head(StageCtx& ctx) {
  Dataset d = ctx.load_dataset();
  FusedTable fused = load_fused(ctx, d.catalog);
  StudentSplit s = ctx.split(d);
  auto train_seqs = to_sequences(d, s.train, ctx.cfg.max_seq_len);
  TrainHeadResult r = train_head(train_seqs, fused, ctx.cfg.head);

  Checkpoint ckpt = checkpoint_params(r.state.all());
  ckpt.meta["head.kind"] = ctx.cfg.head.kind;
  ckpt.meta["fuse.mode"] = ctx.cfg.fuse_mode;
  ckpt.meta["best_epoch"] = std::to_string(r.best_epoch);
  ckpt.meta["best_val_auc"] = fmt17(r.best_val_auc);
  ctx.save_ckpt("head.ckpt", std::move(ckpt), "train-head");

  std::string trace = "epoch,train_loss,val_auc\n";
  for (const auto& row : r.trace)
    trace += std::to_string(row.epoch) + "," + fmt17(row.train_loss) + "," +
             fmt17(row.val_auc) + "\n";
  ctx.write_artifact("head_trace.csv", "train-head", trace);
}

void stage_evaluate(StageCtx& ctx) {
  Dataset d = ctx.load_dataset();
  FusedTable fused = load_fused(ctx, d.catalog);
  Checkpoint ckpt = ctx.load_ckpt("head.ckpt");
  auto kind_it = ckpt.meta.find("head.kind");
  auto mode_it = ckpt.meta.find("fuse.mode");
  if (!ctx.force) {
    if (kind_it == ckpt.meta.end() || kind_it->second != ctx.cfg.head.kind)
      throw ArtifactError("head.ckpt was trained with a different head.kind; re-run train-head or pass --force");
    if (mode_it == ckpt.meta.end() || mode_it->second != ctx.cfg.fuse_mode)
      throw ArtifactError("head.ckpt was trained with a different head.fuse_mode; re-run train-head or pass --force");
  }
  Rng rng(ctx.cfg.head.seed);
  PredictorState state = PredictorState::init(ctx.cfg.head, fused, rng);
  load_params(ckpt, state.all());

  StudentSplit s = ctx.split(d);
  auto test_seqs = to_sequences(d, s.test, ctx.cfg.max_seq_len);
  ScoredTargets st = score_sequences(state, test_seqs);
  double head_auc = auc(st.scores, st.labels);
  double head_acc = acc(st.scores, st.labels, ctx.cfg.eval_threshold);

  // probe pathway: fused rows of train-attempted exercises, labeled by
  // whether the exercise's train correct-rate clears the median
  int n_ex = d.catalog.n_exercises();
  std::vector<long long> attempts(n_ex, 0), corrects(n_ex, 0);
  for (int id : s.train)
    for (const auto& it : d.by_student[id]) {
      attempts[it.exercise] += 1;
      corrects[it.exercise] += it.correct ? 1 : 0;
    }
  std::vector<int> attempted;
  std::vector<double> rates;
  for (int e = 0; e < n_ex; ++e)
    if (attempts[e] > 0) {
      attempted.push_back(e);
      rates.push_back(double(corrects[e]) / double(attempts[e]));
    }
  double probe_auc = std::numeric_limits<double>::quiet_NaN();
  double probe_acc = std::numeric_limits<double>::quiet_NaN();
  int64_t probe_n = 0;
  if (!attempted.empty()) {
    std::vector<double> sorted = rates;
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
    double median = sorted[sorted.size() / 2];
    Matrix rows(static_cast<int>(attempted.size()), fused.rows.cols);
    std::vector<int> labels(attempted.size());
    for (size_t i = 0; i < attempted.size(); ++i) {
      for (int j = 0; j < fused.rows.cols; ++j)
        rows.at(static_cast<int>(i), j) = fused.rows.at(attempted[i], j);
      labels[i] = rates[i] >= median ? 1 : 0;
    }
    try {
      MetricReport rep = linear_probe(rows, labels, ctx.cfg.probe);
      probe_auc = rep.auc;
      probe_acc = rep.acc;
      probe_n = rep.n_predictions;
    } catch (const MetricError&) {
      // single-class task: probe reported as unavailable
    } catch (const DataError&) {
      // too few rows to split: likewise
    }
  }

  std::string body = "pathway,head,fuse_mode,auc,acc,n_predictions\n";
  body += "head," + ctx.cfg.head.kind + "," + ctx.cfg.fuse_mode + "," +
          fmt17(head_auc) + "," + fmt17(head_acc) + "," +
          std::to_string(st.scores.size()) + "\n";
  body += "probe,-," + ctx.cfg.fuse_mode + "," + fmt17(probe_auc) + "," +
          fmt17(probe_acc) + "," + std::to_string(probe_n) + "\n";
  ctx.write_artifact("metrics.csv", "evaluate", body);
}

void stage_ablate(StageCtx& ctx) {
  Dataset d = ctx.load_dataset();
  AblationConfig abc;
  abc.augs = ctx.cfg.ablate_augs;
  abc.modes = ctx.cfg.ablate_modes;
  abc.heads = ctx.cfg.ablate_heads;
  abc.seeds = ctx.cfg.ablate_seeds;
  abc.test_fraction = ctx.cfg.ablate_test_fraction;
  abc.max_seq_len = ctx.cfg.max_seq_len;
  abc.threads = ctx.cfg.threads;
  abc.graph = ctx.cfg.graph;
  abc.aug = ctx.cfg.aug;
  abc.encoder = ctx.cfg.encoder;
  abc.loss = ctx.cfg.loss;
  abc.pretrain = ctx.cfg.pretrain;
  abc.head = ctx.cfg.head;
  auto rows = run_ablation(d, dataset_label(ctx.cfg), abc);

  ctx.write_artifact("ablation.csv", "ablate", ablation_csv(rows));
  ctx.write_artifact("ablation_summary.txt", "ablate", ablation_summary(rows));

  // gnuplot-friendly dump: '#' comments map cell indices to grid points
  std::string dat = "# columns: cell seed auc acc n_predictions\n";
  std::vector<std::string> cells;
  for (const auto& r : rows) {
    std::string cell = r.aug + " " + r.embed_mode + " " + r.head;
    if (std::find(cells.begin(), cells.end(), cell) == cells.end()) {
      cells.push_back(cell);
      dat += "# cell " + std::to_string(cells.size() - 1) + ": " + cell + "\n";
    }
  }
  for (const auto& r : rows) {
    std::string cell = r.aug + " " + r.embed_mode + " " + r.head;
    size_t idx = std::find(cells.begin(), cells.end(), cell) - cells.begin();
    dat += std::to_string(idx) + " " + std::to_string(r.seed) + " " +
           fmt17(r.report.auc) + " " + fmt17(r.report.acc) + " " +
           std::to_string(r.report.n_predictions) + "\n";
  }
  ctx.write_artifact("ablation.dat", "ablate", dat);
}

void update_manifest(const StageCtx& ctx) {
  std::string path = artifact_path(ctx.cfg, "manifest.json");
  json m = json::object();
  {
    std::ifstream in(path);
    if (in) {
      try {
        in >> m;
      } catch (const json::exception&) {
        m = json::object();
      }
      if (!m.is_object()) m = json::object();
    }
  }
  m["manifest_version"] = 1;
  json e;
  e["fingerprint"] = ctx.rep.fingerprint;
  e["wall_ms"] = ctx.rep.wall_ms;
  e["inputs"] = json::object();
  for (const auto& [k, v] : ctx.rep.inputs) e["inputs"][k] = v;
  e["outputs"] = ctx.rep.outputs;
  m["stages"][ctx.rep.stage] = e;
  std::ofstream out(path);
  if (!out) throw ArtifactError("cannot write manifest: " + path);
  out << m.dump(2) << "\n";
}

}  // namespace

std::string artifact_path(const RunConfig& cfg, const std::string& name) {
  return cfg.out + "/" + name;
}

void write_text_artifact(const std::string& path, const std::string& stage,
                         uint64_t fingerprint, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArtifactError("cannot open for writing: " + path);
  out << "# biclkt-artifact v1 stage=" << stage
      << " fingerprint=" << fingerprint_hex(fingerprint) << "\n"
      << body;
  if (!out) throw ArtifactError("write failed: " + path);
}

std::string read_text_artifact(const std::string& path, uint64_t expect_fp,
                               bool check_fp, bool force) {
  std::string all = slurp(path);
  size_t nl = all.find('\n');
  std::string header = nl == std::string::npos ? all : all.substr(0, nl);
  std::istringstream hs(header);
  std::string mark, tag, ver, stage_kv, fp_kv;
  hs >> mark >> tag >> ver >> stage_kv >> fp_kv;
  std::string name = basename_of(path);
  if (mark != "#" || tag != "biclkt-artifact" || stage_kv.rfind("stage=", 0) != 0 ||
      fp_kv.rfind("fingerprint=", 0) != 0)
    throw ArtifactError(name + " is not a stage artifact (bad header)");
  if (ver != "v1") throw ArtifactError(name + ": unsupported artifact version " + ver);
  std::string got_fp = fp_kv.substr(12);
  if (check_fp && !force && got_fp != fingerprint_hex(expect_fp))
    throw ArtifactError(name + " was produced by config " + got_fp +
                        " but the current config is " + fingerprint_hex(expect_fp) +
                        "; re-run " + stage_kv.substr(6) + " or pass --force");
  return nl == std::string::npos ? std::string() : all.substr(nl + 1);
}

std::string matrix_to_csv(const Matrix& m) {
  std::string out = std::to_string(m.rows) + "," + std::to_string(m.cols) + "\n";
  char buf[40];
  for (int r = 0; r < m.rows; ++r) {
    for (int c = 0; c < m.cols; ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", m.at(r, c));
      if (c) out += ",";
      out += buf;
    }
    out += "\n";
  }
  return out;
}

Matrix matrix_from_csv(const std::string& body) {
  std::istringstream in(body);
  std::string line;
  if (!std::getline(in, line)) throw ArtifactError("matrix artifact is empty");
  int rows = 0, cols = 0;
  if (std::sscanf(line.c_str(), "%d,%d", &rows, &cols) != 2 || rows < 0 || cols < 0)
    throw ArtifactError("matrix artifact has a bad shape line: " + line);
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    if (!std::getline(in, line))
      throw ArtifactError("matrix artifact truncated at row " + std::to_string(r));
    const char* p = line.c_str();
    for (int c = 0; c < cols; ++c) {
      char* end = nullptr;
      double v = std::strtod(p, &end);
      if (end == p)
        throw ArtifactError("matrix artifact has a bad value at row " + std::to_string(r));
      m.at(r, c) = v;
      p = end;
      if (*p == ',') ++p;
    }
  }
  return m;
}

uint64_t hash_file(const std::string& path) {
  std::string bytes = slurp(path);
  return fnv1a64(bytes.data(), bytes.size());
}

StageReport run_stage(const RunConfig& raw, const std::string& stage, bool force) {
  StageCtx ctx;
  ctx.cfg = raw;
  validate_config(ctx.cfg);
  materialize_seeds(ctx.cfg);
  ctx.fp = config_fingerprint(ctx.cfg);
  ctx.force = force;
  ctx.rep.stage = stage;
  ctx.rep.fingerprint = fingerprint_hex(ctx.fp);
  std::filesystem::create_directories(ctx.cfg.out);

  long long t0 = now_ms();
  if (stage == "ingest")
    stage_ingest(ctx);
  else if (stage == "synth")
    stage_synth(ctx);
  else if (stage == "build-graphs")
    stage_build_graphs(ctx);
  else if (stage == "pretrain")
    stage_pretrain(ctx);
  else if (stage == "train-head")
    stage_train_head(ctx);
  else if (stage == "evaluate")
    stage_evaluate(ctx);
  else if (stage == "ablate")
    stage_ablate(ctx);
  else
    throw ConfigError("unknown stage: '" + stage + "'");
  ctx.rep.wall_ms = now_ms() - t0;

  update_manifest(ctx);
  return ctx.rep;
}

std::vector<StageReport> run_pipeline(const RunConfig& cfg, bool force) {
  std::vector<StageReport> reports;
  std::vector<std::string> stages;
  if (!cfg.data_path.empty())
    stages.push_back("ingest");
  else if (!std::filesystem::exists(artifact_path(cfg, "dataset.csv")))
    throw_missing(artifact_path(cfg, "dataset.csv"));
  stages.insert(stages.end(),
                {"build-graphs", "pretrain", "train-head", "evaluate", "ablate"});
  for (const auto& s : stages) reports.push_back(run_stage(cfg, s, force));
  return reports;
}

}  // namespace biclkt
