#include "biclkt/config.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "biclkt/errors.hpp"
#include "biclkt/kv.hpp"

namespace biclkt {
namespace {

std::string fmt_double(double v) {
  // shortest form that parses back to the same double; canonical because a
  // round-tripping string identifies exactly one value
  char buf[40];
  for (int prec : {6, 12, 17}) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return std::string(buf);
}

double parse_double(const std::string& key, const std::string& s) {
  try {
    size_t used = 0;
    double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError(key + ": not a number: '" + s + "'");
}

long long parse_ll(const std::string& key, const std::string& s) {
  try {
    size_t used = 0;
    long long v = std::stoll(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError(key + ": not an integer: '" + s + "'");
}

int parse_int(const std::string& key, const std::string& s) {
  long long v = parse_ll(key, s);
  if (v < -(1ll << 31) || v >= (1ll << 31))
    throw ConfigError(key + ": out of int range: '" + s + "'");
  return static_cast<int>(v);
}

uint64_t parse_u64(const std::string& key, const std::string& s) {
  try {
    size_t used = 0;
    unsigned long long v = std::stoull(s, &used);
    if (used == s.size() && s[0] != '-') return v;
  } catch (const std::exception&) {
  }
  throw ConfigError(key + ": not a non-negative integer: '" + s + "'");
}

bool parse_bool(const std::string& key, const std::string& s) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw ConfigError(key + ": not a boolean (true/false): '" + s + "'");
}

std::vector<std::string> split_list(const std::string& key, const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::stringstream ss(s);
  while (std::getline(ss, item, ',')) {
    std::string t = kv_trim(item);
    if (t.empty()) throw ConfigError(key + ": empty list item in '" + s + "'");
    out.push_back(t);
  }
  if (out.empty()) throw ConfigError(key + ": empty list");
  return out;
}

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + v[i];
  return out;
}

std::string join_u64(const std::vector<uint64_t>& v) {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i)
    out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

std::vector<ConfigKey> build_schema() {
  std::vector<ConfigKey> s;
  auto add = [&s](std::string key, std::string doc,
                  std::function<void(RunConfig&, const std::string&)> set,
                  std::function<std::string(const RunConfig&)> get) {
    ConfigKey ck;
    ck.key = std::move(key);
    ck.doc = std::move(doc);
    ck.set = std::move(set);
    ck.get = std::move(get);
    ck.def = ck.get(RunConfig{});
    s.push_back(std::move(ck));
  };
  // global
  add("global.seed", "master seed; every stage seed derives from it",
      [](RunConfig& c, const std::string& v) { c.seed = parse_u64("global.seed", v); },
      [](const RunConfig& c) { return std::to_string(c.seed); });
  add("global.out", "output directory for stage artifacts",
      [](RunConfig& c, const std::string& v) { c.out = v; },
      [](const RunConfig& c) { return c.out; });
  add("global.threads", "worker threads for graph building and the ablation sweep",
      [](RunConfig& c, const std::string& v) { c.threads = parse_int("global.threads", v); },
      [](const RunConfig& c) { return std::to_string(c.threads); });

  // data
  add("data.path", "interaction log CSV consumed by ingest (empty: none)",
      [](RunConfig& c, const std::string& v) { c.data_path = v; },
      [](const RunConfig& c) { return c.data_path; });
  add("data.format", "column-mapping spec file for ingest (empty: canonical columns)",
      [](RunConfig& c, const std::string& v) { c.data_format = v; },
      [](const RunConfig& c) { return c.data_format; });
  add("data.train_fraction", "fraction of students in the training split",
      [](RunConfig& c, const std::string& v) {
        c.train_fraction = parse_double("data.train_fraction", v);
      },
      [](const RunConfig& c) { return fmt_double(c.train_fraction); });
  add("data.max_seq_len", "interactions per sequence before a follow-on starts",
      [](RunConfig& c, const std::string& v) {
        c.max_seq_len = parse_int("data.max_seq_len", v);
      },
      [](const RunConfig& c) { return std::to_string(c.max_seq_len); });

  // synth
  add("synth.students", "synthetic cohort size",
      [](RunConfig& c, const std::string& v) {
        c.synth.students = parse_int("synth.students", v);
      },
      [](const RunConfig& c) { return std::to_string(c.synth.students); });
  add("synth.concepts", "synthetic concept count",
      [](RunConfig& c, const std::string& v) {
        c.synth.concepts = parse_int("synth.concepts", v);
      },
      [](const RunConfig& c) { return std::to_string(c.synth.concepts); });
  add("synth.exercises", "synthetic exercise count",
      [](RunConfig& c, const std::string& v) {
        c.synth.exercises = parse_int("synth.exercises", v);
      },
      [](const RunConfig& c) { return std::to_string(c.synth.exercises); });
  add("synth.seq_len", "interactions generated per synthetic student",
      [](RunConfig& c, const std::string& v) {
        c.synth.seq_len = parse_int("synth.seq_len", v);
      },
      [](const RunConfig& c) { return std::to_string(c.synth.seq_len); });
  add("synth.guess", "P(correct) floor from guessing",
      [](RunConfig& c, const std::string& v) { c.synth.guess = parse_double("synth.guess", v); },
      [](const RunConfig& c) { return fmt_double(c.synth.guess); });
  add("synth.slip", "P(incorrect) at full mastery",
      [](RunConfig& c, const std::string& v) { c.synth.slip = parse_double("synth.slip", v); },
      [](const RunConfig& c) { return fmt_double(c.synth.slip); });
  add("synth.learn_rate", "mastery gain per practiced concept",
      [](RunConfig& c, const std::string& v) {
        c.synth.learn_rate = parse_double("synth.learn_rate", v);
      },
      [](const RunConfig& c) { return fmt_double(c.synth.learn_rate); });
  add("synth.init_mastery_lo", "initial mastery range low end",
      [](RunConfig& c, const std::string& v) {
        c.synth.init_mastery_lo = parse_double("synth.init_mastery_lo", v);
      },
      [](const RunConfig& c) { return fmt_double(c.synth.init_mastery_lo); });
  add("synth.init_mastery_hi", "initial mastery range high end",
      [](RunConfig& c, const std::string& v) {
        c.synth.init_mastery_hi = parse_double("synth.init_mastery_hi", v);
      },
      [](const RunConfig& c) { return fmt_double(c.synth.init_mastery_hi); });
  add("synth.difficulty", "within-concept difficulty split magnitude",
      [](RunConfig& c, const std::string& v) {
        c.synth.difficulty = parse_double("synth.difficulty", v);
      },
      [](const RunConfig& c) { return fmt_double(c.synth.difficulty); });
  add("synth.multi_concept_fraction", "fraction of exercises tagged with two concepts",
      [](RunConfig& c, const std::string& v) {
        c.synth.multi_concept_fraction = parse_double("synth.multi_concept_fraction", v);
      },
      [](const RunConfig& c) { return fmt_double(c.synth.multi_concept_fraction); });

  // graph
  add("graph.tau_edge", "keep an edge iff its weight exceeds this",
      [](RunConfig& c, const std::string& v) {
        c.graph.tau_edge = parse_double("graph.tau_edge", v);
      },
      [](const RunConfig& c) { return fmt_double(c.graph.tau_edge); });
  add("graph.subgraph_cap", "max nodes per concept graph (highest weighted degree kept)",
      [](RunConfig& c, const std::string& v) {
        c.graph.subgraph_cap = parse_int("graph.subgraph_cap", v);
      },
      [](const RunConfig& c) { return std::to_string(c.graph.subgraph_cap); });
  add("graph.count_events", "count attempt products instead of one co-answer per student",
      [](RunConfig& c, const std::string& v) {
        c.graph.count_events = parse_bool("graph.count_events", v);
      },
      [](const RunConfig& c) { return c.graph.count_events ? "true" : "false"; });

  // aug
  add("aug.centrality", "node importance: uniform, degree, or pagerank",
      [](RunConfig& c, const std::string& v) { c.centrality = v; },
      [](const RunConfig& c) { return c.centrality; });
  add("aug.p_f", "elimination budget hit exactly at mean importance",
      [](RunConfig& c, const std::string& v) { c.aug.p_f = parse_double("aug.p_f", v); },
      [](const RunConfig& c) { return fmt_double(c.aug.p_f); });
  add("aug.p_tau", "hard ceiling on any elimination probability",
      [](RunConfig& c, const std::string& v) { c.aug.p_tau = parse_double("aug.p_tau", v); },
      [](const RunConfig& c) { return fmt_double(c.aug.p_tau); });
  add("aug.p_f1", "view-1 elimination budget",
      [](RunConfig& c, const std::string& v) { c.aug.p_f1 = parse_double("aug.p_f1", v); },
      [](const RunConfig& c) { return fmt_double(c.aug.p_f1); });
  add("aug.p_f2", "view-2 elimination budget",
      [](RunConfig& c, const std::string& v) { c.aug.p_f2 = parse_double("aug.p_f2", v); },
      [](const RunConfig& c) { return fmt_double(c.aug.p_f2); });
  add("aug.p_mask", "per-dimension feature mask probability",
      [](RunConfig& c, const std::string& v) { c.aug.p_mask = parse_double("aug.p_mask", v); },
      [](const RunConfig& c) { return fmt_double(c.aug.p_mask); });
  add("aug.drop_nodes", "corrupt views by deleting nodes",
      [](RunConfig& c, const std::string& v) {
        c.aug.drop_nodes = parse_bool("aug.drop_nodes", v);
      },
      [](const RunConfig& c) { return c.aug.drop_nodes ? "true" : "false"; });
  add("aug.drop_edges", "corrupt views by deleting edges",
      [](RunConfig& c, const std::string& v) {
        c.aug.drop_edges = parse_bool("aug.drop_edges", v);
      },
      [](const RunConfig& c) { return c.aug.drop_edges ? "true" : "false"; });
  add("aug.mask_features", "corrupt views by masking feature dimensions",
      [](RunConfig& c, const std::string& v) {
        c.aug.mask_features = parse_bool("aug.mask_features", v);
      },
      [](const RunConfig& c) { return c.aug.mask_features ? "true" : "false"; });

  // encoder
  add("encoder.feature_dim", "width of the trainable per-exercise feature table",
      [](RunConfig& c, const std::string& v) {
        c.encoder.feature_dim = parse_int("encoder.feature_dim", v);
      },
      [](const RunConfig& c) { return std::to_string(c.encoder.feature_dim); });
  add("encoder.hidden_dim", "width of every convolution layer",
      [](RunConfig& c, const std::string& v) {
        c.encoder.hidden_dim = parse_int("encoder.hidden_dim", v);
      },
      [](const RunConfig& c) { return std::to_string(c.encoder.hidden_dim); });
  add("encoder.embed_dim", "output width after the skip projection",
      [](RunConfig& c, const std::string& v) {
        c.encoder.embed_dim = parse_int("encoder.embed_dim", v);
      },
      [](const RunConfig& c) { return std::to_string(c.encoder.embed_dim); });
  add("encoder.layers", "convolution layer count",
      [](RunConfig& c, const std::string& v) {
        c.encoder.layers = parse_int("encoder.layers", v);
      },
      [](const RunConfig& c) { return std::to_string(c.encoder.layers); });
  add("encoder.skip_concat", "concatenate all layer outputs before projecting",
      [](RunConfig& c, const std::string& v) {
        c.encoder.skip_concat = parse_bool("encoder.skip_concat", v);
      },
      [](const RunConfig& c) { return c.encoder.skip_concat ? "true" : "false"; });

  // loss
  add("loss.kind", "contrastive objective: nt_xent or margin",
      [](RunConfig& c, const std::string& v) { c.loss.kind = v; },
      [](const RunConfig& c) { return c.loss.kind; });
  add("loss.temperature", "similarity temperature (nt_xent)",
      [](RunConfig& c, const std::string& v) {
        c.loss.temperature = parse_double("loss.temperature", v);
      },
      [](const RunConfig& c) { return fmt_double(c.loss.temperature); });
  add("loss.margin", "hinge margin (margin kind)",
      [](RunConfig& c, const std::string& v) { c.loss.margin = parse_double("loss.margin", v); },
      [](const RunConfig& c) { return fmt_double(c.loss.margin); });
  add("loss.include_positive_in_denominator",
      "use the standard nt_xent denominator instead of the printed one",
      [](RunConfig& c, const std::string& v) {
        c.loss.include_positive_in_denominator =
            parse_bool("loss.include_positive_in_denominator", v);
      },
      [](const RunConfig& c) {
        return c.loss.include_positive_in_denominator ? "true" : "false";
      });
  add("loss.lambda", "joint weight: lambda*node + (1-lambda)*graph",
      [](RunConfig& c, const std::string& v) { c.loss.lambda = parse_double("loss.lambda", v); },
      [](const RunConfig& c) { return fmt_double(c.loss.lambda); });

  // pretrain
  add("pretrain.epochs", "contrastive pretraining epochs",
      [](RunConfig& c, const std::string& v) {
        c.pretrain.epochs = parse_int("pretrain.epochs", v);
      },
      [](const RunConfig& c) { return std::to_string(c.pretrain.epochs); });
  add("pretrain.batch_size", "graphs per optimizer step",
      [](RunConfig& c, const std::string& v) {
        c.pretrain.batch_size = parse_int("pretrain.batch_size", v);
      },
      [](const RunConfig& c) { return std::to_string(c.pretrain.batch_size); });
  add("pretrain.lr", "pretraining learning rate",
      [](RunConfig& c, const std::string& v) { c.pretrain.lr = parse_double("pretrain.lr", v); },
      [](const RunConfig& c) { return fmt_double(c.pretrain.lr); });
  add("pretrain.divergence_threshold", "abort when the joint loss exceeds this",
      [](RunConfig& c, const std::string& v) {
        c.pretrain.divergence_threshold = parse_double("pretrain.divergence_threshold", v);
      },
      [](const RunConfig& c) { return fmt_double(c.pretrain.divergence_threshold); });

  // head
  add("head.kind", "prediction head: r (recurrent) or m (key-value memory)",
      [](RunConfig& c, const std::string& v) { c.head.kind = v; },
      [](const RunConfig& c) { return c.head.kind; });
  add("head.fuse_mode", "embedding table fed to the head: e2e, c2c, or concate",
      [](RunConfig& c, const std::string& v) { c.fuse_mode = v; },
      [](const RunConfig& c) { return c.fuse_mode; });
  add("head.hidden_dim", "recurrent state width (r)",
      [](RunConfig& c, const std::string& v) {
        c.head.hidden_dim = parse_int("head.hidden_dim", v);
      },
      [](const RunConfig& c) { return std::to_string(c.head.hidden_dim); });
  add("head.n_mem", "memory slots (m)",
      [](RunConfig& c, const std::string& v) { c.head.n_mem = parse_int("head.n_mem", v); },
      [](const RunConfig& c) { return std::to_string(c.head.n_mem); });
  add("head.d_k", "key width (m)",
      [](RunConfig& c, const std::string& v) { c.head.d_k = parse_int("head.d_k", v); },
      [](const RunConfig& c) { return std::to_string(c.head.d_k); });
  add("head.d_v", "value width (m)",
      [](RunConfig& c, const std::string& v) { c.head.d_v = parse_int("head.d_v", v); },
      [](const RunConfig& c) { return std::to_string(c.head.d_v); });
  add("head.response_dim", "learned answer embedding width",
      [](RunConfig& c, const std::string& v) {
        c.head.response_dim = parse_int("head.response_dim", v);
      },
      [](const RunConfig& c) { return std::to_string(c.head.response_dim); });
  add("head.lr", "head learning rate",
      [](RunConfig& c, const std::string& v) { c.head.lr = parse_double("head.lr", v); },
      [](const RunConfig& c) { return fmt_double(c.head.lr); });
  add("head.epochs", "head training epochs",
      [](RunConfig& c, const std::string& v) { c.head.epochs = parse_int("head.epochs", v); },
      [](const RunConfig& c) { return std::to_string(c.head.epochs); });
  add("head.batch_size", "sequences per optimizer step",
      [](RunConfig& c, const std::string& v) {
        c.head.batch_size = parse_int("head.batch_size", v);
      },
      [](const RunConfig& c) { return std::to_string(c.head.batch_size); });
  add("head.val_fraction", "training sequences held out for early stopping",
      [](RunConfig& c, const std::string& v) {
        c.head.val_fraction = parse_double("head.val_fraction", v);
      },
      [](const RunConfig& c) { return fmt_double(c.head.val_fraction); });
  add("head.patience", "epochs without val AUC improvement before stopping",
      [](RunConfig& c, const std::string& v) { c.head.patience = parse_int("head.patience", v); },
      [](const RunConfig& c) { return std::to_string(c.head.patience); });
  add("head.divergence_threshold", "abort when the training loss exceeds this",
      [](RunConfig& c, const std::string& v) {
        c.head.divergence_threshold = parse_double("head.divergence_threshold", v);
      },
      [](const RunConfig& c) { return fmt_double(c.head.divergence_threshold); });
  add("head.finetune_fused", "let gradients update the fused embedding table",
      [](RunConfig& c, const std::string& v) {
        c.head.finetune_fused = parse_bool("head.finetune_fused", v);
      },
      [](const RunConfig& c) { return c.head.finetune_fused ? "true" : "false"; });

  // eval
  add("eval.threshold", "accuracy decision threshold",
      [](RunConfig& c, const std::string& v) {
        c.eval_threshold = parse_double("eval.threshold", v);
      },
      [](const RunConfig& c) { return fmt_double(c.eval_threshold); });
  add("eval.probe_lr", "linear probe learning rate",
      [](RunConfig& c, const std::string& v) { c.probe.lr = parse_double("eval.probe_lr", v); },
      [](const RunConfig& c) { return fmt_double(c.probe.lr); });
  add("eval.probe_l2", "linear probe weight decay",
      [](RunConfig& c, const std::string& v) { c.probe.l2 = parse_double("eval.probe_l2", v); },
      [](const RunConfig& c) { return fmt_double(c.probe.l2); });
  add("eval.probe_epochs", "linear probe descent epochs",
      [](RunConfig& c, const std::string& v) {
        c.probe.epochs = parse_int("eval.probe_epochs", v);
      },
      [](const RunConfig& c) { return std::to_string(c.probe.epochs); });
  add("eval.probe_test_fraction", "probe rows held out for metrics",
      [](RunConfig& c, const std::string& v) {
        c.probe.test_fraction = parse_double("eval.probe_test_fraction", v);
      },
      [](const RunConfig& c) { return fmt_double(c.probe.test_fraction); });

  // ablate
  add("ablate.augs", "comma list of centralities to sweep",
      [](RunConfig& c, const std::string& v) { c.ablate_augs = split_list("ablate.augs", v); },
      [](const RunConfig& c) { return join(c.ablate_augs); });
  add("ablate.modes", "comma list of fusion modes to sweep",
      [](RunConfig& c, const std::string& v) { c.ablate_modes = split_list("ablate.modes", v); },
      [](const RunConfig& c) { return join(c.ablate_modes); });
  add("ablate.heads", "comma list of head kinds to sweep",
      [](RunConfig& c, const std::string& v) { c.ablate_heads = split_list("ablate.heads", v); },
      [](const RunConfig& c) { return join(c.ablate_heads); });
  add("ablate.seeds", "comma list of seeds shared by every cell",
      [](RunConfig& c, const std::string& v) {
        c.ablate_seeds.clear();
        for (const auto& item : split_list("ablate.seeds", v))
          c.ablate_seeds.push_back(parse_u64("ablate.seeds", item));
      },
      [](const RunConfig& c) { return join_u64(c.ablate_seeds); });
  add("ablate.test_fraction", "students held out per ablation cell",
      [](RunConfig& c, const std::string& v) {
        c.ablate_test_fraction = parse_double("ablate.test_fraction", v);
      },
      [](const RunConfig& c) { return fmt_double(c.ablate_test_fraction); });

  return s;
}

}  // namespace

const std::vector<ConfigKey>& config_schema() {
  static const std::vector<ConfigKey> schema = build_schema();
  return schema;
}

void config_set(RunConfig& c, const std::string& key, const std::string& value) {
  for (const auto& k : config_schema()) {
    if (k.key == key) {
      k.set(c, value);
      return;
    }
  }
  throw ConfigError("unknown config key: '" + key + "'");
}

RunConfig config_from_kv(const std::map<std::string, std::string>& kv) {
  RunConfig c;
  for (const auto& [k, v] : kv) config_set(c, k, v);
  return c;
}

void apply_env_overrides(RunConfig& c) {
  for (const auto& k : config_schema()) {
    std::string env = "BICLKT_";
    for (char ch : k.key) env += ch == '.' ? '_' : static_cast<char>(std::toupper(ch));
    if (const char* v = std::getenv(env.c_str())) k.set(c, v);
  }
}

RunConfig load_config(const std::string& path) {
  RunConfig c;
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    c = config_from_kv(parse_kv(in));
  }
  apply_env_overrides(c);
  return c;
}

void validate_config(const RunConfig& c) {
  auto bad = [](const std::string& m) { throw ConfigError(m); };
  auto frac01 = [&bad](const std::string& k, double v) {
    if (!(v > 0.0 && v < 1.0)) bad(k + " must be in (0, 1)");
  };
  auto prob = [&bad](const std::string& k, double v) {
    if (!(v >= 0.0 && v <= 1.0)) bad(k + " must be in [0, 1]");
  };
  auto pos = [&bad](const std::string& k, int v) {
    if (v < 1) bad(k + " must be >= 1");
  };

  pos("global.threads", c.threads);
  if (c.out.empty()) bad("global.out must not be empty");
  frac01("data.train_fraction", c.train_fraction);
  if (c.max_seq_len < 2) bad("data.max_seq_len must be >= 2");

  pos("synth.students", c.synth.students);
  pos("synth.concepts", c.synth.concepts);
  pos("synth.exercises", c.synth.exercises);
  pos("synth.seq_len", c.synth.seq_len);
  prob("synth.guess", c.synth.guess);
  prob("synth.slip", c.synth.slip);
  prob("synth.learn_rate", c.synth.learn_rate);
  prob("synth.init_mastery_lo", c.synth.init_mastery_lo);
  prob("synth.init_mastery_hi", c.synth.init_mastery_hi);
  if (c.synth.init_mastery_lo > c.synth.init_mastery_hi)
    bad("synth.init_mastery_lo must not exceed synth.init_mastery_hi");
  prob("synth.multi_concept_fraction", c.synth.multi_concept_fraction);

  if (c.graph.tau_edge < 0.0) bad("graph.tau_edge must be >= 0");
  pos("graph.subgraph_cap", c.graph.subgraph_cap);

  centrality_kind_from(c.centrality);  // throws on unknown
  prob("aug.p_f", c.aug.p_f);
  prob("aug.p_tau", c.aug.p_tau);
  prob("aug.p_f1", c.aug.p_f1);
  prob("aug.p_f2", c.aug.p_f2);
  prob("aug.p_mask", c.aug.p_mask);

  pos("encoder.feature_dim", c.encoder.feature_dim);
  pos("encoder.hidden_dim", c.encoder.hidden_dim);
  pos("encoder.embed_dim", c.encoder.embed_dim);
  pos("encoder.layers", c.encoder.layers);
  if (!c.encoder.skip_concat && c.encoder.embed_dim != c.encoder.hidden_dim)
    bad("encoder.embed_dim must equal encoder.hidden_dim when skip_concat is off");

  if (c.loss.kind != "nt_xent" && c.loss.kind != "margin")
    bad("loss.kind must be nt_xent or margin");
  if (c.loss.temperature < 1e-3) bad("loss.temperature must be >= 0.001");
  if (c.loss.margin < 0.0) bad("loss.margin must be >= 0");
  prob("loss.lambda", c.loss.lambda);

  pos("pretrain.epochs", c.pretrain.epochs);
  if (c.pretrain.batch_size < 2) bad("pretrain.batch_size must be >= 2");
  if (!(c.pretrain.lr > 0.0)) bad("pretrain.lr must be > 0");
  if (!(c.pretrain.divergence_threshold > 0.0))
    bad("pretrain.divergence_threshold must be > 0");

  if (c.head.kind != "r" && c.head.kind != "m") bad("head.kind must be r or m");
  fuse_mode_from_string(c.fuse_mode);  // throws on unknown
  pos("head.hidden_dim", c.head.hidden_dim);
  pos("head.n_mem", c.head.n_mem);
  pos("head.d_k", c.head.d_k);
  pos("head.d_v", c.head.d_v);
  pos("head.response_dim", c.head.response_dim);
  if (!(c.head.lr > 0.0)) bad("head.lr must be > 0");
  pos("head.epochs", c.head.epochs);
  pos("head.batch_size", c.head.batch_size);
  if (!(c.head.val_fraction >= 0.0 && c.head.val_fraction < 1.0))
    bad("head.val_fraction must be in [0, 1)");
  pos("head.patience", c.head.patience);
  if (!(c.head.divergence_threshold > 0.0)) bad("head.divergence_threshold must be > 0");

  prob("eval.threshold", c.eval_threshold);
  if (!(c.probe.lr > 0.0)) bad("eval.probe_lr must be > 0");
  if (c.probe.l2 < 0.0) bad("eval.probe_l2 must be >= 0");
  pos("eval.probe_epochs", c.probe.epochs);
  frac01("eval.probe_test_fraction", c.probe.test_fraction);

  if (c.ablate_augs.empty()) bad("ablate.augs must not be empty");
  for (const auto& a : c.ablate_augs) centrality_kind_from(a);
  if (c.ablate_modes.empty()) bad("ablate.modes must not be empty");
  for (const auto& m : c.ablate_modes) fuse_mode_from_string(m);
  if (c.ablate_heads.empty()) bad("ablate.heads must not be empty");
  for (const auto& h : c.ablate_heads)
    if (h != "r" && h != "m") bad("ablate.heads entries must be r or m");
  if (c.ablate_seeds.empty()) bad("ablate.seeds must not be empty");
  frac01("ablate.test_fraction", c.ablate_test_fraction);
}

void materialize_seeds(RunConfig& c) {
  c.synth.seed = c.seed;
  c.aug.seed = c.seed;
  c.pretrain.seed = c.seed;
  c.head.seed = c.seed;
  c.probe.seed = c.seed;
}

uint64_t fnv1a64(const void* bytes, size_t n) {
  const auto* p = static_cast<const unsigned char*>(bytes);
  uint64_t h = 0xcbf29ce484222325ull;
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

uint64_t config_fingerprint(const RunConfig& c) {
  std::string canon;
  for (const auto& k : config_schema()) canon += k.key + "=" + k.get(c) + "\n";
  return fnv1a64(canon.data(), canon.size());
}

std::string fingerprint_hex(uint64_t fp) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fp));
  return std::string(buf);
}

std::string config_help() {
  std::string out;
  std::string section;
  for (const auto& k : config_schema()) {
    std::string sec = k.key.substr(0, k.key.find('.'));
    if (sec != section) {
      if (!section.empty()) out += "\n";
      section = sec;
    }
    char line[160];
    std::snprintf(line, sizeof line, "  %-34s %-14s %s\n", k.key.c_str(),
                  k.def.empty() ? "(empty)" : k.def.c_str(), k.doc.c_str());
    out += line;
  }
  return out;
}

}  // namespace biclkt
