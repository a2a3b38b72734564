#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "biclkt/contrastive.hpp"
#include "biclkt/dataio.hpp"
#include "biclkt/evaluation.hpp"
#include "biclkt/influence_graph.hpp"
#include "biclkt/prediction.hpp"

namespace biclkt {

// Whole-run configuration: one flat "section.key = value" file drives every
// stage. Sub-config seeds are not separate keys; materialization copies the
// global seed into each of them so one knob reruns everything.
struct RunConfig {
  uint64_t seed = 1;
  std::string out = "out";
  int threads = 1;

  std::string data_path;    // interaction log CSV for ingest
  std::string data_format;  // optional column-mapping spec file
  double train_fraction = 0.8;
  int max_seq_len = 200;

  SynthConfig synth;
  GraphBuildConfig graph;
  std::string centrality = "pagerank";
  AugmentConfig aug;
  EncoderConfig encoder;
  LossConfig loss;
  PretrainConfig pretrain;
  HeadConfig head;
  std::string fuse_mode = "concate";

  double eval_threshold = 0.5;
  ProbeConfig probe;

  std::vector<std::string> ablate_augs = {"pagerank"};
  std::vector<std::string> ablate_modes = {"e2e", "c2c", "concate"};
  std::vector<std::string> ablate_heads = {"r"};
  std::vector<uint64_t> ablate_seeds = {1, 2, 3, 4, 5};
  double ablate_test_fraction = 0.2;
};

// One registered key: canonical name, default, doc line, and typed
// accessors. The registry is the single source of truth for parsing,
// --help, and the fingerprint.
struct ConfigKey {
  std::string key;
  std::string def;
  std::string doc;
  std::function<void(RunConfig&, const std::string&)> set;  // ConfigError on bad value
  std::function<std::string(const RunConfig&)> get;
};

const std::vector<ConfigKey>& config_schema();

// Unknown key or unparsable value throws ConfigError.
void config_set(RunConfig& c, const std::string& key, const std::string& value);

// Defaults -> file entries -> BICLKT_<SECTION>_<KEY> environment overrides.
RunConfig load_config(const std::string& path);      // "" skips the file
RunConfig config_from_kv(const std::map<std::string, std::string>& kv);
void apply_env_overrides(RunConfig& c);

// Whole-config cross-field validation; runs before any stage.
void validate_config(const RunConfig& c);

// Copies the global seed into every sub-config seed.
void materialize_seeds(RunConfig& c);

// FNV-1a over the canonical "key=value" listing: changes iff a field does.
uint64_t config_fingerprint(const RunConfig& c);
std::string fingerprint_hex(uint64_t fp);

// Every key with its default, one per line, for --help.
std::string config_help();

uint64_t fnv1a64(const void* bytes, size_t n);

}  // namespace biclkt
