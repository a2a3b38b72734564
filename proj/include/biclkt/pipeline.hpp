#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "biclkt/config.hpp"
#include "biclkt/matrix.hpp"

namespace biclkt {

// One executed stage: what it read (with content hashes), what it wrote,
// and how long it took. Mirrored into <out>/manifest.json.
struct StageReport {
  std::string stage;
  std::string fingerprint;
  std::map<std::string, std::string> inputs;  // path -> content hash
  std::vector<std::string> outputs;           // artifact names inside out/
  long long wall_ms = 0;
};

// Validates and seed-materializes the config, then runs one stage:
// ingest, synth, build-graphs, pretrain, train-head, evaluate, or ablate.
// Derived inputs written by a different config are refused unless force.
StageReport run_stage(const RunConfig& cfg, const std::string& stage, bool force = false);

// build-graphs through ablate, preceded by ingest when data.path is set.
// Requires an existing dataset artifact otherwise.
std::vector<StageReport> run_pipeline(const RunConfig& cfg, bool force = false);

// ---- artifact plumbing (exposed for tests) ----

std::string artifact_path(const RunConfig& cfg, const std::string& name);

// Text artifacts open with "# biclkt-artifact v1 stage=<s> fingerprint=<hex>".
void write_text_artifact(const std::string& path, const std::string& stage,
                         uint64_t fingerprint, const std::string& body);

// Returns the body. Missing file or bad header names the producing stage;
// a fingerprint mismatch is refused unless force (roots skip the check).
std::string read_text_artifact(const std::string& path, uint64_t expect_fp,
                               bool check_fp, bool force);

// Matrix round-trip: "rows,cols" line then %.17g rows, value-exact.
std::string matrix_to_csv(const Matrix& m);
Matrix matrix_from_csv(const std::string& body);

uint64_t hash_file(const std::string& path);  // FNV over raw bytes

}  // namespace biclkt
