#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "biclkt/augmentation.hpp"
#include "biclkt/contrastive.hpp"
#include "biclkt/dataio.hpp"
#include "biclkt/encoders.hpp"
#include "biclkt/influence_graph.hpp"
#include "biclkt/matrix.hpp"
#include "biclkt/prediction.hpp"

namespace biclkt {

// Mann-Whitney form with ties counted half; labels must contain both classes
double auc(const std::vector<double>& scores, const std::vector<int>& labels);

// fraction of (score > threshold) == label; a score at the threshold counts
// as a 0 prediction
double acc(const std::vector<double>& scores, const std::vector<int>& labels,
           double threshold = 0.5);

struct MetricReport {
  double auc = 0.0;
  double acc = 0.0;
  int64_t n_predictions = 0;
};

// ---- logistic probe over frozen embeddings ----

struct ProbeConfig {
  double lr = 0.5;
  double l2 = 1e-4;
  int epochs = 500;
  double test_fraction = 0.25;
  uint64_t seed = 1;
};

// rows are L2-normalized, split, and fit with plain full-batch descent;
// metrics come from the held-out rows only
MetricReport linear_probe(const Matrix& embeddings, const std::vector<int>& labels,
                          const ProbeConfig& cfg);

// ---- ablation sweep: centrality x fusion mode x head, shared seeds ----

struct AblationConfig {
  std::vector<std::string> augs = {"pagerank"};
  std::vector<std::string> modes = {"concate"};
  std::vector<std::string> heads = {"r"};
  std::vector<uint64_t> seeds = {1, 2, 3, 4, 5};
  double test_fraction = 0.2;
  int max_seq_len = 200;
  int threads = 1;
  GraphBuildConfig graph;
  AugmentConfig aug;
  EncoderConfig encoder;
  LossConfig loss;
  PretrainConfig pretrain;
  HeadConfig head;
};

struct AblationRow {
  std::string dataset, aug, embed_mode, head;
  uint64_t seed = 0;
  MetricReport report;
  bool failed = false;
  std::string error;
};

// one full run per (cell, seed): split, graphs from training students,
// pretrain, fuse, head training, test metrics; failures are recorded and do
// not stop the sweep
std::vector<AblationRow> run_ablation(const Dataset& d, const std::string& dataset_name,
                                      const AblationConfig& cfg);

// machine-readable rows: dataset,aug,embed_mode,head,seed,auc,acc,n_predictions
std::string ablation_csv(const std::vector<AblationRow>& rows);

// aligned text table, one line per cell with mean +- std over its seeds
std::string ablation_summary(const std::vector<AblationRow>& rows);

}  // namespace biclkt
