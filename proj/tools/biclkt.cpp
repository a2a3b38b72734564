#include <cstdio>
#include <exception>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "biclkt/config.hpp"
#include "biclkt/errors.hpp"
#include "biclkt/pipeline.hpp"

namespace {

using biclkt::RunConfig;
using biclkt::StageReport;

void print_report(const StageReport& r) {
  std::string outs;
  for (size_t i = 0; i < r.outputs.size(); ++i) outs += (i ? " " : "") + r.outputs[i];
  std::printf("%-12s %6lld ms  %s\n", r.stage.c_str(), r.wall_ms, outs.c_str());
}

void print_artifact_body(const RunConfig& cfg, const std::string& name) {
  std::string body =
      biclkt::read_text_artifact(biclkt::artifact_path(cfg, name), 0, false, true);
  std::fputs(body.c_str(), stdout);
}

int dispatch(const std::string& stage, const RunConfig& cfg, bool force) {
  if (stage == "pipeline") {
    for (const auto& r : biclkt::run_pipeline(cfg, force)) print_report(r);
    print_artifact_body(cfg, "metrics.csv");
    print_artifact_body(cfg, "ablation_summary.txt");
    return 0;
  }
  StageReport r = biclkt::run_stage(cfg, stage, force);
  print_report(r);
  if (stage == "evaluate") print_artifact_body(cfg, "metrics.csv");
  if (stage == "ablate") print_artifact_body(cfg, "ablation_summary.txt");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bi-level graph contrastive pretraining for knowledge tracing"};
  app.require_subcommand(0, 1);

  std::string config_path;
  std::string out_dir;
  uint64_t seed = 0;
  int threads = 0;
  bool force = false;
  app.add_option("--config", config_path, "run configuration file (section.key = value)");
  app.add_option("--seed", seed, "override global.seed");
  app.add_option("--threads", threads, "override global.threads");
  app.add_option("--out", out_dir, "override global.out artifact directory");
  app.add_flag("--force", force, "accept artifacts whose config fingerprint differs");
  app.footer("config keys (also BICLKT_<SECTION>_<KEY> environment overrides):\n" +
             biclkt::config_help());

  const std::vector<std::string> stages = {"ingest",     "synth",    "build-graphs",
                                           "pretrain",   "train-head", "evaluate",
                                           "ablate",     "pipeline"};
  for (const auto& s : stages) {
    auto* sub = app.add_subcommand(s, s == "pipeline"
                                          ? "run build-graphs through ablate in order"
                                          : "run the " + s + " stage");
    sub->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;  // flag misuse is a config error
  }

  try {
    if (app.get_subcommands().empty())
      throw biclkt::ConfigError(
          "no command given; expected one of: ingest, synth, build-graphs, pretrain, "
          "train-head, evaluate, ablate, pipeline (see --help)");
    std::string stage = app.get_subcommands().front()->get_name();

    RunConfig cfg = biclkt::load_config(config_path);
    if (app.count("--seed")) cfg.seed = seed;
    if (app.count("--threads")) cfg.threads = threads;
    if (app.count("--out")) cfg.out = out_dir;
    return dispatch(stage, cfg, force);
  } catch (const biclkt::ConfigError& e) {
    std::fprintf(stderr, "biclkt: config error: %s\n", e.what());
    return 2;
  } catch (const biclkt::ArtifactError& e) {
    std::fprintf(stderr, "biclkt: %s\n", e.what());
    return 3;
  } catch (const biclkt::DivergenceError& e) {
    std::fprintf(stderr, "biclkt: diverged at epoch %d: %s\n", e.epoch, e.what());
    return 4;
  } catch (const biclkt::DataError& e) {
    std::fprintf(stderr, "biclkt: data error: %s\n", e.what());
    return 5;
  } catch (const biclkt::LookupError& e) {
    std::fprintf(stderr, "biclkt: data error: %s\n", e.what());
    return 5;
  } catch (const biclkt::MetricError& e) {
    std::fprintf(stderr, "biclkt: data error: %s\n", e.what());
    return 5;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "biclkt: %s\n", e.what());
    return 1;
  }
}
