#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "vgmgc/dataio.hpp"
#include "vgmgc/error.hpp"
#include "vgmgc/metrics.hpp"
#include "vgmgc/trainer.hpp"
#include "vgmgc/verify.hpp"

namespace {

constexpr int exit_failure = 1;
constexpr int exit_load_error = 2;

// Flag name == RunConfig key.
const char* const config_keys[] = {"tau",     "rho",    "order",  "gamma_c", "gamma_E", "lr",      "epochs",
                                   "hidden",  "embed_dim", "dropout", "knn_k",  "seed",    "restarts"};

struct ClusterArgs {
  std::string dataset;
  std::string config_file;
  std::string out = "vgmgc-run";
  std::map<std::string, std::string> overrides;
  bool save_embeddings = false;
  std::optional<double> consensus_threshold;
};

int run_cluster(ClusterArgs& args, CLI::App& cmd) {
  vgmgc::RunConfig config;
  if (!args.config_file.empty()) config = vgmgc::load_run_config(args.config_file);
  for (const char* key : config_keys) {
    if (cmd.get_option(std::string("--") + key)->count() > 0) {
      vgmgc::set_config_value(config, key, args.overrides[key]);
    }
  }
  config.validate();

  vgmgc::LoadOptions load;
  load.knn_k = config.knn_k;
  const vgmgc::MultiViewDataset dataset = vgmgc::load_dataset(args.dataset, load);
  for (const std::string& note : dataset.notes) std::cerr << "note: " << note << '\n';

  const vgmgc::FitResult result = vgmgc::fit(dataset, config);
  vgmgc::save_run(args.out, vgmgc::to_artifacts(result, config), args.save_embeddings);
  if (args.consensus_threshold) {
    vgmgc::write_weighted_edges(vgmgc::fs::path(args.out) / "consensus.tsv", result.consensus,
                                *args.consensus_threshold);
  }
  if (result.scores) {
    std::cout << vgmgc::format_scores(*result.scores) << '\n';
  } else {
    std::cout << "no labels.txt; cluster labels written to " << (vgmgc::fs::path(args.out) / "labels.txt").string()
              << '\n';
  }
  return 0;
}

struct SynthArgs {
  vgmgc::SbmParams params;
  int noisy_view = 0;  // 1-based; 0 means none
  std::string out = "synth-data";
};

int run_synth(const SynthArgs& args) {
  vgmgc::SbmParams p = args.params;
  if (args.noisy_view > 0) p.noisy_view = args.noisy_view - 1;
  const vgmgc::MultiViewDataset ds = vgmgc::generate_sbm(p);
  vgmgc::save_dataset(ds, args.out);
  std::cout << "wrote " << ds.n() << " nodes, " << ds.num_views() << " views, " << ds.clusters << " clusters to "
            << args.out << '\n';
  return 0;
}

int run_verify(const std::string& suite, std::uint64_t seed) {
  const vgmgc::verify::SuiteReport report = vgmgc::verify::run_suite(suite, seed);
  std::cout << report.format();
  std::cout << (report.passed() ? "suite passed" : "suite FAILED") << '\n';
  return report.passed() ? 0 : exit_failure;
}

int run_metrics(const std::string& truth_path, const std::string& pred_path) {
  const vgmgc::Labels truth = vgmgc::read_labels(truth_path);
  const vgmgc::Labels pred = vgmgc::read_labels(pred_path);
  if (truth.size() != pred.size()) {
    throw vgmgc::LoadError(pred_path, 0,
                           "has " + std::to_string(pred.size()) + " labels, truth has " + std::to_string(truth.size()));
  }
  std::cout << vgmgc::format_scores(vgmgc::evaluate(truth, pred)) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-view graph clustering with a variational consensus graph"};
  app.require_subcommand(1);

  ClusterArgs cluster;
  CLI::App* cmd_cluster = app.add_subcommand("cluster", "Train on a dataset directory and write run artifacts");
  cmd_cluster->add_option("dataset", cluster.dataset, "Dataset directory (meta, features_v*.csv, ...)")
      ->required()
      ->check(CLI::ExistingDirectory);
  cmd_cluster->add_option("--config", cluster.config_file, "key=value config file; flags override it")
      ->check(CLI::ExistingFile);
  cmd_cluster->add_option("--out", cluster.out, "Output directory")->capture_default_str();
  for (const char* key : config_keys) {
    cmd_cluster->add_option(std::string("--") + key, cluster.overrides[key], std::string("Override config ") + key);
  }
  cmd_cluster->add_flag("--save-embeddings", cluster.save_embeddings, "Also write z_global.tsv and z_view*.tsv");
  cmd_cluster->add_option("--consensus-threshold", cluster.consensus_threshold,
                          "Write consensus.tsv with eval-mode edges whose weight is at least this value");

  SynthArgs synth;
  CLI::App* cmd_synth = app.add_subcommand("synth", "Generate a planted-partition multi-view dataset");
  cmd_synth->add_option("--n", synth.params.n, "Nodes")->capture_default_str();
  cmd_synth->add_option("--c", synth.params.clusters, "Clusters")->capture_default_str();
  cmd_synth->add_option("--views", synth.params.views, "Views")->capture_default_str();
  cmd_synth->add_option("--p_in", synth.params.p_in, "Edge probability inside a cluster")->capture_default_str();
  cmd_synth->add_option("--p_out", synth.params.p_out, "Edge probability across clusters")->capture_default_str();
  cmd_synth->add_option("--feature_dim", synth.params.feature_dim, "Feature columns per view")->capture_default_str();
  cmd_synth->add_option("--feature_noise", synth.params.feature_noise, "Uniform feature noise amplitude")
      ->capture_default_str();
  cmd_synth->add_option("--feature_signal", synth.params.feature_signal,
                        "Probability of each own-block feature column being on")
      ->capture_default_str();
  cmd_synth->add_option("--noisy_view", synth.noisy_view, "1-based view whose graph is pure noise (0 = none)")
      ->capture_default_str();
  cmd_synth->add_option("--seed", synth.params.seed, "Random seed")->capture_default_str();
  cmd_synth->add_option("--out", synth.out, "Output directory")->capture_default_str();

  std::string suite;
  std::uint64_t verify_seed = 0;
  CLI::App* cmd_verify = app.add_subcommand("verify", "Run a property suite and report each check");
  cmd_verify->add_option("suite", suite, "Suite name")->required()->check(CLI::IsMember(vgmgc::verify::suite_names()));
  cmd_verify->add_option("--seed", verify_seed, "Random seed")->capture_default_str();

  std::string truth_path, pred_path;
  CLI::App* cmd_metrics = app.add_subcommand("metrics", "Score predicted labels against ground truth");
  cmd_metrics->add_option("truth", truth_path, "Ground-truth labels, one per line")->required();
  cmd_metrics->add_option("pred", pred_path, "Predicted labels, one per line")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_cluster->parsed()) return run_cluster(cluster, *cmd_cluster);
    if (cmd_synth->parsed()) return run_synth(synth);
    if (cmd_verify->parsed()) return run_verify(suite, verify_seed);
    if (cmd_metrics->parsed()) return run_metrics(truth_path, pred_path);
  } catch (const vgmgc::LoadError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_load_error;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_failure;
  }
  return exit_failure;
}
