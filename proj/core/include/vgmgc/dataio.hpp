#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "vgmgc/graph.hpp"
#include "vgmgc/metrics.hpp"

namespace vgmgc {

namespace fs = std::filesystem;

/// V views over a shared node set plus the global features built from them.
struct MultiViewDataset {
  struct View {
    Matrix features;  ///< n x d_v, every entry in [0,1]
    Graph graph;      ///< binary, self-looped
  };

  std::vector<View> views;
  Matrix x_global;  ///< Concat(X^1, ..., X^V)
  std::optional<Labels> labels;
  int clusters = 0;
  bool directed = false;
  std::vector<std::string> names;
  /// Human-readable notes from loading (e.g. kNN substitution).
  std::vector<std::string> notes;

  Index n() const { return views.empty() ? 0 : views.front().features.rows(); }
  std::size_t num_views() const { return views.size(); }
  std::vector<Graph> graphs() const;
  /// Throws InvalidArgument if shapes, ranges or self-loops are inconsistent.
  void validate() const;
};

/// Hyperparameters of one run. Field names double as config-file keys.
struct RunConfig {
  double tau = 5.0;
  double rho = 1.0;
  int order = 2;
  double gamma_c = 1.0;
  double gamma_E = 1e-3;
  double lr = 1e-3;
  int epochs = 200;
  int hidden = 512;
  int embed_dim = 512;
  double dropout = 0.1;
  int knn_k = 10;
  std::uint64_t seed = 0;
  int restarts = 10;

  void validate() const;
};

/// Sets one field from its textual key/value; throws InvalidArgument on unknown keys or bad values.
void set_config_value(RunConfig& config, const std::string& key, const std::string& value);
/// Flat `key=value` file; `#` starts a comment. Errors name the file and line.
RunConfig load_run_config(const fs::path& path, RunConfig base = {});
/// Serializes every field as `key=value` lines, in declaration order.
std::string to_config_text(const RunConfig& config);

struct LoadOptions {
  int knn_k = 10;
  KnnMetric metric = KnnMetric::cosine;
};

/// Reads `meta`, `features_v{v}.csv`, optional `graph_v{v}.tsv` and `labels.txt`.
/// Features are min-max scaled per column, graphs get self-loops, and views
/// without a graph file receive a kNN graph.
MultiViewDataset load_dataset(const fs::path& dir, const LoadOptions& options = {});

/// Writes a directory that load_dataset reads back into the same dataset.
void save_dataset(const MultiViewDataset& dataset, const fs::path& dir);

/// Maps each column onto [0,1]; constant columns become 0.
Matrix min_max_scale(const Matrix& x);

/// Concat(features of every view).
Matrix concat_features(const std::vector<MultiViewDataset::View>& views);

struct SbmParams {
  Index n = 200;
  int clusters = 4;
  int views = 2;
  double p_in = 0.25;
  double p_out = 0.01;
  Index feature_dim = 64;
  double feature_noise = 0.3;
  /// Probability that a column of the node's own cluster block is switched on.
  double feature_signal = 0.2;
  std::optional<int> noisy_view;
  std::uint64_t seed = 0;
};

/// Planted-partition multi-view benchmark.
///
/// Nodes are split into balanced contiguous clusters. Each view draws its
/// own undirected graph (p_in inside clusters, p_out across). Each cluster
/// owns a block of feature_dim / c columns; every column of a node's own
/// block is set to 1 with probability feature_signal, then Uniform(0,
/// feature_noise) is added everywhere, the result is clipped to [0,1] and
/// min-max scaled. Single nodes are only weakly separable, so the graph
/// carries most of the cluster signal. A noisy view has its graph replaced
/// by pure p_out noise.
MultiViewDataset generate_sbm(const SbmParams& params);

struct LossRecord {
  int epoch = 0;
  double reconstruction = 0.0;  ///< L_r
  double clustering = 0.0;      ///< L_c
  double elbo = 0.0;            ///< L_E
  double total = 0.0;
};

struct RunArtifacts {
  Labels labels;
  std::optional<ClusteringScores> scores;
  /// Row 0 is the initial (all-ones) beliefs, then one row per epoch.
  std::vector<std::vector<double>> beliefs_history;
  std::vector<LossRecord> losses;
  std::vector<Matrix> view_embeddings;
  Matrix fused_embedding;
  RunConfig config;
};

/// Writes labels.txt, metrics.json, metrics.txt, beliefs.tsv, losses.tsv and,
/// when `write_embeddings`, z_global.tsv plus z_view{v}.tsv.
void save_run(const fs::path& dir, const RunArtifacts& artifacts, bool write_embeddings);

Labels read_labels(const fs::path& path);
void write_labels(const fs::path& path, const Labels& labels);

/// Rows `i<TAB>j<TAB>weight` for every entry with weight >= threshold.
void write_weighted_edges(const fs::path& path, const Matrix& weights, double threshold);

/// Matrix as TSV with the node index in the first column.
void write_embedding(const fs::path& path, const Matrix& z);

/// `NMI=xx.x ARI=xx.x ACC=xx.x F1=xx.x` (percentages, one decimal).
std::string format_scores(const ClusteringScores& scores);

/// Shortest text that parses back to exactly `v`.
std::string format_double(double v);

}  // namespace vgmgc
