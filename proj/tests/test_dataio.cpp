#include <doctest.h>

#include <json.hpp>

#include <string>

#include "test_util.hpp"
#include "vgmgc/dataio.hpp"

using namespace vgmgc;
using testutil::read_file;
using testutil::TempDir;
using testutil::write_file;

namespace {

// Two-view dataset on 4 nodes with a graph for view 1 only.
void write_tiny(const TempDir& dir, const std::string& meta_extra = "") {
  write_file(dir / "meta", "# tiny\nn=4\nV=2\nc=2\n" + meta_extra);
  write_file(dir / "features_v1.csv", "0,10\n1,20\n2,30\n3,10\n");
  write_file(dir / "features_v2.csv", "5\n5\n7\n9\n");
  write_file(dir / "graph_v1.tsv", "0\t1\n2\t3\n");
  write_file(dir / "graph_v2.tsv", "1\t2\n");
  write_file(dir / "labels.txt", "0\n0\n1\n1\n");
}

std::string load_error_text(const fs::path& dir, const LoadOptions& options = {}) {
  try {
    load_dataset(dir, options);
  } catch (const LoadError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("load_dataset scales features and self-loops graphs") {
  TempDir dir("tiny");
  write_tiny(dir);
  const MultiViewDataset ds = load_dataset(dir.path());
  CHECK(ds.n() == 4);
  CHECK(ds.num_views() == 2);
  CHECK(ds.clusters == 2);
  CHECK(ds.labels == Labels{0, 0, 1, 1});
  CHECK(ds.notes.empty());

  Matrix x1(4, 2);
  x1 << 0, 0, 1.0 / 3, 0.5, 2.0 / 3, 1, 1, 0;
  CHECK((ds.views[0].features - x1).cwiseAbs().maxCoeff() <= 1e-15);
  Matrix x2(4, 1);
  x2 << 0, 0, 0.5, 1;
  CHECK(ds.views[1].features == x2);
  CHECK(ds.x_global.cols() == 3);
  CHECK(ds.x_global.leftCols(2) == ds.views[0].features);

  const Graph& g = ds.views[0].graph;
  CHECK(g.edge(0, 1));
  CHECK(g.edge(1, 0));
  CHECK(g.edge(3, 2));
  CHECK_FALSE(g.edge(0, 2));
  for (Index i = 0; i < 4; ++i) CHECK(g.edge(i, i));
  CHECK(g.edge_count() == 8);
}

TEST_CASE("directed flag keeps edge orientation") {
  TempDir dir("directed");
  write_tiny(dir, "directed=1\n");
  const MultiViewDataset ds = load_dataset(dir.path());
  CHECK(ds.directed);
  CHECK(ds.views[0].graph.edge(0, 1));
  CHECK_FALSE(ds.views[0].graph.edge(1, 0));
}

TEST_CASE("save then load reproduces the dataset") {
  TempDir dir("roundtrip");
  SbmParams p;
  p.n = 40;
  p.clusters = 2;
  p.feature_dim = 8;
  p.seed = 3;
  const MultiViewDataset original = generate_sbm(p);
  save_dataset(original, dir.path());
  const MultiViewDataset loaded = load_dataset(dir.path());
  REQUIRE(loaded.num_views() == original.num_views());
  for (std::size_t v = 0; v < original.num_views(); ++v) {
    CHECK(loaded.views[v].graph == original.views[v].graph);
    // Generated features are already min-max scaled, so rescaling is the identity.
    CHECK(loaded.views[v].features == original.views[v].features);
  }
  CHECK(loaded.labels == original.labels);
  CHECK(loaded.names == original.names);

  TempDir again("roundtrip2");
  save_dataset(loaded, again.path());
  for (const char* f : {"meta", "features_v1.csv", "features_v2.csv", "graph_v1.tsv", "graph_v2.tsv", "labels.txt"}) {
    CHECK(read_file(dir / f) == read_file(again / f));
  }
}

TEST_CASE("loader errors name the file") {
  TempDir dir("errors");
  write_tiny(dir);
  fs::remove(dir / "meta");
  const std::string missing_meta = load_error_text(dir.path());
  CHECK(missing_meta.find("meta") != std::string::npos);

  write_tiny(dir);
  write_file(dir / "labels.txt", "0\n0\n1\n");
  CHECK(load_error_text(dir.path()).find("labels.txt") != std::string::npos);

  write_tiny(dir);
  write_file(dir / "features_v2.csv", "5\n5\nseven\n9\n");
  CHECK(load_error_text(dir.path()).find("features_v2.csv:3") != std::string::npos);

  write_tiny(dir);
  write_file(dir / "features_v1.csv", "0,10\n1,20\n2,30\n");
  CHECK(load_error_text(dir.path()).find("features_v1.csv") != std::string::npos);

  write_tiny(dir);
  write_file(dir / "features_v1.csv", "0,10\n1\n2,30\n3,10\n");
  CHECK(load_error_text(dir.path()).find("features_v1.csv:2") != std::string::npos);

  write_tiny(dir);
  write_file(dir / "graph_v2.tsv", "1\t2\n0\t4\n");
  const std::string range = load_error_text(dir.path());
  CHECK(range.find("graph_v2.tsv:2") != std::string::npos);
  CHECK(range.find("out of range") != std::string::npos);

  write_tiny(dir, "colour=blue\n");
  CHECK(load_error_text(dir.path()).find("meta:5") != std::string::npos);

  write_tiny(dir);
  fs::remove(dir / "features_v2.csv");
  CHECK(load_error_text(dir.path()).find("features_v2.csv") != std::string::npos);
}

TEST_CASE("missing graph falls back to kNN") {
  TempDir dir("knn");
  SbmParams p;
  p.n = 30;
  p.clusters = 3;
  p.feature_dim = 6;
  p.seed = 1;
  save_dataset(generate_sbm(p), dir.path());
  fs::remove(dir / "graph_v2.tsv");
  LoadOptions options;
  options.knn_k = 10;
  const MultiViewDataset ds = load_dataset(dir.path(), options);
  REQUIRE(ds.notes.size() == 1);
  CHECK(ds.notes[0].find("view 2") != std::string::npos);
  CHECK(ds.notes[0].find("k=10") != std::string::npos);
  CHECK(ds.views[1].graph == knn_graph(ds.views[1].features, 10, options.metric));

  options.knn_k = 30;
  CHECK(load_error_text(dir.path(), options).find("graph_v2.tsv") != std::string::npos);
}

TEST_CASE("global features of a three-source shaped dataset") {
  TempDir dir("sources");
  constexpr int n = 169;
  const int widths[] = {3560, 3631, 3068};
  write_file(dir / "meta", "n=169\nV=3\nc=6\nnames=bbc,reuters,guardian\n");
  for (int v = 0; v < 3; ++v) {
    std::string csv;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < widths[v]; ++j) {
        if (j) csv += ',';
        csv += ((i + j + v) % 7 == 0) ? '1' : '0';
      }
      csv += '\n';
    }
    write_file(dir / ("features_v" + std::to_string(v + 1) + ".csv"), csv);
    std::string edges;
    for (int i = 0; i + 1 < n; ++i) edges += std::to_string(i) + "\t" + std::to_string(i + 1) + "\n";
    write_file(dir / ("graph_v" + std::to_string(v + 1) + ".tsv"), edges);
  }
  const MultiViewDataset ds = load_dataset(dir.path());
  CHECK(ds.n() == 169);
  CHECK(ds.x_global.cols() == 10259);
  CHECK(ds.names == std::vector<std::string>{"bbc", "reuters", "guardian"});
  CHECK_FALSE(ds.labels.has_value());
}

TEST_CASE("min_max_scale") {
  Matrix x(3, 3);
  x << 1, 5, -2, 3, 5, 0, 2, 5, 2;
  Matrix expected(3, 3);
  expected << 0, 0, 0, 1, 0, 0.5, 0.5, 0, 1;
  CHECK(min_max_scale(x) == expected);
}

TEST_CASE("generate_sbm determinism and validation") {
  SbmParams p;
  p.n = 60;
  p.clusters = 3;
  p.seed = 9;
  const MultiViewDataset a = generate_sbm(p);
  const MultiViewDataset b = generate_sbm(p);
  for (std::size_t v = 0; v < a.num_views(); ++v) {
    CHECK(a.views[v].graph == b.views[v].graph);
    CHECK(a.views[v].features == b.views[v].features);
  }
  p.seed = 10;
  CHECK_FALSE(generate_sbm(p).views[0].graph == a.views[0].graph);

  SbmParams bad = p;
  bad.p_in = 0.01;
  bad.p_out = 0.2;
  CHECK_THROWS_AS(generate_sbm(bad), InvalidArgument);
  bad = p;
  bad.p_in = 1.5;
  CHECK_THROWS_AS(generate_sbm(bad), InvalidArgument);
  bad = p;
  bad.p_out = -0.1;
  CHECK_THROWS_AS(generate_sbm(bad), InvalidArgument);
  bad = p;
  bad.noisy_view = 2;
  CHECK_THROWS_AS(generate_sbm(bad), InvalidArgument);
}

TEST_CASE("generate_sbm with p_in=1 and p_out=0 gives complete blocks") {
  SbmParams p;
  p.n = 40;
  p.clusters = 4;
  p.p_in = 1.0;
  p.p_out = 0.0;
  p.feature_noise = 0.0;
  p.feature_signal = 1.0;
  p.feature_dim = 8;
  const MultiViewDataset ds = generate_sbm(p);
  const Labels& labels = *ds.labels;
  for (const auto& view : ds.views) {
    for (Index i = 0; i < p.n; ++i) {
      for (Index j = 0; j < p.n; ++j) {
        CHECK(view.graph.edge(i, j) == (labels[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(j)]));
      }
      // Features are the indicator of the node's own block.
      for (Index j = 0; j < p.feature_dim; ++j) {
        CHECK(view.features(i, j) == (j / 2 == labels[static_cast<std::size_t>(i)] ? 1.0 : 0.0));
      }
    }
  }
}

TEST_CASE("generate_sbm within-cluster degree matches its expectation") {
  SbmParams p;
  p.n = 200;
  p.clusters = 4;
  p.p_in = 0.25;
  p.p_out = 0.01;
  const double expected = p.p_in * (p.n / p.clusters - 1);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    p.seed = seed;
    const MultiViewDataset ds = generate_sbm(p);
    const Labels& labels = *ds.labels;
    for (const auto& view : ds.views) {
      double within = 0.0, across = 0.0;
      for (Index i = 0; i < p.n; ++i) {
        for (Index j = 0; j < p.n; ++j) {
          if (i == j || !view.graph.edge(i, j)) continue;
          (labels[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(j)] ? within : across) += 1.0;
        }
      }
      // Standard error of the mean degree is about 0.3.
      CHECK(within / p.n == doctest::Approx(expected).epsilon(1.0 / expected));
      CHECK(across / p.n == doctest::Approx(p.p_out * 150).epsilon(0.5));
    }
  }
}

TEST_CASE("generate_sbm noisy view ignores the clusters") {
  SbmParams p;
  p.n = 200;
  p.noisy_view = 1;
  p.seed = 4;
  const MultiViewDataset ds = generate_sbm(p);
  const Labels& labels = *ds.labels;
  double within = 0.0;
  for (Index i = 0; i < p.n; ++i) {
    for (Index j = 0; j < p.n; ++j) {
      if (i != j && ds.views[1].graph.edge(i, j) && labels[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(j)]) {
        within += 1.0;
      }
    }
  }
  CHECK(within / p.n < 2.0);
  CHECK(ds.names[1].rfind("noise", 0) == 0);
}

TEST_CASE("run config parsing and overrides") {
  TempDir dir("config");
  write_file(dir / "run.cfg", "# settings\ntau = 2.5\nepochs=30\n\nseed=7\n");
  const RunConfig c = load_run_config(dir / "run.cfg");
  CHECK(c.tau == 2.5);
  CHECK(c.epochs == 30);
  CHECK(c.seed == 7);
  CHECK(c.rho == RunConfig{}.rho);

  RunConfig over = c;
  set_config_value(over, "rho", "0");
  CHECK(over.rho == 0.0);
  CHECK_THROWS_AS(set_config_value(over, "temperature", "1"), InvalidArgument);
  CHECK_THROWS_AS(set_config_value(over, "epochs", "many"), InvalidArgument);

  write_file(dir / "bad.cfg", "tau=1\nalpha=3\n");
  try {
    load_run_config(dir / "bad.cfg");
    FAIL("expected a load error");
  } catch (const LoadError& e) {
    CHECK(std::string(e.what()).find("bad.cfg:2") != std::string::npos);
  }

  write_file(dir / "roundtrip.cfg", to_config_text(c));
  CHECK(to_config_text(load_run_config(dir / "roundtrip.cfg")) == to_config_text(c));

  RunConfig invalid;
  invalid.tau = 0.0;
  CHECK_THROWS_AS(invalid.validate(), InvalidArgument);
  invalid = RunConfig{};
  invalid.rho = -1.0;
  CHECK_THROWS_AS(invalid.validate(), InvalidArgument);
}

TEST_CASE("save_run writes every artifact") {
  TempDir dir("run");
  RunArtifacts a;
  a.labels = {0, 1, 1};
  a.scores = ClusteringScores{0.5, 0.25, 0.75, 0.625};
  a.beliefs_history = {{1.0, 1.0}, {1.0, 0.5}, {0.75, 1.0}};
  a.losses = {{0, 3.0, 1.0, -2.0, 4.0}, {1, 2.5, 0.5, -1.0, 3.0}};
  a.view_embeddings = {Matrix::Ones(3, 2), Matrix::Zero(3, 2)};
  a.fused_embedding = Matrix::Ones(3, 4);
  a.config.epochs = 2;
  save_run(dir.path(), a, true);

  CHECK(read_labels(dir / "labels.txt") == a.labels);
  CHECK(read_file(dir / "beliefs.tsv") == "epoch\tview1\tview2\n0\t1\t1\n1\t1\t0.5\n2\t0.75\t1\n");
  CHECK(read_file(dir / "losses.tsv") == "epoch\tL_r\tL_c\tL_E\ttotal\n0\t3\t1\t-2\t4\n1\t2.5\t0.5\t-1\t3\n");
  const auto report = nlohmann::json::parse(read_file(dir / "metrics.json"));
  CHECK(report["metrics"]["acc"] == 0.75);
  CHECK(report["epochs"] == 2);
  CHECK(report["config"]["epochs"] == "2");
  CHECK(report["final_beliefs"][0] == 0.75);
  CHECK(fs::exists(dir / "z_global.tsv"));
  CHECK(fs::exists(dir / "z_view2.tsv"));
  CHECK(read_file(dir / "z_view1.tsv").rfind("0\t1\t1\n", 0) == 0);

  TempDir bare("run-bare");
  a.scores.reset();
  save_run(bare.path(), a, false);
  CHECK(nlohmann::json::parse(read_file(bare / "metrics.json"))["metrics"].is_null());
  CHECK_FALSE(fs::exists(bare / "z_global.tsv"));
}

TEST_CASE("weighted edge export and score formatting") {
  TempDir dir("edges");
  Matrix w(2, 2);
  w << 0.9, 0.1, 0.5, 0.7;
  write_weighted_edges(dir / "e.tsv", w, 0.5);
  CHECK(read_file(dir / "e.tsv") == "0\t0\t0.9\n1\t0\t0.5\n1\t1\t0.7\n");

  CHECK(format_scores({1.0, 0.0, 0.75, 0.5}) == "NMI=100.0 ARI=0.0 ACC=75.0 F1=50.0");
  CHECK(format_double(0.1) == "0.1");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
}
