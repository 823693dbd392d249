#include "vgmgc/dataio.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "vgmgc/error.hpp"
#include "vgmgc/nn/rng.hpp"

namespace vgmgc {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

template <typename T>
bool parse_number(const std::string& text, T& out) {
  const std::string t = trim(text);
  if (t.empty()) return false;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

bool parse_bool(const std::string& text, bool& out) {
  const std::string t = trim(text);
  if (t == "1" || t == "true" || t == "yes") {
    out = true;
    return true;
  }
  if (t == "0" || t == "false" || t == "no") {
    out = false;
    return true;
  }
  return false;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError(path, 0, "cannot open file");
  return in;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory " + dir.string());
}

Matrix read_features(const fs::path& path, Index expected_rows) {
  std::ifstream in = open_in(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    std::vector<double> row;
    for (const std::string& cell : split(line, ',')) {
      double v = 0.0;
      if (!parse_number(cell, v)) throw LoadError(path, lineno, "non-numeric cell '" + trim(cell) + "'");
      row.push_back(v);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw LoadError(path, lineno,
                      "expected " + std::to_string(rows.front().size()) + " columns, got " + std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  }
  if (static_cast<Index>(rows.size()) != expected_rows) {
    throw LoadError(path, 0, "expected " + std::to_string(expected_rows) + " rows, got " + std::to_string(rows.size()));
  }
  if (rows.front().empty()) throw LoadError(path, 1, "no feature columns");
  Matrix x(expected_rows, static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < x.rows(); ++i) {
    for (Index j = 0; j < x.cols(); ++j) x(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  if (!x.allFinite()) throw LoadError(path, 0, "non-finite feature value");
  return x;
}

Graph read_edge_list(const fs::path& path, Index n, bool directed) {
  std::ifstream in = open_in(path);
  Graph g(n);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty()) continue;
    std::istringstream fields(t);
    std::string a, b, extra;
    fields >> a >> b;
    long long i = 0, j = 0;
    if (!parse_number(a, i) || !parse_number(b, j) || (fields >> extra)) {
      throw LoadError(path, lineno, "expected '<i>\\t<j>', got '" + t + "'");
    }
    if (i < 0 || j < 0 || i >= n || j >= n) {
      throw LoadError(path, lineno, "node index out of range [0, " + std::to_string(n) + ")");
    }
    g.set_edge(static_cast<Index>(i), static_cast<Index>(j));
    if (!directed) g.set_edge(static_cast<Index>(j), static_cast<Index>(i));
  }
  return add_self_loops(g);
}

struct Meta {
  Index n = 0;
  int views = 0;
  int clusters = 0;
  bool directed = false;
  std::vector<std::string> names;
};

Meta read_meta(const fs::path& path) {
  if (!fs::exists(path)) throw LoadError(path, 0, "missing meta file");
  std::ifstream in = open_in(path);
  Meta meta;
  bool has_n = false, has_v = false, has_c = false;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw LoadError(path, lineno, "expected key=value");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    long long num = 0;
    if (key == "n" || key == "V" || key == "c") {
      if (!parse_number(value, num) || num <= 0) throw LoadError(path, lineno, key + " must be a positive integer");
      if (key == "n") meta.n = static_cast<Index>(num), has_n = true;
      if (key == "V") meta.views = static_cast<int>(num), has_v = true;
      if (key == "c") meta.clusters = static_cast<int>(num), has_c = true;
    } else if (key == "directed") {
      if (!parse_bool(value, meta.directed)) throw LoadError(path, lineno, "directed must be 0/1/true/false");
    } else if (key == "names") {
      for (const std::string& name : split(value, ',')) meta.names.push_back(trim(name));
    } else {
      throw LoadError(path, lineno, "unknown key '" + key + "'");
    }
  }
  if (!has_n || !has_v || !has_c) throw LoadError(path, 0, "meta must define n, V and c");
  if (!meta.names.empty() && static_cast<int>(meta.names.size()) != meta.views) {
    throw LoadError(path, 0, "names lists " + std::to_string(meta.names.size()) + " views, V is " +
                                 std::to_string(meta.views));
  }
  return meta;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::vector<Graph> MultiViewDataset::graphs() const {
  std::vector<Graph> out;
  out.reserve(views.size());
  for (const View& v : views) out.push_back(v.graph);
  return out;
}

void MultiViewDataset::validate() const {
  if (views.empty()) throw InvalidArgument("dataset has no views");
  const Index rows = n();
  Index width = 0;
  for (std::size_t v = 0; v < views.size(); ++v) {
    const View& view = views[v];
    const std::string tag = "view " + std::to_string(v + 1);
    if (view.features.rows() != rows || view.graph.n() != rows) throw InvalidArgument(tag + ": node count mismatch");
    if ((view.features.array() < 0.0).any() || (view.features.array() > 1.0).any()) {
      throw InvalidArgument(tag + ": features outside [0,1]");
    }
    for (Index i = 0; i < rows; ++i) {
      if (!view.graph.edge(i, i)) throw InvalidArgument(tag + ": missing self-loop");
    }
    width += view.features.cols();
  }
  if (x_global.rows() != rows) throw InvalidArgument("global features: node count mismatch");
  (void)width;
  if (clusters <= 0 || clusters > rows) throw InvalidArgument("cluster count must lie in [1, n]");
  if (labels && static_cast<Index>(labels->size()) != rows) throw InvalidArgument("labels: length differs from n");
}

void RunConfig::validate() const {
  if (!(tau > 0.0)) throw InvalidArgument("config: tau must be > 0");
  if (rho < 0.0) throw InvalidArgument("config: rho must be >= 0");
  if (order < 0) throw InvalidArgument("config: order must be >= 0");
  if (gamma_c < 0.0 || gamma_E < 0.0) throw InvalidArgument("config: gamma_c and gamma_E must be >= 0");
  if (!(lr > 0.0)) throw InvalidArgument("config: lr must be > 0");
  if (epochs < 0) throw InvalidArgument("config: epochs must be >= 0");
  if (hidden <= 0 || embed_dim <= 0) throw InvalidArgument("config: hidden and embed_dim must be > 0");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw InvalidArgument("config: dropout must lie in [0,1)");
  if (knn_k <= 0) throw InvalidArgument("config: knn_k must be > 0");
  if (restarts <= 0) throw InvalidArgument("config: restarts must be > 0");
}

void set_config_value(RunConfig& config, const std::string& key, const std::string& value) {
  auto real = [&](double& field) {
    if (!parse_number(value, field)) throw InvalidArgument("config: '" + key + "' expects a number, got '" + value + "'");
  };
  auto integer = [&](int& field) {
    if (!parse_number(value, field)) throw InvalidArgument("config: '" + key + "' expects an integer, got '" + value + "'");
  };
  if (key == "tau") real(config.tau);
  else if (key == "rho") real(config.rho);
  else if (key == "order") integer(config.order);
  else if (key == "gamma_c") real(config.gamma_c);
  else if (key == "gamma_E") real(config.gamma_E);
  else if (key == "lr") real(config.lr);
  else if (key == "epochs") integer(config.epochs);
  else if (key == "hidden") integer(config.hidden);
  else if (key == "embed_dim") integer(config.embed_dim);
  else if (key == "dropout") real(config.dropout);
  else if (key == "knn_k") integer(config.knn_k);
  else if (key == "restarts") integer(config.restarts);
  else if (key == "seed") {
    if (!parse_number(value, config.seed)) throw InvalidArgument("config: 'seed' expects a nonnegative integer");
  } else {
    throw InvalidArgument("config: unknown key '" + key + "'");
  }
}

RunConfig load_run_config(const fs::path& path, RunConfig base) {
  std::ifstream in = open_in(path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = line.substr(0, line.find('#'));
    t = trim(t);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw LoadError(path, lineno, "expected key=value");
    try {
      set_config_value(base, trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
    } catch (const InvalidArgument& e) {
      throw LoadError(path, lineno, e.what());
    }
  }
  try {
    base.validate();
  } catch (const InvalidArgument& e) {
    throw LoadError(path, 0, e.what());
  }
  return base;
}

std::string to_config_text(const RunConfig& c) {
  std::ostringstream out;
  out << "tau=" << format_double(c.tau) << "\n"
      << "rho=" << format_double(c.rho) << "\n"
      << "order=" << c.order << "\n"
      << "gamma_c=" << format_double(c.gamma_c) << "\n"
      << "gamma_E=" << format_double(c.gamma_E) << "\n"
      << "lr=" << format_double(c.lr) << "\n"
      << "epochs=" << c.epochs << "\n"
      << "hidden=" << c.hidden << "\n"
      << "embed_dim=" << c.embed_dim << "\n"
      << "dropout=" << format_double(c.dropout) << "\n"
      << "knn_k=" << c.knn_k << "\n"
      << "seed=" << c.seed << "\n"
      << "restarts=" << c.restarts << "\n";
  return out.str();
}

Matrix min_max_scale(const Matrix& x) {
  Matrix out(x.rows(), x.cols());
  for (Index j = 0; j < x.cols(); ++j) {
    const double lo = x.col(j).minCoeff();
    const double hi = x.col(j).maxCoeff();
    if (hi > lo) {
      out.col(j) = ((x.col(j).array() - lo) / (hi - lo)).matrix();
    } else {
      out.col(j).setZero();
    }
  }
  return out;
}

Matrix concat_features(const std::vector<MultiViewDataset::View>& views) {
  Index width = 0;
  for (const auto& v : views) width += v.features.cols();
  const Index n = views.empty() ? 0 : views.front().features.rows();
  Matrix out(n, width);
  Index offset = 0;
  for (const auto& v : views) {
    out.middleCols(offset, v.features.cols()) = v.features;
    offset += v.features.cols();
  }
  return out;
}

Labels read_labels(const fs::path& path) {
  std::ifstream in = open_in(path);
  Labels labels;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    int v = 0;
    if (!parse_number(line, v)) throw LoadError(path, lineno, "expected an integer label, got '" + trim(line) + "'");
    labels.push_back(v);
  }
  return labels;
}

void write_labels(const fs::path& path, const Labels& labels) {
  std::ofstream out = open_out(path);
  for (int l : labels) out << l << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

MultiViewDataset load_dataset(const fs::path& dir, const LoadOptions& options) {
  const Meta meta = read_meta(dir / "meta");
  MultiViewDataset ds;
  ds.clusters = meta.clusters;
  ds.directed = meta.directed;
  ds.names = meta.names;
  if (meta.clusters > meta.n) throw LoadError(dir / "meta", 0, "c exceeds n");
  for (int v = 1; v <= meta.views; ++v) {
    const std::string suffix = "_v" + std::to_string(v);
    const fs::path fpath = dir / ("features" + suffix + ".csv");
    if (!fs::exists(fpath)) throw LoadError(fpath, 0, "missing feature file");
    MultiViewDataset::View view;
    view.features = min_max_scale(read_features(fpath, meta.n));
    const fs::path gpath = dir / ("graph" + suffix + ".tsv");
    if (fs::exists(gpath)) {
      view.graph = read_edge_list(gpath, meta.n, meta.directed);
    } else {
      if (options.knn_k >= meta.n) {
        throw LoadError(gpath, 0, "missing graph file and knn_k >= n; cannot build a kNN graph");
      }
      view.graph = knn_graph(view.features, options.knn_k, options.metric);
      ds.notes.push_back("view " + std::to_string(v) + ": no " + gpath.filename().string() + ", using kNN graph (k=" +
                         std::to_string(options.knn_k) + ")");
    }
    ds.views.push_back(std::move(view));
  }
  const fs::path lpath = dir / "labels.txt";
  if (fs::exists(lpath)) {
    Labels labels = read_labels(lpath);
    if (static_cast<Index>(labels.size()) != meta.n) {
      throw LoadError(lpath, 0, "expected " + std::to_string(meta.n) + " labels, got " + std::to_string(labels.size()));
    }
    ds.labels = std::move(labels);
  }
  ds.x_global = concat_features(ds.views);
  ds.validate();
  return ds;
}

void save_dataset(const MultiViewDataset& ds, const fs::path& dir) {
  ds.validate();
  ensure_dir(dir);
  {
    std::ofstream meta = open_out(dir / "meta");
    meta << "n=" << ds.n() << "\nV=" << ds.num_views() << "\nc=" << ds.clusters << "\n";
    if (ds.directed) meta << "directed=1\n";
    if (!ds.names.empty()) {
      meta << "names=";
      for (std::size_t i = 0; i < ds.names.size(); ++i) meta << (i ? "," : "") << ds.names[i];
      meta << "\n";
    }
  }
  for (std::size_t v = 0; v < ds.num_views(); ++v) {
    const std::string suffix = "_v" + std::to_string(v + 1);
    const auto& view = ds.views[v];
    std::ofstream f = open_out(dir / ("features" + suffix + ".csv"));
    for (Index i = 0; i < view.features.rows(); ++i) {
      for (Index j = 0; j < view.features.cols(); ++j) f << (j ? "," : "") << format_double(view.features(i, j));
      f << '\n';
    }
    std::ofstream g = open_out(dir / ("graph" + suffix + ".tsv"));
    for (Index i = 0; i < view.graph.n(); ++i) {
      for (Index j = ds.directed ? 0 : i + 1; j < view.graph.n(); ++j) {
        if (i != j && view.graph.edge(i, j)) g << i << '\t' << j << '\n';
      }
    }
  }
  if (ds.labels) write_labels(dir / "labels.txt", *ds.labels);
}

MultiViewDataset generate_sbm(const SbmParams& p) {
  if (!(p.p_out >= 0.0 && p.p_out < p.p_in && p.p_in <= 1.0)) {
    throw InvalidArgument("generate_sbm: need 0 <= p_out < p_in <= 1");
  }
  if (p.clusters < 1 || p.n < p.clusters) throw InvalidArgument("generate_sbm: need 1 <= c <= n");
  if (p.views < 1) throw InvalidArgument("generate_sbm: need at least one view");
  if (p.feature_dim < 1) throw InvalidArgument("generate_sbm: feature_dim must be positive");
  if (p.feature_noise < 0.0) throw InvalidArgument("generate_sbm: feature_noise must be nonnegative");
  if (!(p.feature_signal >= 0.0 && p.feature_signal <= 1.0)) {
    throw InvalidArgument("generate_sbm: feature_signal must lie in [0,1]");
  }
  if (p.noisy_view && (*p.noisy_view < 0 || *p.noisy_view >= p.views)) {
    throw InvalidArgument("generate_sbm: noisy_view out of range");
  }

  nn::Rng rng = nn::make_stream(p.seed, 0, nn::Stream::synth);
  MultiViewDataset ds;
  ds.clusters = p.clusters;
  Labels labels(static_cast<std::size_t>(p.n));
  for (Index i = 0; i < p.n; ++i) labels[static_cast<std::size_t>(i)] = static_cast<int>((i * p.clusters) / p.n);

  const Index block = std::max<Index>(1, p.feature_dim / p.clusters);
  for (int v = 0; v < p.views; ++v) {
    const bool noisy = p.noisy_view && *p.noisy_view == v;
    Graph g(p.n);
    for (Index i = 0; i < p.n; ++i) {
      for (Index j = i + 1; j < p.n; ++j) {
        const bool same = labels[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(j)];
        const double prob = (same && !noisy) ? p.p_in : p.p_out;
        if (nn::uniform_open01(rng) < prob) {
          g.set_edge(i, j);
          g.set_edge(j, i);
        }
      }
    }
    Matrix x(p.n, p.feature_dim);
    for (Index i = 0; i < p.n; ++i) {
      const Index k = labels[static_cast<std::size_t>(i)];
      for (Index j = 0; j < p.feature_dim; ++j) {
        const bool own_block = j / block == k;
        const bool on = own_block && nn::uniform_open01(rng) < p.feature_signal;
        x(i, j) = p.feature_noise * nn::uniform(rng, 0.0, 1.0) + (on ? 1.0 : 0.0);
      }
    }
    ds.views.push_back({min_max_scale(x.cwiseMin(1.0)), add_self_loops(g)});
    ds.names.push_back(noisy ? "noise" + std::to_string(v + 1) : "view" + std::to_string(v + 1));
  }
  ds.labels = std::move(labels);
  ds.x_global = concat_features(ds.views);
  ds.validate();
  return ds;
}

void write_embedding(const fs::path& path, const Matrix& z) {
  std::ofstream out = open_out(path);
  for (Index i = 0; i < z.rows(); ++i) {
    out << i;
    for (Index j = 0; j < z.cols(); ++j) out << '\t' << format_double(z(i, j));
    out << '\n';
  }
}

void write_weighted_edges(const fs::path& path, const Matrix& weights, double threshold) {
  std::ofstream out = open_out(path);
  for (Index i = 0; i < weights.rows(); ++i) {
    for (Index j = 0; j < weights.cols(); ++j) {
      if (weights(i, j) >= threshold) out << i << '\t' << j << '\t' << format_double(weights(i, j)) << '\n';
    }
  }
}

std::string format_scores(const ClusteringScores& s) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "NMI=%.1f ARI=%.1f ACC=%.1f F1=%.1f", 100.0 * s.nmi, 100.0 * s.ari, 100.0 * s.acc,
                100.0 * s.f1);
  return buf;
}

void save_run(const fs::path& dir, const RunArtifacts& a, bool write_embeddings) {
  ensure_dir(dir);
  write_labels(dir / "labels.txt", a.labels);

  nlohmann::ordered_json report;
  nlohmann::ordered_json config;
  std::istringstream cfg(to_config_text(a.config));
  std::string line;
  while (std::getline(cfg, line)) {
    const auto eq = line.find('=');
    config[line.substr(0, eq)] = line.substr(eq + 1);
  }
  report["config"] = config;
  if (a.scores) {
    report["metrics"] = {{"nmi", a.scores->nmi}, {"ari", a.scores->ari}, {"acc", a.scores->acc}, {"f1", a.scores->f1}};
  } else {
    report["metrics"] = nullptr;
  }
  if (!a.beliefs_history.empty()) report["final_beliefs"] = a.beliefs_history.back();
  report["epochs"] = a.losses.size();
  {
    std::ofstream out = open_out(dir / "metrics.json");
    out << report.dump(2) << '\n';
  }
  {
    std::ofstream out = open_out(dir / "metrics.txt");
    if (a.scores) {
      out << "NMI=" << format_double(a.scores->nmi) << "\nARI=" << format_double(a.scores->ari)
          << "\nACC=" << format_double(a.scores->acc) << "\nF1=" << format_double(a.scores->f1) << "\n";
    }
    out << "epochs=" << a.losses.size() << "\n";
  }
  {
    std::ofstream out = open_out(dir / "beliefs.tsv");
    const std::size_t views = a.beliefs_history.empty() ? 0 : a.beliefs_history.front().size();
    out << "epoch";
    for (std::size_t v = 0; v < views; ++v) out << "\tview" << v + 1;
    out << '\n';
    for (std::size_t t = 0; t < a.beliefs_history.size(); ++t) {
      out << t;
      for (double b : a.beliefs_history[t]) out << '\t' << format_double(b);
      out << '\n';
    }
  }
  {
    std::ofstream out = open_out(dir / "losses.tsv");
    out << "epoch\tL_r\tL_c\tL_E\ttotal\n";
    for (const LossRecord& r : a.losses) {
      out << r.epoch << '\t' << format_double(r.reconstruction) << '\t' << format_double(r.clustering) << '\t'
          << format_double(r.elbo) << '\t' << format_double(r.total) << '\n';
    }
  }
  if (write_embeddings) {
    write_embedding(dir / "z_global.tsv", a.fused_embedding);
    for (std::size_t v = 0; v < a.view_embeddings.size(); ++v) {
      write_embedding(dir / ("z_view" + std::to_string(v + 1) + ".tsv"), a.view_embeddings[v]);
    }
  }
}

}  // namespace vgmgc
