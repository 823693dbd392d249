#include "vgmgc/verify.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <sstream>

#include "vgmgc/cluster.hpp"
#include "vgmgc/dataio.hpp"
#include "vgmgc/metrics.hpp"
#include "vgmgc/nn/gradcheck.hpp"
#include "vgmgc/nn/rng.hpp"
#include "vgmgc/trainer.hpp"
#include "vgmgc/vargen.hpp"

namespace vgmgc::verify {

namespace {

using Clock = std::chrono::steady_clock;

Check at_most(std::string name, double measured, double tolerance) {
  return {std::move(name), measured, tolerance, "<=", measured <= tolerance};
}

Check below(std::string name, double measured, double bound) {
  return {std::move(name), measured, bound, "<", measured < bound};
}

Check equal(std::string name, double measured, double expected) {
  return {std::move(name), measured, expected, "==", measured == expected};
}

nn::Rng suite_rng(std::uint64_t seed, std::uint64_t suite) { return nn::make_stream(seed, suite, nn::Stream::verify); }

Graph random_graph(Index n, double density, nn::Rng& rng) {
  Graph g(n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) g.set_edge(i, j, nn::uniform_open01(rng) < density);
  }
  return g;
}

Graph random_symmetric_graph(Index n, double density, nn::Rng& rng) {
  Graph g(n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      const bool e = nn::uniform_open01(rng) < density;
      g.set_edge(i, j, e);
      g.set_edge(j, i, e);
    }
  }
  return add_self_loops(g);
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// ---------------------------------------------------------------------------
// Independent metric implementations: label maps instead of compacted
// tables, pair counting by enumeration, exhaustive matching.

double entropy_of(const std::map<int, double>& counts, double n) {
  double h = 0.0;
  for (const auto& [label, c] : counts) h -= (c / n) * std::log(c / n);
  return h;
}

double oracle_nmi(const Labels& a, const Labels& b) {
  std::map<int, double> ca, cb;
  std::map<std::pair<int, int>, double> joint;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ca[a[i]] += 1.0;
    cb[b[i]] += 1.0;
    joint[{a[i], b[i]}] += 1.0;
  }
  const double n = static_cast<double>(a.size());
  const double ha = entropy_of(ca, n);
  const double hb = entropy_of(cb, n);
  if (ha == 0.0 && hb == 0.0) return 1.0;
  if (ha == 0.0 || hb == 0.0) return 0.0;
  // I(A;B) = H(A) + H(B) - H(A,B)
  double hab = 0.0;
  for (const auto& [key, c] : joint) hab -= (c / n) * std::log(c / n);
  return (ha + hb - hab) / std::sqrt(ha * hb);
}

double oracle_ari(const Labels& a, const Labels& b) {
  const std::size_t n = a.size();
  double both = 0.0, same_a = 0.0, same_b = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool sa = a[i] == a[j];
      const bool sb = b[i] == b[j];
      both += (sa && sb) ? 1.0 : 0.0;
      same_a += sa ? 1.0 : 0.0;
      same_b += sb ? 1.0 : 0.0;
    }
  }
  const double pairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
  const double expected = pairs > 0.0 ? same_a * same_b / pairs : 0.0;
  const double denom = 0.5 * (same_a + same_b) - expected;
  if (denom == 0.0) return 1.0;
  return (both - expected) / denom;
}

double brute_force_acc(const Labels& truth, const Labels& pred) {
  std::vector<int> classes(truth.begin(), truth.end());
  std::vector<int> clusters(pred.begin(), pred.end());
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  std::sort(clusters.begin(), clusters.end());
  clusters.erase(std::unique(clusters.begin(), clusters.end()), clusters.end());
  const std::size_t k = std::max(classes.size(), clusters.size());
  // perm[p] = index of the class assigned to cluster p; indices past the real
  // classes stand for "unmatched".
  std::vector<std::size_t> perm(k);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::size_t best = 0;
  do {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      const auto p = static_cast<std::size_t>(std::lower_bound(clusters.begin(), clusters.end(), pred[i]) -
                                              clusters.begin());
      const std::size_t cls = perm[p];
      if (cls < classes.size() && classes[cls] == truth[i]) ++hits;
    }
    best = std::max(best, hits);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return static_cast<double>(best) / static_cast<double>(truth.size());
}

}  // namespace

bool SuiteReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

std::string SuiteReport::format() const {
  std::ostringstream out;
  for (const Check& c : checks) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g %s %.6g", c.measured, c.relation.c_str(), c.tolerance);
    out << (c.pass ? "PASS " : "FAIL ") << suite << '/' << c.name << ": " << buf << '\n';
  }
  return out.str();
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"theorem1", "theorem2", "temperature", "gradients", "metrics-oracle"};
  return names;
}

SuiteReport run_suite(const std::string& name, std::uint64_t seed) {
  if (name == "theorem1") return theorem1(seed);
  if (name == "theorem2") return theorem2(seed);
  if (name == "temperature") return temperature(seed);
  if (name == "gradients") return gradients(seed);
  if (name == "metrics-oracle") return metrics_oracle(seed);
  throw InvalidArgument("unknown verify suite '" + name + "'");
}

SuiteReport theorem1(std::uint64_t seed) {
  const auto start = Clock::now();
  SuiteReport report{"theorem1", {}, 0.0};
  nn::Rng rng = suite_rng(seed, 1);
  constexpr Index n = 30;
  constexpr int pairs = 50;
  for (double b : {0.6, 0.7, 0.9}) {
    double worst = 0.0;
    for (int t = 0; t < pairs; ++t) {
      const double density = nn::uniform(rng, 0.1, 0.9);
      const std::array<Graph, 2> graphs{random_graph(n, density, rng), random_graph(n, density, rng)};
      const std::array<double, 2> beliefs{b, b};
      const double bound = kl_upper_bound(compute_prior_beta(graphs, beliefs));
      const auto d_ham = static_cast<double>(hamming_distance(graphs[0], graphs[1]));
      const double k = ((graphs[0].adjacency().array() == 0.0) && (graphs[1].adjacency().array() == 0.0)).count();
      const double closed = d_ham * std::log(2.0 * b) + k * std::log(b / (1.0 - b));
      worst = std::max(worst, std::abs(bound - closed));
    }
    char name[64];
    std::snprintf(name, sizeof(name), "max |bound - closed form| (b=%.1f, %d pairs)", b, pairs);
    report.checks.push_back(at_most(name, worst, 1e-9));
  }
  report.seconds = seconds_since(start);
  return report;
}

SuiteReport theorem2(std::uint64_t seed) {
  const auto start = Clock::now();
  SuiteReport report{"theorem2", {}, 0.0};
  nn::Rng rng = suite_rng(seed, 2);
  constexpr int instances = 20;
  constexpr Index n = 25;
  double worst_step = -std::numeric_limits<double>::infinity();
  int decreasing = 0;
  for (int t = 0; t < instances; ++t) {
    std::vector<Graph> graphs;
    for (int v = 0; v < 3; ++v) graphs.push_back(random_symmetric_graph(n, nn::uniform(rng, 0.05, 0.5), rng));
    const std::size_t view = nn::uniform_index(rng, 3);
    double prev = std::numeric_limits<double>::infinity();
    bool ok = true;
    for (int step = 1; step <= 9; ++step) {
      std::vector<double> beliefs(3, 0.5);
      beliefs[view] = 0.1 * step;
      const double h = view_prior_cross_entropy(graphs, beliefs, view);
      if (step > 1) {
        worst_step = std::max(worst_step, h - prev);
        ok = ok && h < prev;
      }
      prev = h;
    }
    decreasing += ok ? 1 : 0;
  }
  report.checks.push_back(below("largest step of H(A^v, beta) along b^v = 0.1..0.9", worst_step, 0.0));
  report.checks.push_back(equal("instances strictly decreasing", decreasing, instances));
  report.seconds = seconds_since(start);
  return report;
}

SuiteReport temperature(std::uint64_t seed) {
  const auto start = Clock::now();
  SuiteReport report{"temperature", {}, 0.0};
  nn::Rng rng = suite_rng(seed, 3);
  constexpr Index n = 50;
  constexpr std::size_t draws = 100000;
  Matrix alpha(n, n);
  for (Index i = 0; i < alpha.size(); ++i) alpha.data()[i] = nn::uniform(rng, -1.0, 1.0);
  // Entry i of the draw sequence samples alpha at (i mod n^2); the same
  // logistic noise is reused for every temperature.
  std::vector<double> noise(draws);
  for (double& e : noise) {
    const double u = nn::uniform_open01(rng);
    e = std::log(u) - std::log1p(-u);
  }
  const std::array<double, 7> taus{0.1, 1.0, 2.0, 5.0, 10.0, 50.0, 100.0};
  std::vector<double> variances;
  for (double tau : taus) {
    double mean = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < draws; ++i) {
      const double a = alpha.data()[static_cast<Index>(i % static_cast<std::size_t>(alpha.size()))];
      const double s = nn::sigmoid(std::clamp((noise[i] + a) / tau, -logit_limit, logit_limit));
      const double delta = s - mean;
      mean += delta / static_cast<double>(i + 1);
      m2 += delta * (s - mean);
    }
    variances.push_back(m2 / static_cast<double>(draws - 1));
    if (tau >= 5.0) {
      char name[64];
      std::snprintf(name, sizeof(name), "|mean(s) - 0.5| at tau=%g", tau);
      report.checks.push_back(at_most(name, std::abs(mean - 0.5), 0.01));
    }
  }
  for (std::size_t k = 1; k < taus.size(); ++k) {
    char name[96];
    std::snprintf(name, sizeof(name), "var(s) change from tau=%g to tau=%g", taus[k - 1], taus[k]);
    report.checks.push_back(below(name, variances[k] - variances[k - 1], 0.0));
  }
  // Near zero temperature the sample is an edge with probability sigmoid(alpha).
  double above_half = 0.0, expected = 0.0;
  for (std::size_t i = 0; i < draws; ++i) {
    const double a = alpha.data()[static_cast<Index>(i % static_cast<std::size_t>(alpha.size()))];
    const double u = nn::uniform_open01(rng);
    const double s = nn::sigmoid(std::clamp((std::log(u) - std::log1p(-u) + a) / 0.01, -logit_limit, logit_limit));
    above_half += s > 0.5 ? 1.0 : 0.0;
    expected += nn::sigmoid(a);
  }
  report.checks.push_back(at_most("|P(s > 0.5) - mean sigmoid(alpha)| at tau=0.01",
                                  std::abs(above_half - expected) / static_cast<double>(draws), 0.02));
  report.seconds = seconds_since(start);
  return report;
}

SuiteReport gradients(std::uint64_t seed) {
  const auto start = Clock::now();
  SuiteReport report{"gradients", {}, 0.0};
  nn::Rng rng = suite_rng(seed, 4);
  constexpr Index n = 8;
  constexpr Index d = 5;
  MultiViewDataset ds;
  ds.clusters = 2;
  for (int v = 0; v < 2; ++v) {
    Matrix x(n, d);
    for (Index i = 0; i < x.size(); ++i) x.data()[i] = nn::uniform(rng, 0.0, 1.0);
    ds.views.push_back({x, random_symmetric_graph(n, 0.4, rng)});
  }
  ds.x_global = concat_features(ds.views);

  RunConfig config;
  config.hidden = 7;
  config.embed_dim = 6;
  config.dropout = 0.0;
  config.restarts = 2;
  config.seed = seed;
  TrainState state = TrainState::init(ds, config);
  const EpochConstants constants = prepare_epoch(state, ds, config);
  const std::vector<nn::ParamMatrix*> params = state.parameters();

  auto check_term = [&](const char* name, const RunConfig& cfg, Var ObjectiveTerms::*term) {
    const nn::LossBuilder loss = [&, term](nn::Tape& tape) {
      nn::Rng unused(0);
      return build_objective(tape, state, ds, cfg, constants, true, unused).*term;
    };
    const nn::GradCheckReport r = nn::grad_check(loss, params, 1e-5);
    report.checks.push_back(at_most(name, r.max_rel_error, 1e-4));
  };
  check_term("full objective, max relative error", config, &ObjectiveTerms::total);
  check_term("L_r alone, max relative error", config, &ObjectiveTerms::reconstruction);
  check_term("L_c alone, max relative error", config, &ObjectiveTerms::clustering);
  check_term("L_E alone, max relative error", config, &ObjectiveTerms::elbo);
  report.seconds = seconds_since(start);
  return report;
}

SuiteReport metrics_oracle(std::uint64_t seed) {
  const auto start = Clock::now();
  SuiteReport report{"metrics-oracle", {}, 0.0};
  nn::Rng rng = suite_rng(seed, 5);
  constexpr int instances = 100;
  int acc_equal = 0;
  double nmi_err = 0.0, ari_err = 0.0;
  for (int t = 0; t < instances; ++t) {
    const std::size_t n = 2 + nn::uniform_index(rng, 29);
    const int c_true = 1 + static_cast<int>(nn::uniform_index(rng, 5));
    const int c_pred = 1 + static_cast<int>(nn::uniform_index(rng, 5));
    Labels truth(n), pred(n);
    for (std::size_t i = 0; i < n; ++i) {
      truth[i] = static_cast<int>(nn::uniform_index(rng, static_cast<std::uint64_t>(c_true))) * 3;
      pred[i] = static_cast<int>(nn::uniform_index(rng, static_cast<std::uint64_t>(c_pred))) + 7;
    }
    acc_equal += acc(truth, pred) == brute_force_acc(truth, pred) ? 1 : 0;
    nmi_err = std::max(nmi_err, std::abs(nmi(truth, pred) - oracle_nmi(truth, pred)));
    ari_err = std::max(ari_err, std::abs(ari(truth, pred) - oracle_ari(truth, pred)));
  }
  report.checks.push_back(equal("instances with Hungarian ACC == exhaustive ACC", acc_equal, instances));
  report.checks.push_back(at_most("max |NMI - oracle NMI|", nmi_err, 1e-12));
  report.checks.push_back(at_most("max |ARI - oracle ARI|", ari_err, 1e-12));
  report.seconds = seconds_since(start);
  return report;
}

}  // namespace vgmgc::verify
