#include <doctest.h>

#include <array>
#include <cmath>
#include <limits>

#include "test_util.hpp"
#include "vgmgc/nn/gradcheck.hpp"
#include "vgmgc/vargen.hpp"

using namespace vgmgc;
using testutil::random_graph;
using testutil::random_matrix;

namespace {

Graph single_entry(bool edge) {
  Graph g(1);
  g.set_edge(0, 0, edge);
  return g;
}

double binary_entropy(double p) { return -(p * std::log(p) + (1.0 - p) * std::log(1.0 - p)); }

}  // namespace

TEST_CASE("prior beta examples") {
  const std::array<double, 2> ones{1.0, 1.0};
  const std::array<Graph, 2> agree{single_entry(true), single_entry(true)};
  CHECK(compute_prior_beta(agree, ones).beta(0, 0) == 1.0);

  const std::array<Graph, 2> disagree{single_entry(true), single_entry(false)};
  CHECK(compute_prior_beta(disagree, ones).beta(0, 0) == 0.5);

  // Raw value 1.8 / 0.2 = 9 is clamped back to 1.
  const std::array<Graph, 2> absent{single_entry(false), single_entry(false)};
  const std::array<double, 2> low{0.1, 0.1};
  CHECK(compute_prior_beta(absent, low).beta(0, 0) == 1.0);

  const std::array<double, 2> zero{0.0, 0.0};
  CHECK_THROWS_AS(compute_prior_beta(agree, zero), InvalidArgument);
  const std::array<double, 1> short_beliefs{1.0};
  CHECK_THROWS_AS(compute_prior_beta(agree, short_beliefs), InvalidArgument);
}

TEST_CASE("prior beta stays in [eps, 1] and is symmetric for symmetric graphs") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const std::array<Graph, 3> graphs{random_graph(12, 0.3, seed), random_graph(12, 0.5, seed + 100),
                                      random_graph(12, 0.1, seed + 200)};
    nn::Rng rng(seed);
    const std::array<double, 3> beliefs{nn::uniform(rng, 0.01, 1.0), nn::uniform(rng, 0.01, 1.0), 1.0};
    const PriorBeta prior = compute_prior_beta(graphs, beliefs);
    CHECK(prior.beta.minCoeff() >= prior.epsilon);
    CHECK(prior.beta.maxCoeff() <= 1.0);
    CHECK(prior.beta == prior.beta.transpose());
  }
}

TEST_CASE("kl_upper_bound examples") {
  PriorBeta all_one{Matrix::Ones(3, 3), 1e-6};
  CHECK(kl_upper_bound(all_one) == 0.0);
  PriorBeta half{Matrix::Constant(1, 1, 0.5), 1e-6};
  CHECK(kl_upper_bound(half) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
}

TEST_CASE("two equally believed graphs obey the closed form") {
  // Agreeing edges give beta = 1, disagreements 1/(2b), shared non-edges (1-b)/b.
  for (double b : {0.6, 0.7, 0.9}) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const std::array<Graph, 2> g{random_graph(30, 0.4, seed, false), random_graph(30, 0.4, seed + 50, false)};
      double d_ham = 0.0, shared_absent = 0.0;
      for (Index i = 0; i < 30; ++i) {
        for (Index j = 0; j < 30; ++j) {
          d_ham += g[0].edge(i, j) != g[1].edge(i, j) ? 1.0 : 0.0;
          shared_absent += (!g[0].edge(i, j) && !g[1].edge(i, j)) ? 1.0 : 0.0;
        }
      }
      const std::array<double, 2> beliefs{b, b};
      const double closed = d_ham * std::log(2.0 * b) + shared_absent * std::log(b / (1.0 - b));
      CHECK(kl_upper_bound(compute_prior_beta(g, beliefs)) == doctest::Approx(closed).epsilon(1e-12));
    }
  }
}

TEST_CASE("kl bound grows as shared edges turn into disagreements") {
  // Dropping a shared edge from one graph moves that entry from log 1 to
  // log 2b. (Turning a shared non-edge into a disagreement lowers the bound
  // for b > 0.5, so the sweep only touches shared edges.)
  const Graph base = random_graph(10, 0.6, 4);
  Graph other = base;
  const std::array<double, 2> beliefs{0.7, 0.7};
  double previous = kl_upper_bound(compute_prior_beta(std::array<Graph, 2>{base, other}, beliefs));
  int flips = 0;
  for (Index i = 0; i < 10; ++i) {
    for (Index j = 0; j < 10; ++j) {
      if (!base.edge(i, j)) continue;
      other.set_edge(i, j, false);
      const double now = kl_upper_bound(compute_prior_beta(std::array<Graph, 2>{base, other}, beliefs));
      CHECK(now > previous);
      previous = now;
      ++flips;
    }
  }
  CHECK(flips > 20);
}

TEST_CASE("view cross entropy falls as the view's belief rises") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const std::array<Graph, 3> graphs{random_graph(15, 0.2, seed), random_graph(15, 0.4, seed + 10),
                                      random_graph(15, 0.3, seed + 20)};
    double previous = std::numeric_limits<double>::infinity();
    for (int step = 1; step <= 9; ++step) {
      std::array<double, 3> beliefs{0.5, 0.1 * step, 0.5};
      const double h = view_prior_cross_entropy(graphs, beliefs, 1);
      CHECK(h < previous);
      previous = h;
    }
  }
}

TEST_CASE("posterior logits are K Q^T") {
  PosteriorNet net = PosteriorNet::create(6, 6, 0.1, 3);
  const Matrix x = random_matrix(5, 6, 1, 0.0, 1.0);
  nn::Tape tape;
  nn::Rng rng(0);
  const PosteriorLogits post = infer_posterior(tape, tape.constant(x), net, false, rng);
  CHECK(post.alpha.rows() == 5);
  CHECK(post.alpha.cols() == 5);
  CHECK((post.alpha.value() - post.k_embed.value() * post.q_embed.value().transpose()).cwiseAbs().maxCoeff() == 0.0);

  // Identity f' (nonnegative inputs survive the relu) and W = I give the Gram matrix.
  net.encoder.params[0].value = Matrix::Identity(6, 6);
  net.encoder.params[2].value = Matrix::Identity(6, 6);
  net.w.value = Matrix::Identity(6, 6);
  nn::Tape t2;
  const PosteriorLogits gram = infer_posterior(t2, t2.constant(x), net, false, rng);
  CHECK((gram.alpha.value() - x * x.transpose()).cwiseAbs().maxCoeff() <= 1e-15);

  nn::Tape t3;
  CHECK_THROWS_AS(infer_posterior(t3, t3.constant(random_matrix(5, 4, 2)), net, false, rng), ShapeError);
}

TEST_CASE("consensus sampling") {
  nn::Tape tape;
  nn::Rng rng(1);
  Matrix alpha(1, 2);
  alpha << 0.0, 2.0;
  const ConsensusSample eval1 = sample_consensus(tape, tape.constant(alpha), 1.0, rng, SampleMode::eval);
  CHECK(eval1.s.value()(0, 0) == 0.5);
  CHECK(eval1.s.value()(0, 1) == doctest::Approx(0.8807970779778823).epsilon(1e-15));
  const ConsensusSample eval7 = sample_consensus(tape, tape.constant(alpha), 7.0, rng, SampleMode::eval);
  CHECK(eval7.s.value()(0, 0) == 0.5);

  CHECK_THROWS_AS(sample_consensus(tape, tape.constant(alpha), 0.0, rng, SampleMode::train), InvalidArgument);
  CHECK_THROWS_AS(sample_consensus(tape, tape.constant(alpha), -1.0, rng, SampleMode::eval), InvalidArgument);

  const Matrix extreme = random_matrix(20, 20, 5, -1e4, 1e4);
  const ConsensusSample s = sample_consensus(tape, tape.constant(extreme), 0.1, rng, SampleMode::train);
  CHECK(s.s.value().minCoeff() > 0.0);
  CHECK(s.s.value().maxCoeff() < 1.0);
}

TEST_CASE("consensus sample is reparameterized") {
  nn::ParamMatrix alpha(random_matrix(4, 4, 2, -2.0, 2.0));
  nn::Rng rng(3);
  const Matrix noise = logistic_noise(4, 4, rng);
  const Matrix target = random_matrix(4, 4, 4, 0.0, 1.0);
  nn::LossBuilder loss = [&](nn::Tape& tape) {
    const ConsensusSample s = relax_with_noise(tape, tape.leaf(alpha), noise, 0.7);
    return nn::sum(nn::mul_const(s.s, target));
  };
  std::array<nn::ParamMatrix*, 1> params{&alpha};
  CHECK(nn::grad_check(loss, params).max_rel_error <= 1e-6);
  CHECK(alpha.grad.cwiseAbs().minCoeff() > 0.0);
}

TEST_CASE("consensus entropy examples") {
  CHECK(consensus_entropy(Matrix::Constant(2, 2, 0.5)) == doctest::Approx(4.0 * std::log(2.0)).epsilon(1e-15));
  Matrix s(2, 2);
  s << 0.9, 0.1, 0.1, 0.9;
  CHECK(consensus_entropy(s) == doctest::Approx(4.0 * binary_entropy(0.1)).epsilon(1e-14));
  CHECK(consensus_entropy(s) == doctest::Approx(1.3005).epsilon(1e-4));
  Matrix edge(1, 2);
  edge << 0.0, 1.0;
  CHECK(consensus_entropy(edge) == 0.0);

  nn::Tape tape;
  nn::Rng rng(2);
  const ConsensusSample sample =
      sample_consensus(tape, tape.constant(random_matrix(6, 6, 8, -3.0, 3.0)), 2.0, rng, SampleMode::train);
  CHECK(consensus_entropy(sample).scalar() == doctest::Approx(consensus_entropy(sample.s.value())).epsilon(1e-12));
}

TEST_CASE("decode_adjacency") {
  CHECK(decode_adjacency(Matrix::Zero(3, 4)) == Matrix::Constant(3, 3, 0.5));
  const Matrix decoded = decode_adjacency(Matrix::Identity(3, 3));
  for (Index i = 0; i < 3; ++i) {
    for (Index j = 0; j < 3; ++j) {
      CHECK(decoded(i, j) == doctest::Approx(i == j ? 0.7310585786300049 : 0.5).epsilon(1e-15));
    }
  }
  const Matrix z = random_matrix(7, 3, 9);
  const Matrix a = decode_adjacency(z);
  CHECK(a == a.transpose());
}

TEST_CASE("elbo combines its three terms") {
  const std::array<Graph, 2> graphs{add_self_loops(random_graph(5, 0.4, 1)), add_self_loops(random_graph(5, 0.4, 2))};
  const std::array<double, 2> beliefs{1.0, 0.6};
  const PriorBeta prior = compute_prior_beta(graphs, beliefs);
  const Matrix z1 = random_matrix(5, 3, 3), z2 = random_matrix(5, 3, 4);
  nn::Tape tape;
  nn::Rng rng(0);
  const ConsensusSample s = sample_consensus(tape, tape.constant(random_matrix(5, 5, 5)), 1.5, rng, SampleMode::train);
  const std::array<Var, 2> decoded{decode_adjacency_logits(tape.constant(z1)),
                                   decode_adjacency_logits(tape.constant(z2))};
  const double value = elbo_loss(tape, graphs, decoded, s, prior).scalar();

  double bce = 0.0;
  for (std::size_t v = 0; v < 2; ++v) {
    const Matrix p = decode_adjacency(v == 0 ? z1 : z2);
    for (Index i = 0; i < p.size(); ++i) {
      const double a = graphs[v].adjacency().data()[i];
      bce -= a * std::log(p.data()[i]) + (1.0 - a) * std::log(1.0 - p.data()[i]);
    }
  }
  double kl = 0.0;
  for (Index i = 0; i < prior.beta.size(); ++i) kl += std::log(1.0 / prior.beta.data()[i]);
  CHECK(value == doctest::Approx(-bce + consensus_entropy(s.s.value()) - kl).epsilon(1e-12));
}

TEST_CASE("elbo limit with perfect reconstruction") {
  constexpr Index n = 4;
  // A complete graph at full belief puts every beta at 1.
  const Graph g = Graph::from_adjacency(Matrix::Ones(n, n));
  const std::array<Graph, 1> graphs{g};
  const std::array<double, 1> beliefs{1.0};
  const PriorBeta prior = compute_prior_beta(graphs, beliefs);
  CHECK(prior.beta == Matrix::Ones(n, n));
  nn::Tape tape;
  nn::Rng rng(0);
  const ConsensusSample s = sample_consensus(tape, tape.constant(Matrix::Zero(n, n)), 1.0, rng, SampleMode::eval);
  const Matrix logits = Matrix::Constant(n, n, 1e3);
  const std::array<Var, 1> decoded{tape.constant(logits)};
  const double value = elbo_loss(tape, graphs, decoded, s, prior).scalar();
  // Each reconstructed entry costs -log(1 - 1e-7) at the probability clamp.
  CHECK(value == doctest::Approx(n * n * std::log(2.0)).epsilon(1e-6));
}
