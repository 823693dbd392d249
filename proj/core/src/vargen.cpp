#include "vgmgc/vargen.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace vgmgc {

namespace {

void check_views(std::span<const Graph> graphs, std::span<const double> beliefs) {
  if (graphs.empty()) throw InvalidArgument("compute_prior_beta: no graphs");
  if (graphs.size() != beliefs.size()) {
    throw InvalidArgument("compute_prior_beta: " + std::to_string(graphs.size()) + " graphs but " +
                          std::to_string(beliefs.size()) + " beliefs");
  }
  for (const Graph& g : graphs) {
    if (g.n() != graphs.front().n()) throw ShapeError("compute_prior_beta: graphs differ in node count");
  }
}

}  // namespace

PriorBeta compute_prior_beta(std::span<const Graph> graphs, std::span<const double> beliefs, double eps) {
  check_views(graphs, beliefs);
  double total = 0.0;
  for (double b : beliefs) total += b;
  if (!(total > 0.0)) throw InvalidArgument("compute_prior_beta: beliefs sum to zero");

  const Index n = graphs.front().n();
  Matrix numer = Matrix::Zero(n, n);
  for (std::size_t v = 0; v < graphs.size(); ++v) {
    const double b = beliefs[v];
    const Matrix& a = graphs[v].adjacency();
    numer.array() += b * a.array() + (1.0 - b) * (1.0 - a.array());
  }
  PriorBeta prior;
  prior.epsilon = eps;
  prior.beta = (numer / total).cwiseMax(eps).cwiseMin(1.0);
  return prior;
}

double kl_upper_bound(const PriorBeta& prior) { return -prior.beta.array().log().sum(); }

double view_prior_cross_entropy(std::span<const Graph> graphs, std::span<const double> beliefs, std::size_t view) {
  check_views(graphs, beliefs);
  if (view >= graphs.size()) throw InvalidArgument("view_prior_cross_entropy: view index out of range");
  double total = 0.0;
  for (double b : beliefs) total += b;
  const double b = beliefs[view];
  const Matrix& a = graphs[view].adjacency();
  double h = 0.0;
  for (Index i = 0; i < a.size(); ++i) {
    const double aij = a.data()[i];
    const double p = (b * aij + (1.0 - b) * (1.0 - aij)) / total;
    h += aij * std::log(1.0 / p) + (1.0 - aij) * std::log(1.0 / (1.0 - p));
  }
  return h;
}

PosteriorNet PosteriorNet::create(Index input_dim, Index hidden, double dropout, std::uint64_t seed) {
  nn::MLPSpec spec{{input_dim, hidden, hidden}, {nn::Activation::relu, nn::Activation::none}, dropout,
                   nn::InitScheme::xavier};
  PosteriorNet net;
  net.encoder = nn::Mlp(spec, seed);
  nn::MLPSpec wspec{{hidden, hidden}, {nn::Activation::none}, 0.0, nn::InitScheme::xavier};
  net.w = std::move(nn::init_params(wspec, nn::mix_seed(seed, 0x57))[0]);
  return net;
}

std::vector<nn::ParamMatrix*> PosteriorNet::parameters() {
  std::vector<nn::ParamMatrix*> out;
  for (auto& p : encoder.params) out.push_back(&p);
  out.push_back(&w);
  return out;
}

PosteriorLogits infer_posterior(nn::Tape& tape, Var x_global, PosteriorNet& net, bool training, nn::Rng& rng) {
  Var k = net.encoder(tape, x_global, training, rng);
  Var q = nn::matmul(k, tape.leaf(net.w));
  return {nn::matmul_nt(k, q), k, q};
}

Matrix logistic_noise(Index rows, Index cols, nn::Rng& rng) {
  Matrix noise(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) {
      const double u = nn::uniform_open01(rng);
      noise(i, j) = std::log(u) - std::log1p(-u);
    }
  }
  return noise;
}

ConsensusSample relax_with_noise(nn::Tape& tape, Var alpha, const Matrix& noise, double tau) {
  if (!(tau > 0.0)) throw InvalidArgument("sample_consensus: temperature must be positive");
  (void)tape;
  Var logits = nn::clamp(nn::scale(nn::add_const(alpha, noise), 1.0 / tau), -logit_limit, logit_limit);
  return {nn::sigmoid(logits), logits, tau};
}

ConsensusSample sample_consensus(nn::Tape& tape, Var alpha, double tau, nn::Rng& rng, SampleMode mode) {
  if (!(tau > 0.0)) throw InvalidArgument("sample_consensus: temperature must be positive");
  Matrix noise = mode == SampleMode::train ? logistic_noise(alpha.rows(), alpha.cols(), rng)
                                           : Matrix::Zero(alpha.rows(), alpha.cols());
  return relax_with_noise(tape, alpha, noise, tau);
}

double consensus_entropy(const Matrix& s) {
  double h = 0.0;
  for (Index i = 0; i < s.size(); ++i) {
    const double p = s.data()[i];
    if (p > 0.0 && p < 1.0) h -= p * std::log(p) + (1.0 - p) * std::log1p(-p);
  }
  return h;
}

Var consensus_entropy(const ConsensusSample& sample) { return nn::bernoulli_entropy_from_logits_sum(sample.logits); }

Matrix decode_adjacency(const Matrix& z) { return nn::sigmoid(Matrix(z * z.transpose())); }

Var decode_adjacency_logits(Var z) { return nn::matmul_nt(z, z); }

Var elbo_loss(nn::Tape& tape, std::span<const Graph> graphs, std::span<const Var> decoded_logits,
              const ConsensusSample& sample, const PriorBeta& prior) {
  if (graphs.size() != decoded_logits.size()) throw InvalidArgument("elbo_loss: one decoded graph per view required");
  Var total = consensus_entropy(sample);
  for (std::size_t v = 0; v < graphs.size(); ++v) {
    total = nn::sub(total, nn::bce_with_logits_sum(decoded_logits[v], graphs[v].adjacency()));
  }
  Matrix kl(1, 1);
  kl(0, 0) = kl_upper_bound(prior);
  return nn::sub(total, tape.constant(std::move(kl)));
}

}  // namespace vgmgc
