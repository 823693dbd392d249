#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "vgmgc/graph.hpp"
#include "vgmgc/nn/mlp.hpp"
#include "vgmgc/nn/tape.hpp"

namespace vgmgc {

using nn::Var;

/// Bernoulli prior over consensus edges, built from the observed graphs and
/// their beliefs, clamped into [epsilon, 1].
struct PriorBeta {
  Matrix beta;
  double epsilon = 1e-6;
};

/// beta_ij = sum_v [b_v a^v_ij + (1 - b_v)(1 - a^v_ij)] / sum_v b_v, clamped to [eps, 1].
PriorBeta compute_prior_beta(std::span<const Graph> graphs, std::span<const double> beliefs, double eps = 1e-6);

/// sum_ij log(1 / beta_ij): upper bound on KL(q(S) || p(S)).
double kl_upper_bound(const PriorBeta& prior);

/// Cross entropy between graph `view` and the belief-weighted edge
/// probability that view contributes to the prior,
///   p_ij = [b_v a_ij + (1 - b_v)(1 - a_ij)] / sum_k b_k.
/// Decreases strictly as b_v grows with the other beliefs fixed.
double view_prior_cross_entropy(std::span<const Graph> graphs, std::span<const double> beliefs, std::size_t view);

/// Posterior network: K = f'(X_global), Q = K W, alpha = K Q^T.
struct PosteriorNet {
  nn::Mlp encoder;
  nn::ParamMatrix w;

  /// Three-layer f' (input -> hidden -> hidden) with relu on the hidden layer,
  /// dropout after each layer and Xavier init for every parameter including W.
  static PosteriorNet create(Index input_dim, Index hidden, double dropout, std::uint64_t seed);

  Index embed_dim() const { return encoder.spec.output_dim(); }
  std::vector<nn::ParamMatrix*> parameters();
};

struct PosteriorLogits {
  Var alpha;
  Var k_embed;
  Var q_embed;
};

PosteriorLogits infer_posterior(nn::Tape& tape, Var x_global, PosteriorNet& net, bool training, nn::Rng& rng);

enum class SampleMode { train, eval };

/// Relaxed consensus edges s = sigmoid(logits) with logits = (log U - log(1-U) + alpha) / tau.
struct ConsensusSample {
  Var s;
  Var logits;
  double tau = 1.0;
};

/// Relaxed logits are clamped to +-logit_limit so 0 < s < 1 holds in floating point.
inline constexpr double logit_limit = 30.0;

/// log U - log(1 - U) for U ~ Uniform(0,1), one entry per edge.
Matrix logistic_noise(Index rows, Index cols, nn::Rng& rng);

/// Train mode draws fresh noise; eval mode fixes U = 0.5 (the distribution median).
ConsensusSample sample_consensus(nn::Tape& tape, Var alpha, double tau, nn::Rng& rng, SampleMode mode);

/// Reparameterized sample with caller-supplied logistic noise.
ConsensusSample relax_with_noise(nn::Tape& tape, Var alpha, const Matrix& noise, double tau);

/// sum_ij H_b(s_ij), with 0 log 0 = 0.
double consensus_entropy(const Matrix& s);
Var consensus_entropy(const ConsensusSample& sample);

/// sigmoid(Z Z^T).
Matrix decode_adjacency(const Matrix& z);
/// Z Z^T, the logits behind decode_adjacency.
Var decode_adjacency_logits(Var z);

/// L_E = -sum_v BCE(A^v, sigmoid(decoded_logits_v)) + H(S) - sum_ij log(1/beta_ij).
/// Decoded probabilities are clamped to [1e-7, 1 - 1e-7]. Training maximizes L_E.
Var elbo_loss(nn::Tape& tape, std::span<const Graph> graphs, std::span<const Var> decoded_logits,
              const ConsensusSample& sample, const PriorBeta& prior);

}  // namespace vgmgc
