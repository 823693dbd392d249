#pragma once

#include <cstdint>
#include <vector>

#include "vgmgc/graph.hpp"
#include "vgmgc/nn/mlp.hpp"
#include "vgmgc/nn/tape.hpp"

namespace vgmgc {

using nn::Var;

/// psi(X, A) = (A^0 + A^1 + ... + A^order + I) X, evaluated by repeated
/// products with A; powers of A are never formed.
Matrix message_pass(const Matrix& x, const NormalizedGraph& a_norm, int order);

/// Differentiable variant; gradients flow into both `x` and `a_norm`.
Var message_pass(Var x, Var a_norm, int order);

/// Per-view embedding network f_v and its feature decoder.
struct ViewEncoder {
  nn::Mlp embed;    ///< [2 d_v -> hidden -> D], relu hidden, Kaiming
  nn::Mlp decoder;  ///< [D -> hidden -> d_v] logits, Kaiming

  static ViewEncoder create(Index feature_dim, Index hidden, Index embed_dim, std::uint64_t seed);
  Index embed_dim() const { return embed.spec.output_dim(); }
  std::vector<nn::ParamMatrix*> parameters();
};

/// Decoder for the global features from Q; mirrors the posterior network.
nn::Mlp make_global_decoder(Index q_dim, Index hidden, Index global_dim, double dropout, std::uint64_t seed);

/// Z^v = f_v(Concat(psi(X^v, A^v), psi(X^v, S))).
Var encode_view(nn::Tape& tape, const Matrix& x_v, const NormalizedGraph& a_norm_v, Var s_norm, nn::Mlp& f_v,
                int order, bool training, nn::Rng& rng);

/// Same as encode_view, reusing a precomputed psi(X^v, A^v).
Var encode_view_cached(nn::Tape& tape, const Matrix& x_v, const Matrix& specific_embedding, Var s_norm,
                       nn::Mlp& f_v, int order, bool training, nn::Rng& rng);

/// BCE(x, sigmoid(decoder(z))), summed over entries. `x` must lie in [0,1].
/// Serves as L_r^v (z = Z^v) and as L_r' (z = Q, x = global features).
Var reconstruction_loss(nn::Tape& tape, const Matrix& x, Var z, nn::Mlp& decoder, bool training, nn::Rng& rng);

}  // namespace vgmgc
