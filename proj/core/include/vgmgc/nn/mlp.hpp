#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "vgmgc/nn/matrix.hpp"
#include "vgmgc/nn/rng.hpp"
#include "vgmgc/nn/tape.hpp"

namespace vgmgc::nn {

enum class Activation { relu, sigmoid, none };
enum class InitScheme { xavier, kaiming };

/// Shape and regularization of a fully connected network.
///
/// `layer_dims` lists neuron counts from input to output, so a three-layer
/// net `input -> hidden -> output` has two weight matrices. `activations`
/// holds one entry per weight matrix. When `dropout_rate > 0` every layer
/// output is followed by inverted dropout in training mode.
struct MLPSpec {
  std::vector<Index> layer_dims;
  std::vector<Activation> activations;
  double dropout_rate = 0.0;
  InitScheme init = InitScheme::xavier;

  std::size_t num_layers() const { return layer_dims.size() - 1; }
  Index input_dim() const { return layer_dims.front(); }
  Index output_dim() const { return layer_dims.back(); }
  /// Throws InvalidArgument when the spec is malformed.
  void validate() const;
};

/// Parameters laid out as [W0, b0, W1, b1, ...]; W_l is in x out, b_l is 1 x out.
/// Weights follow the init scheme (uniform variants), biases are zero.
std::vector<ParamMatrix> init_params(const MLPSpec& spec, std::uint64_t seed);

/// Forward pass on a tape. Dropout masks are drawn from `rng` only when `training`.
Var mlp_apply(Tape& tape, std::span<ParamMatrix> params, const MLPSpec& spec, Var input, bool training,
              Rng& rng);

/// Eval-mode forward on plain values.
Matrix mlp_apply(std::span<const ParamMatrix> params, const MLPSpec& spec, const Matrix& input);

/// Inverted-dropout mask: entries are 0 with probability `rate`, else 1/(1-rate).
Matrix dropout_mask(Index rows, Index cols, double rate, Rng& rng);

/// A network bundled with its spec.
struct Mlp {
  MLPSpec spec;
  std::vector<ParamMatrix> params;

  Mlp() = default;
  Mlp(MLPSpec s, std::uint64_t seed) : spec(std::move(s)), params(init_params(spec, seed)) {}

  Var operator()(Tape& tape, Var input, bool training, Rng& rng) {
    return mlp_apply(tape, params, spec, input, training, rng);
  }
};

void zero_grad(std::span<ParamMatrix* const> params);

}  // namespace vgmgc::nn
