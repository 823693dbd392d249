#include "vgmgc/nn/mlp.hpp"

#include <cmath>
#include <string>

namespace vgmgc::nn {

void MLPSpec::validate() const {
  if (layer_dims.size() < 2) throw InvalidArgument("MLPSpec: need at least input and output dims");
  for (Index d : layer_dims) {
    if (d <= 0) throw InvalidArgument("MLPSpec: zero-width layer");
  }
  if (activations.size() != layer_dims.size() - 1) {
    throw InvalidArgument("MLPSpec: expected " + std::to_string(layer_dims.size() - 1) + " activations, got " +
                          std::to_string(activations.size()));
  }
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw InvalidArgument("MLPSpec: dropout_rate outside [0,1)");
}

std::vector<ParamMatrix> init_params(const MLPSpec& spec, std::uint64_t seed) {
  spec.validate();
  Rng rng = make_stream(seed, 0, Stream::init);
  std::vector<ParamMatrix> params;
  params.reserve(2 * spec.num_layers());
  for (std::size_t l = 0; l < spec.num_layers(); ++l) {
    const Index fan_in = spec.layer_dims[l];
    const Index fan_out = spec.layer_dims[l + 1];
    // Uniform(-a, a) has variance a^2 / 3.
    const double bound = spec.init == InitScheme::xavier
                             ? std::sqrt(6.0 / static_cast<double>(fan_in + fan_out))
                             : std::sqrt(6.0 / static_cast<double>(fan_in));
    Matrix w(fan_in, fan_out);
    for (Index i = 0; i < fan_in; ++i) {
      for (Index j = 0; j < fan_out; ++j) w(i, j) = uniform(rng, -bound, bound);
    }
    params.emplace_back(std::move(w));
    params.emplace_back(Matrix::Zero(1, fan_out));
  }
  return params;
}

Matrix dropout_mask(Index rows, Index cols, double rate, Rng& rng) {
  const double keep = 1.0 / (1.0 - rate);
  Matrix mask(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) mask(i, j) = uniform_open01(rng) < rate ? 0.0 : keep;
  }
  return mask;
}

namespace {

void check_params(std::size_t count, const MLPSpec& spec) {
  spec.validate();
  if (count != 2 * spec.num_layers()) {
    throw ShapeError("mlp_apply: expected " + std::to_string(2 * spec.num_layers()) + " parameter matrices, got " +
                     std::to_string(count));
  }
}

}  // namespace

Var mlp_apply(Tape& tape, std::span<ParamMatrix> params, const MLPSpec& spec, Var input, bool training,
              Rng& rng) {
  check_params(params.size(), spec);
  if (input.cols() != spec.input_dim()) {
    throw ShapeError("mlp_apply: input width " + std::to_string(input.cols()) + ", expected " +
                     std::to_string(spec.input_dim()));
  }
  Var h = input;
  for (std::size_t l = 0; l < spec.num_layers(); ++l) {
    h = add_row(matmul(h, tape.leaf(params[2 * l])), tape.leaf(params[2 * l + 1]));
    switch (spec.activations[l]) {
      case Activation::relu: h = relu(h); break;
      case Activation::sigmoid: h = sigmoid(h); break;
      case Activation::none: break;
    }
    if (training && spec.dropout_rate > 0.0) {
      h = mul_const(h, dropout_mask(h.rows(), h.cols(), spec.dropout_rate, rng));
    }
  }
  return h;
}

Matrix mlp_apply(std::span<const ParamMatrix> params, const MLPSpec& spec, const Matrix& input) {
  check_params(params.size(), spec);
  if (input.cols() != spec.input_dim()) {
    throw ShapeError("mlp_apply: input width " + std::to_string(input.cols()) + ", expected " +
                     std::to_string(spec.input_dim()));
  }
  Matrix h = input;
  for (std::size_t l = 0; l < spec.num_layers(); ++l) {
    Matrix next = h * params[2 * l].value;
    next.rowwise() += params[2 * l + 1].value.row(0);
    switch (spec.activations[l]) {
      case Activation::relu: next = next.cwiseMax(0.0); break;
      case Activation::sigmoid: next = sigmoid(next); break;
      case Activation::none: break;
    }
    h = std::move(next);
  }
  return h;
}

void zero_grad(std::span<ParamMatrix* const> params) {
  for (ParamMatrix* p : params) p->zero_grad();
}

}  // namespace vgmgc::nn
