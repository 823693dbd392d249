#include "vgmgc/encoder.hpp"

#include <array>
#include <string>

namespace vgmgc {

namespace {

void check_order(int order) {
  if (order < 0) throw InvalidArgument("message_pass: order must be nonnegative");
}

}  // namespace

Matrix message_pass(const Matrix& x, const NormalizedGraph& a_norm, int order) {
  check_order(order);
  if (a_norm.values.rows() != x.rows() || a_norm.values.cols() != x.rows()) {
    throw ShapeError("message_pass: graph is " + std::to_string(a_norm.values.rows()) + "x" +
                     std::to_string(a_norm.values.cols()) + " but features have " + std::to_string(x.rows()) +
                     " rows");
  }
  Matrix acc = x;
  Matrix out = 2.0 * x;
  for (int l = 0; l < order; ++l) {
    acc = a_norm.values * acc;
    out += acc;
  }
  return out;
}

Var message_pass(Var x, Var a_norm, int order) {
  check_order(order);
  if (a_norm.rows() != x.rows() || a_norm.cols() != x.rows()) {
    throw ShapeError("message_pass: graph/feature row mismatch");
  }
  Var acc = x;
  Var out = nn::scale(x, 2.0);
  for (int l = 0; l < order; ++l) {
    acc = nn::matmul(a_norm, acc);
    out = nn::add(out, acc);
  }
  return out;
}

ViewEncoder ViewEncoder::create(Index feature_dim, Index hidden, Index embed_dim, std::uint64_t seed) {
  using nn::Activation;
  ViewEncoder enc;
  enc.embed = nn::Mlp({{2 * feature_dim, hidden, embed_dim}, {Activation::relu, Activation::none}, 0.0,
                       nn::InitScheme::kaiming},
                      seed);
  enc.decoder = nn::Mlp({{embed_dim, hidden, feature_dim}, {Activation::relu, Activation::none}, 0.0,
                         nn::InitScheme::kaiming},
                        nn::mix_seed(seed, 0xdec));
  return enc;
}

std::vector<nn::ParamMatrix*> ViewEncoder::parameters() {
  std::vector<nn::ParamMatrix*> out;
  for (auto& p : embed.params) out.push_back(&p);
  for (auto& p : decoder.params) out.push_back(&p);
  return out;
}

nn::Mlp make_global_decoder(Index q_dim, Index hidden, Index global_dim, double dropout, std::uint64_t seed) {
  using nn::Activation;
  return nn::Mlp({{q_dim, hidden, global_dim}, {Activation::relu, Activation::none}, dropout, nn::InitScheme::xavier},
                 seed);
}

Var encode_view_cached(nn::Tape& tape, const Matrix& x_v, const Matrix& specific_embedding, Var s_norm,
                       nn::Mlp& f_v, int order, bool training, nn::Rng& rng) {
  if (specific_embedding.rows() != x_v.rows() || specific_embedding.cols() != x_v.cols()) {
    throw ShapeError("encode_view: specific embedding shape differs from features");
  }
  Var consensus = message_pass(tape.constant(x_v), s_norm, order);
  std::array<Var, 2> parts{tape.constant(specific_embedding), consensus};
  Var joined = nn::concat_cols(parts);
  if (joined.cols() != f_v.spec.input_dim()) {
    throw ShapeError("encode_view: concatenated width " + std::to_string(joined.cols()) + " but f_v expects " +
                     std::to_string(f_v.spec.input_dim()));
  }
  return f_v(tape, joined, training, rng);
}

Var encode_view(nn::Tape& tape, const Matrix& x_v, const NormalizedGraph& a_norm_v, Var s_norm, nn::Mlp& f_v,
                int order, bool training, nn::Rng& rng) {
  if (s_norm.rows() != a_norm_v.n()) throw ShapeError("encode_view: consensus and view graphs differ in size");
  return encode_view_cached(tape, x_v, message_pass(x_v, a_norm_v, order), s_norm, f_v, order, training, rng);
}

Var reconstruction_loss(nn::Tape& tape, const Matrix& x, Var z, nn::Mlp& decoder, bool training, nn::Rng& rng) {
  if ((x.array() < 0.0).any() || (x.array() > 1.0).any()) {
    throw InvalidArgument("reconstruction_loss: features must be scaled into [0,1]");
  }
  Var logits = decoder(tape, z, training, rng);
  if (logits.rows() != x.rows() || logits.cols() != x.cols()) {
    throw ShapeError("reconstruction_loss: decoder output does not match feature shape");
  }
  return nn::bce_with_logits_sum(logits, x);
}

}  // namespace vgmgc
