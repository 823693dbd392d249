#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "vgmgc/nn/matrix.hpp"

namespace vgmgc::nn {

class Tape;

/// Handle to a node recorded on a Tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;

  const Matrix& value() const;
  Index rows() const { return value().rows(); }
  Index cols() const { return value().cols(); }
  /// Value of a 1x1 node.
  double scalar() const;

  Tape* tape() const { return tape_; }
  std::size_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Dynamic reverse-mode computation record for one forward pass.
///
/// Every op appends a node holding its value plus a closure that pushes the
/// node's upstream gradient into its parents. backward() walks the nodes in
/// reverse recording order, then adds each leaf's gradient into the
/// ParamMatrix it was created from. A tape is single-use: build, backward,
/// discard.
class Tape {
 public:
  using Backprop = std::function<void(Tape&, const Matrix& upstream)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Value that never receives gradient.
  Var constant(Matrix value);
  /// Trainable leaf; backward() accumulates into `param.grad`.
  Var leaf(ParamMatrix& param);

  /// Low-level recording hook used by the op functions below.
  Var record(Matrix value, bool requires_grad, Backprop backprop);

  const Matrix& value(Var v) const { return nodes_[v.id()].value; }
  bool requires_grad(Var v) const { return nodes_[v.id()].requires_grad; }
  /// Adds `contribution` into the gradient slot of `v` (no-op for constants).
  void accumulate(Var v, const Matrix& contribution);

  /// Reverse sweep from a 1x1 node. Throws ContractError for non-scalars or reuse.
  void backward(Var loss);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    bool has_grad = false;
    ParamMatrix* param = nullptr;
    Backprop backprop;
  };

  std::vector<Node> nodes_;
  bool consumed_ = false;
};

// ---------------------------------------------------------------------------
// Differentiable ops. All operands must live on the same tape.
// ---------------------------------------------------------------------------

Var matmul(Var a, Var b);
/// a * b^T
Var matmul_nt(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var hadamard(Var a, Var b);
Var scale(Var a, double s);
/// Adds a 1 x cols row vector to every row of `a`.
Var add_row(Var a, Var row);
Var add_const(Var a, const Matrix& c);
Var mul_const(Var a, const Matrix& c);
Var relu(Var a);
Var sigmoid(Var a);
Var log(Var a);
/// Clamps entries into [lo, hi]; gradient is zero where clamped.
Var clamp(Var a, double lo, double hi);
Var concat_cols(std::span<const Var> parts);
/// Divides every row by its sum. All-zero rows stay zero.
Var row_normalize(Var a);
/// 1x1 sum of all entries.
Var sum(Var a);

/// Sum over entries of the binary cross entropy between constant targets in
/// [0,1] and sigmoid(logits), with probabilities clamped to [p_min, 1 - p_min].
Var bce_with_logits_sum(Var logits, const Matrix& targets, double p_min = 1e-7);

/// Sum over entries of the Bernoulli entropy H_b(sigmoid(logits)).
Var bernoulli_entropy_from_logits_sum(Var logits);

/// Student's t (one degree of freedom) soft assignment of rows of `z` to
/// constant centroids `mu`: q_ij proportional to 1 / (1 + |z_i - mu_j|^2).
Var student_t_assignment(Var z, const Matrix& mu);

/// Sum over rows of KL(p_i || q_i) with `p` constant; terms with p = 0 vanish.
Var kl_divergence_sum(const Matrix& p, Var q);

/// Elementwise helpers on plain values.
Matrix sigmoid(const Matrix& x);
double sigmoid(double x);
double softplus(double x);

}  // namespace vgmgc::nn
