#include "vgmgc/nn/tape.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace vgmgc::nn {

const Matrix& Var::value() const {
  if (tape_ == nullptr) throw ContractError("use of an unbound Var");
  return tape_->value(*this);
}

double Var::scalar() const {
  const Matrix& v = value();
  if (v.rows() != 1 || v.cols() != 1) {
    throw ContractError("scalar() on a " + std::to_string(v.rows()) + "x" + std::to_string(v.cols()) +
                        " node");
  }
  return v(0, 0);
}

Var Tape::constant(Matrix value) { return record(std::move(value), false, nullptr); }

Var Tape::leaf(ParamMatrix& param) {
  Var v = record(param.value, true, nullptr);
  nodes_[v.id()].param = &param;
  return v;
}

Var Tape::record(Matrix value, bool requires_grad, Backprop backprop) {
  if (consumed_) throw ContractError("recording on a tape after backward()");
  Node node;
  node.value = std::move(value);
  node.requires_grad = requires_grad;
  if (requires_grad) node.backprop = std::move(backprop);
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

void Tape::accumulate(Var v, const Matrix& contribution) {
  Node& node = nodes_[v.id()];
  if (!node.requires_grad) return;
  if (!node.has_grad) {
    node.grad = contribution;
    node.has_grad = true;
  } else {
    node.grad += contribution;
  }
}

void Tape::backward(Var loss) {
  if (loss.tape() != this) throw ContractError("backward() on a Var from another tape");
  if (consumed_) throw ContractError("backward() called twice on the same tape");
  const Matrix& lv = value(loss);
  if (lv.rows() != 1 || lv.cols() != 1) {
    throw ContractError("backward() requires a scalar loss, got " + std::to_string(lv.rows()) + "x" +
                        std::to_string(lv.cols()));
  }
  consumed_ = true;
  if (!nodes_[loss.id()].requires_grad) return;
  accumulate(loss, Matrix::Ones(1, 1));
  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    Node& node = nodes_[i];
    if (!node.has_grad) continue;
    if (node.backprop) node.backprop(*this, node.grad);
    if (node.param != nullptr) node.param->grad += node.grad;
  }
}

namespace {

Tape& same_tape(Var a, Var b, const char* op) {
  if (a.tape() == nullptr || a.tape() != b.tape()) {
    throw ContractError(std::string(op) + ": operands on different tapes");
  }
  return *a.tape();
}

bool needs(Var a) { return a.tape()->requires_grad(a); }
bool needs(Var a, Var b) { return needs(a) || needs(b); }

}  // namespace

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

Matrix sigmoid(const Matrix& x) { return x.unaryExpr([](double v) { return sigmoid(v); }); }

Var matmul(Var a, Var b) {
  Tape& t = same_tape(a, b, "matmul");
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + " * " +
                     std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  }
  Matrix out = a.value() * b.value();
  return t.record(std::move(out), needs(a, b), [a, b](Tape& tp, const Matrix& g) {
    if (tp.requires_grad(a)) tp.accumulate(a, g * b.value().transpose());
    if (tp.requires_grad(b)) tp.accumulate(b, a.value().transpose() * g);
  });
}

Var matmul_nt(Var a, Var b) {
  Tape& t = same_tape(a, b, "matmul_nt");
  if (a.cols() != b.cols()) {
    throw ShapeError("matmul_nt: inner widths " + std::to_string(a.cols()) + " vs " +
                     std::to_string(b.cols()));
  }
  Matrix out = a.value() * b.value().transpose();
  return t.record(std::move(out), needs(a, b), [a, b](Tape& tp, const Matrix& g) {
    if (tp.requires_grad(a)) tp.accumulate(a, g * b.value());
    if (tp.requires_grad(b)) tp.accumulate(b, g.transpose() * a.value());
  });
}

Var add(Var a, Var b) {
  Tape& t = same_tape(a, b, "add");
  require_same_shape(a.value(), b.value(), "add");
  return t.record(a.value() + b.value(), needs(a, b), [a, b](Tape& tp, const Matrix& g) {
    tp.accumulate(a, g);
    tp.accumulate(b, g);
  });
}

Var sub(Var a, Var b) {
  Tape& t = same_tape(a, b, "sub");
  require_same_shape(a.value(), b.value(), "sub");
  return t.record(a.value() - b.value(), needs(a, b), [a, b](Tape& tp, const Matrix& g) {
    tp.accumulate(a, g);
    if (tp.requires_grad(b)) tp.accumulate(b, -g);
  });
}

Var hadamard(Var a, Var b) {
  Tape& t = same_tape(a, b, "hadamard");
  require_same_shape(a.value(), b.value(), "hadamard");
  return t.record(a.value().cwiseProduct(b.value()), needs(a, b), [a, b](Tape& tp, const Matrix& g) {
    if (tp.requires_grad(a)) tp.accumulate(a, g.cwiseProduct(b.value()));
    if (tp.requires_grad(b)) tp.accumulate(b, g.cwiseProduct(a.value()));
  });
}

Var scale(Var a, double s) {
  Tape& t = *a.tape();
  return t.record(a.value() * s, needs(a), [a, s](Tape& tp, const Matrix& g) { tp.accumulate(a, g * s); });
}

Var add_row(Var a, Var row) {
  Tape& t = same_tape(a, row, "add_row");
  if (row.rows() != 1 || row.cols() != a.cols()) {
    throw ShapeError("add_row: row is " + std::to_string(row.rows()) + "x" + std::to_string(row.cols()) +
                     ", expected 1x" + std::to_string(a.cols()));
  }
  Matrix out = a.value().rowwise() + row.value().row(0);
  return t.record(std::move(out), needs(a, row), [a, row](Tape& tp, const Matrix& g) {
    tp.accumulate(a, g);
    if (tp.requires_grad(row)) tp.accumulate(row, g.colwise().sum());
  });
}

Var add_const(Var a, const Matrix& c) {
  require_same_shape(a.value(), c, "add_const");
  return a.tape()->record(a.value() + c, needs(a), [a](Tape& tp, const Matrix& g) { tp.accumulate(a, g); });
}

Var mul_const(Var a, const Matrix& c) {
  require_same_shape(a.value(), c, "mul_const");
  return a.tape()->record(a.value().cwiseProduct(c), needs(a),
                          [a, c](Tape& tp, const Matrix& g) { tp.accumulate(a, g.cwiseProduct(c)); });
}

Var relu(Var a) {
  Matrix out = a.value().cwiseMax(0.0);
  return a.tape()->record(std::move(out), needs(a), [a](Tape& tp, const Matrix& g) {
    tp.accumulate(a, g.cwiseProduct(a.value().unaryExpr([](double v) { return v > 0 ? 1.0 : 0.0; })));
  });
}

Var sigmoid(Var a) {
  Matrix out = sigmoid(a.value());
  Tape& t = *a.tape();
  Var y = t.record(out, needs(a), [a, out](Tape& tp, const Matrix& g) {
    tp.accumulate(a, g.cwiseProduct(out.cwiseProduct((1.0 - out.array()).matrix())));
  });
  return y;
}

Var log(Var a) {
  Matrix out = a.value().array().log().matrix();
  return a.tape()->record(std::move(out), needs(a), [a](Tape& tp, const Matrix& g) {
    tp.accumulate(a, g.cwiseQuotient(a.value()));
  });
}

Var clamp(Var a, double lo, double hi) {
  Matrix out = a.value().cwiseMax(lo).cwiseMin(hi);
  return a.tape()->record(std::move(out), needs(a), [a, lo, hi](Tape& tp, const Matrix& g) {
    Matrix mask = a.value().unaryExpr([lo, hi](double v) { return (v > lo && v < hi) ? 1.0 : 0.0; });
    tp.accumulate(a, g.cwiseProduct(mask));
  });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw InvalidArgument("concat_cols: no operands");
  Tape& t = *parts.front().tape();
  const Index rows = parts.front().rows();
  Index cols = 0;
  bool grad = false;
  for (const Var& p : parts) {
    if (p.tape() != &t) throw ContractError("concat_cols: operands on different tapes");
    if (p.rows() != rows) throw ShapeError("concat_cols: row counts differ");
    cols += p.cols();
    grad = grad || t.requires_grad(p);
  }
  Matrix out(rows, cols);
  Index offset = 0;
  for (const Var& p : parts) {
    out.middleCols(offset, p.cols()) = p.value();
    offset += p.cols();
  }
  std::vector<Var> saved(parts.begin(), parts.end());
  return t.record(std::move(out), grad, [saved](Tape& tp, const Matrix& g) {
    Index off = 0;
    for (const Var& p : saved) {
      if (tp.requires_grad(p)) tp.accumulate(p, g.middleCols(off, p.cols()));
      off += p.cols();
    }
  });
}

Var row_normalize(Var a) {
  const Matrix& x = a.value();
  Eigen::VectorXd sums = x.rowwise().sum();
  Matrix out = Matrix::Zero(x.rows(), x.cols());
  for (Index i = 0; i < x.rows(); ++i) {
    if (sums(i) != 0.0) out.row(i) = x.row(i) / sums(i);
  }
  return a.tape()->record(out, needs(a), [a, out, sums](Tape& tp, const Matrix& g) {
    // d y_ij / d x_ik = (delta_jk - y_ij) / r_i
    Matrix dx = Matrix::Zero(out.rows(), out.cols());
    for (Index i = 0; i < out.rows(); ++i) {
      if (sums(i) == 0.0) continue;
      const double dot = g.row(i).dot(out.row(i));
      dx.row(i) = (g.row(i).array() - dot).matrix() / sums(i);
    }
    tp.accumulate(a, dx);
  });
}

Var sum(Var a) {
  Matrix out(1, 1);
  out(0, 0) = a.value().sum();
  const Index r = a.rows(), c = a.cols();
  return a.tape()->record(std::move(out), needs(a), [a, r, c](Tape& tp, const Matrix& g) {
    tp.accumulate(a, Matrix::Constant(r, c, g(0, 0)));
  });
}

Var bce_with_logits_sum(Var logits, const Matrix& targets, double p_min) {
  require_same_shape(logits.value(), targets, "bce_with_logits_sum");
  // Clamping the probability to [p_min, 1 - p_min] is the same as clamping the
  // logit to +-limit, which keeps the softplus form exact and overflow free.
  const double limit = std::log((1.0 - p_min) / p_min);
  const Matrix& l = logits.value();
  double total = 0.0;
  for (Index i = 0; i < l.rows(); ++i) {
    for (Index j = 0; j < l.cols(); ++j) {
      const double x = std::clamp(l(i, j), -limit, limit);
      const double t = targets(i, j);
      total += t * softplus(-x) + (1.0 - t) * softplus(x);
    }
  }
  Matrix out(1, 1);
  out(0, 0) = total;
  return logits.tape()->record(std::move(out), needs(logits), [logits, targets, limit](Tape& tp, const Matrix& g) {
    const Matrix& lv = logits.value();
    Matrix d(lv.rows(), lv.cols());
    for (Index i = 0; i < lv.rows(); ++i) {
      for (Index j = 0; j < lv.cols(); ++j) {
        const double x = lv(i, j);
        d(i, j) = (x > -limit && x < limit) ? (sigmoid(x) - targets(i, j)) * g(0, 0) : 0.0;
      }
    }
    tp.accumulate(logits, d);
  });
}

Var bernoulli_entropy_from_logits_sum(Var logits) {
  // H_b(sigmoid(x)) = softplus(x) - x * sigmoid(x); dH/dx = -x s (1 - s).
  const Matrix& l = logits.value();
  double total = 0.0;
  for (Index i = 0; i < l.rows(); ++i) {
    for (Index j = 0; j < l.cols(); ++j) {
      const double x = l(i, j);
      total += softplus(x) - x * sigmoid(x);
    }
  }
  Matrix out(1, 1);
  out(0, 0) = total;
  return logits.tape()->record(std::move(out), needs(logits), [logits](Tape& tp, const Matrix& g) {
    Matrix d = logits.value().unaryExpr([](double x) {
      const double s = sigmoid(x);
      return -x * s * (1.0 - s);
    });
    tp.accumulate(logits, d * g(0, 0));
  });
}

Var student_t_assignment(Var z, const Matrix& mu) {
  const Matrix& zv = z.value();
  if (mu.cols() != zv.cols()) {
    throw ShapeError("student_t_assignment: centroid width " + std::to_string(mu.cols()) + " vs embedding width " +
                     std::to_string(zv.cols()));
  }
  const Index n = zv.rows(), c = mu.rows();
  Matrix w(n, c);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < c; ++j) {
      w(i, j) = 1.0 / (1.0 + (zv.row(i) - mu.row(j)).squaredNorm());
    }
  }
  Eigen::VectorXd totals = w.rowwise().sum();
  Matrix q = totals.asDiagonal().inverse() * w;
  return z.tape()->record(q, needs(z), [z, mu, w, totals, q](Tape& tp, const Matrix& g) {
    const Matrix& zval = z.value();
    const Index rows = q.rows();
    // e = dL/dd where d_ij = |z_i - mu_j|^2
    Matrix e(rows, q.cols());
    for (Index i = 0; i < rows; ++i) {
      const double dot = g.row(i).dot(q.row(i));
      for (Index j = 0; j < q.cols(); ++j) {
        const double dl_dw = (g(i, j) - dot) / totals(i);
        e(i, j) = -dl_dw * w(i, j) * w(i, j);
      }
    }
    Eigen::VectorXd esum = e.rowwise().sum();
    Matrix dz = 2.0 * (esum.asDiagonal() * zval - e * mu);
    tp.accumulate(z, dz);
  });
}

Var kl_divergence_sum(const Matrix& p, Var q) {
  require_same_shape(p, q.value(), "kl_divergence_sum");
  const Matrix& qv = q.value();
  double total = 0.0;
  for (Index i = 0; i < p.rows(); ++i) {
    for (Index j = 0; j < p.cols(); ++j) {
      if (p(i, j) > 0.0) total += p(i, j) * (std::log(p(i, j)) - std::log(qv(i, j)));
    }
  }
  Matrix out(1, 1);
  out(0, 0) = total;
  return q.tape()->record(std::move(out), needs(q), [p, q](Tape& tp, const Matrix& g) {
    tp.accumulate(q, -(p.cwiseQuotient(q.value())) * g(0, 0));
  });
}

}  // namespace vgmgc::nn
