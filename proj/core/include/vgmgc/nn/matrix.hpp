#pragma once

#include <Eigen/Dense>

#include <string>

#include "vgmgc/error.hpp"

namespace vgmgc::nn {

using Index = Eigen::Index;

/// Dense row-major double matrix used for every value in the pipeline.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// A trainable matrix with its gradient accumulator.
struct ParamMatrix {
  Matrix value;
  Matrix grad;

  ParamMatrix() = default;
  explicit ParamMatrix(Matrix v) : value(std::move(v)), grad(Matrix::Zero(value.rows(), value.cols())) {}

  void zero_grad() { grad.setZero(value.rows(), value.cols()); }
};

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

inline void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(what) + ": " + std::to_string(a.rows()) + "x" +
                     std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                     std::to_string(b.cols()));
  }
}

}  // namespace vgmgc::nn
