#include "vgmgc/nn/optim.hpp"

#include <cmath>
#include <string>

namespace vgmgc::nn {

void Adam::step(std::span<ParamMatrix* const> params) {
  if (first_.empty()) {
    for (ParamMatrix* p : params) {
      first_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
      second_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
    }
  }
  if (first_.size() != params.size()) {
    throw ShapeError("Adam::step: optimizer tracks " + std::to_string(first_.size()) + " parameters, got " +
                     std::to_string(params.size()));
  }
  ++steps_;
  const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(steps_));
  for (std::size_t k = 0; k < params.size(); ++k) {
    ParamMatrix& p = *params[k];
    require_same_shape(first_[k], p.value, "Adam::step");
    require_same_shape(p.grad, p.value, "Adam::step grad");
    first_[k] = config_.beta1 * first_[k] + (1.0 - config_.beta1) * p.grad;
    second_[k] = config_.beta2 * second_[k] + (1.0 - config_.beta2) * p.grad.cwiseProduct(p.grad);
    const double lr = config_.lr;
    const double eps = config_.eps;
    p.value.array() -= lr * (first_[k].array() / c1) / ((second_[k].array() / c2).sqrt() + eps);
  }
}

}  // namespace vgmgc::nn
