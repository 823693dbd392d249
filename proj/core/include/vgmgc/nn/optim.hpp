#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "vgmgc/nn/matrix.hpp"

namespace vgmgc::nn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adaptive-moment optimizer. Moment buffers are created on the first step
/// and must keep matching the parameter shapes afterwards.
class Adam {
 public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}

  void step(std::span<ParamMatrix* const> params);

  std::int64_t step_count() const { return steps_; }
  const AdamConfig& config() const { return config_; }
  double& learning_rate() { return config_.lr; }

 private:
  AdamConfig config_;
  std::vector<Matrix> first_;
  std::vector<Matrix> second_;
  std::int64_t steps_ = 0;
};

}  // namespace vgmgc::nn
