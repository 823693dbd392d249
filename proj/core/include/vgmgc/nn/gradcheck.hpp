#pragma once

#include <cstdint>
#include <functional>
#include <span>

#include "vgmgc/nn/matrix.hpp"
#include "vgmgc/nn/tape.hpp"

namespace vgmgc::nn {

/// Builds a scalar loss on the given tape from the current parameter values.
/// Must be deterministic (eval mode, fixed noise).
using LossBuilder = std::function<Var(Tape&)>;

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t entries_checked = 0;
  std::size_t worst_param = 0;
  Index worst_entry = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

/// Compares backward() against central differences with step `h`.
///
/// The error per entry is |analytic - numeric| / max(1e-8, |analytic| + |numeric|).
/// With `max_entries_per_param == 0` every entry is checked; otherwise that
/// many entries per parameter are sampled with `seed`. Parameter gradients are
/// zeroed before and left holding the analytic gradient afterwards.
GradCheckReport grad_check(const LossBuilder& loss_fn, std::span<ParamMatrix* const> params, double h = 1e-5,
                           std::size_t max_entries_per_param = 0, std::uint64_t seed = 0);

}  // namespace vgmgc::nn
