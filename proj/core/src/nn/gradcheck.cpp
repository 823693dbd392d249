#include "vgmgc/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "vgmgc/nn/mlp.hpp"
#include "vgmgc/nn/rng.hpp"

namespace vgmgc::nn {

namespace {

double evaluate(const LossBuilder& loss_fn) {
  Tape tape;
  return loss_fn(tape).scalar();
}

}  // namespace

GradCheckReport grad_check(const LossBuilder& loss_fn, std::span<ParamMatrix* const> params, double h,
                           std::size_t max_entries_per_param, std::uint64_t seed) {
  zero_grad(params);
  {
    Tape tape;
    Var loss = loss_fn(tape);
    tape.backward(loss);
  }

  GradCheckReport report;
  Rng rng = make_stream(seed, 0, Stream::verify);
  for (std::size_t k = 0; k < params.size(); ++k) {
    ParamMatrix& p = *params[k];
    const Index size = p.value.size();
    std::vector<Index> entries(static_cast<std::size_t>(size));
    std::iota(entries.begin(), entries.end(), Index{0});
    if (max_entries_per_param != 0 && entries.size() > max_entries_per_param) {
      for (std::size_t i = 0; i < max_entries_per_param; ++i) {
        const std::size_t j = i + uniform_index(rng, entries.size() - i);
        std::swap(entries[i], entries[j]);
      }
      entries.resize(max_entries_per_param);
    }
    for (Index e : entries) {
      double& slot = p.value.data()[e];
      const double saved = slot;
      slot = saved + h;
      const double up = evaluate(loss_fn);
      slot = saved - h;
      const double down = evaluate(loss_fn);
      slot = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double analytic = p.grad.data()[e];
      const double err = std::abs(analytic - numeric) / std::max(1e-8, std::abs(analytic) + std::abs(numeric));
      ++report.entries_checked;
      if (err > report.max_rel_error) {
        report.max_rel_error = err;
        report.worst_param = k;
        report.worst_entry = e;
        report.worst_analytic = analytic;
        report.worst_numeric = numeric;
      }
    }
  }
  return report;
}

}  // namespace vgmgc::nn
