#include "laf/optim.hpp"

#include <algorithm>
#include <cmath>

#include "laf/errors.hpp"

namespace laf::nd {

struct AdamAccess {
  static std::size_t& steps(ParamStore& s) { return s.step_count_; }
};

void adam_step(ParamStore& store, const AdamConfig& config) {
  for (const auto& [name, blk] : store.blocks()) {
    if (!blk.grad.all_finite()) throw NonFiniteError("non-finite gradient in parameter block '" + name + "'");
  }
  std::size_t& steps = AdamAccess::steps(store);
  const double t = static_cast<double>(steps + 1);
  const double c1 = 1.0 - std::pow(config.beta1, t);
  const double c2 = 1.0 - std::pow(config.beta2, t);
  for (auto& [name, blk] : store.blocks()) {
    auto w = blk.value.values();
    auto g = blk.grad.values();
    auto m = blk.adam_m.values();
    auto v = blk.adam_v.values();
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g[i];
      v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g[i] * g[i];
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      w[i] -= config.lr * mhat / (std::sqrt(vhat) + config.eps);
    }
    blk.grad.fill(0.0);
  }
  ++steps;
}

double plateau_decay(std::span<const double> history, PlateauState& state) {
  for (std::size_t i = state.consumed; i < history.size(); ++i) {
    const double loss = history[i];
    if (loss <= state.best - state.config.min_improvement || state.best == std::numeric_limits<double>::infinity()) {
      state.best = std::min(state.best, loss);
      state.bad_epochs = 0;
    } else {
      ++state.bad_epochs;
      if (state.bad_epochs >= state.config.patience) {
        state.lr = std::max(state.lr * state.config.factor, state.config.lr_min);
        state.bad_epochs = 0;
      }
    }
  }
  state.consumed = history.size();
  return state.lr;
}

}  // namespace laf::nd
