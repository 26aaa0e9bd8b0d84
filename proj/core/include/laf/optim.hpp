#pragma once

#include <cstddef>
#include <limits>
#include <span>

#include "laf/param_store.hpp"

namespace laf::nd {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// One bias-corrected Adam update of every block, then zeroes the gradients and
/// increments the store's step count. Throws NonFiniteError naming the first
/// block whose gradient is not finite; the store is left untouched in that case.
void adam_step(ParamStore& store, const AdamConfig& config);

struct PlateauConfig {
  double factor = 0.5;
  std::size_t patience = 5;
  double min_improvement = 1e-4;
  double lr_min = 1e-5;
};

/// Reduce-on-plateau bookkeeping. `consumed` counts history entries already seen.
struct PlateauState {
  double lr = 1e-3;
  double best = std::numeric_limits<double>::infinity();
  std::size_t bad_epochs = 0;
  std::size_t consumed = 0;
  PlateauConfig config;
};

/// Feeds the not-yet-consumed tail of `history` (validation losses, oldest
/// first) into the schedule and returns the resulting learning rate.
double plateau_decay(std::span<const double> history, PlateauState& state);

}  // namespace laf::nd
