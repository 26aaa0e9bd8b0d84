#pragma once

#include <cstddef>
#include <functional>

#include "laf/tape.hpp"
#include "laf/tensor.hpp"

namespace laf::nd {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  Tensor analytic;
  Tensor numeric;
};

/// |a - b| / max(1e-8, |a| + |b|).
double relative_error(double analytic, double numeric);

/// Compares `gradient(point)` against central differences of `value` with step h.
/// Throws NonFiniteError if a perturbed evaluation is not finite.
GradCheckResult grad_check(const std::function<double(const Tensor&)>& value,
                           const std::function<Tensor(const Tensor&)>& gradient, const Tensor& point, double h);

/// Same check for a scalar graph built on a fresh tape from one variable input.
GradCheckResult grad_check(const std::function<Var(Tape&, Var)>& build, const Tensor& point, double h);

}  // namespace laf::nd
