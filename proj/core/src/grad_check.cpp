#include "laf/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "laf/errors.hpp"

namespace laf::nd {

double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max(1e-8, std::abs(analytic) + std::abs(numeric));
}

GradCheckResult grad_check(const std::function<double(const Tensor&)>& value,
                           const std::function<Tensor(const Tensor&)>& gradient, const Tensor& point, double h) {
  GradCheckResult res;
  res.analytic = gradient(point);
  if (res.analytic.size() != point.size()) {
    throw DimensionError("grad_check: gradient holds " + std::to_string(res.analytic.size()) + " values for a point of " +
                         std::to_string(point.size()));
  }
  res.numeric = Tensor(point.shape());
  Tensor probe = point;
  for (std::size_t i = 0; i < point.size(); ++i) {
    probe[i] = point[i] + h;
    const double up = value(probe);
    probe[i] = point[i] - h;
    const double down = value(probe);
    probe[i] = point[i];
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw NonFiniteError("grad_check: non-finite evaluation when perturbing coordinate " + std::to_string(i));
    }
    res.numeric[i] = (up - down) / (2.0 * h);
    const double err = relative_error(res.analytic[i], res.numeric[i]);
    if (i == 0 || err > res.max_rel_error) {
      res.max_rel_error = err;
      res.worst_index = i;
    }
  }
  return res;
}

GradCheckResult grad_check(const std::function<Var(Tape&, Var)>& build, const Tensor& point, double h) {
  auto value = [&](const Tensor& x) {
    Tape tape;
    return build(tape, tape.variable(x)).value()[0];
  };
  auto gradient = [&](const Tensor& x) {
    Tape tape;
    Var in = tape.variable(x);
    tape.backward(build(tape, in));
    return tape.grad_mut(in.id());
  };
  return grad_check(value, gradient, point, h);
}

}  // namespace laf::nd
