#pragma once

// Learnable aggregation function:
//
//            alpha * L(a,b)(x) + beta * L(c,d)(1 - x)
//   LAF(x) = -----------------------------------------,   L(p,q)(x) = (sum_i x_i^q)^p
//            gamma * L(e,f)(x) + delta * L(g,h)(1 - x)
//
// over multisets x with elements in [0,1]. Exponents a..h are kept >= 0 by
// projection; the coefficients are unconstrained.
//
// Power conventions: 0^0 = 1 both inside the sum and for the outer power, so
// L(0,1) == 1 and L(1,0) == N. Where a power base is 0 the derivative
// contribution is taken to be 0.

#include <array>
#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "laf/set_batch.hpp"
#include "laf/tape.hpp"
#include "laf/tensor.hpp"

namespace laf {

inline constexpr std::size_t kLafParamCount = 12;
/// Denominators with magnitude below this are replaced by +-kDenominatorEps.
inline constexpr double kDenominatorEps = 1e-8;

/// The twelve parameters of one unit, stored in the order a..h, alpha..delta.
struct LafParams {
  double a = 0, b = 1, c = 0, d = 1, e = 0, f = 1, g = 0, h = 1;
  double alpha = 0, beta = 0, gamma = 1, delta = 0;

  std::array<double, kLafParamCount> to_array() const;
  static LafParams from_array(std::span<const double> v);

  friend bool operator==(const LafParams&, const LafParams&) = default;
};

/// Names of the parameters in storage order, e.g. for diagnostics.
const std::array<const char*, kLafParamCount>& laf_param_names();

/// (sum_i x_i^b)^a. Throws DomainError on an empty set, an element outside
/// [0,1] or a negative exponent.
double l_ab(std::span<const double> xs, double a, double b);

/// den if |den| >= kDenominatorEps, otherwise kDenominatorEps with the sign of
/// den (0 counts as positive).
double stabilize_denominator(double den);

double laf_forward(std::span<const double> xs, const LafParams& p);

struct LafGradient {
  std::vector<double> xs;
  std::array<double, kLafParamCount> params{};
};

/// Exact partial derivatives of laf_forward scaled by `upstream`.
LafGradient laf_backward(std::span<const double> xs, const LafParams& p, double upstream);

/// a..h ~ Uniform[0,1], alpha..delta ~ Normal(0, 0.01).
LafParams init_params(std::mt19937_64& rng);

/// Clamps a..h at 0; coefficients pass through.
LafParams project_params(LafParams p);
/// In-place projection of the exponent columns of a [r, 12] parameter tensor.
void project_params(nd::Tensor& units);

/// "(α(Σx^b)^a + β(Σ(1−x)^d)^c) / (γ(Σx^f)^e + δ(Σ(1−x)^h)^g)" with two decimals.
std::string format_unit(const LafParams& p);

/// r units applied element-wise to d-dimensional set elements.
struct LafLayer {
  std::vector<LafParams> units;
  std::size_t input_dim = 1;

  nd::Tensor to_tensor() const;
  static LafLayer from_tensor(const nd::Tensor& units, std::size_t input_dim);
};

/// Output [num_sets, r*d]; entry (s, k*d + j) is unit k applied to dimension j of set s.
nd::Tensor laf_layer_forward(const SetBatch& batch, const LafLayer& layer);

/// Tape version of laf_layer_forward. `elements` is [total, d] with values in
/// [0,1]; `units` is [r, 12]. Gradients flow to both.
nd::Var laf_pool(nd::Var elements, std::span<const std::size_t> offsets, nd::Var units);

/// Sigmoid squashing of unbounded inputs into (0,1) before aggregation.
nd::Tensor squash(const nd::Tensor& x);
nd::Var squash(nd::Var x);

}  // namespace laf
