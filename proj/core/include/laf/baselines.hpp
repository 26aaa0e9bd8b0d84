#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "laf/set_batch.hpp"
#include "laf/tape.hpp"
#include "laf/tensor.hpp"

namespace laf::pool {

/// Population moments (divisor N).
struct Moments {
  double mean = 0.0;
  double std = 0.0;
  double var = 0.0;
  double skewness = 0.0;
  double kurtosis = 0.0;
};

/// Skewness and kurtosis are 0 when the set is (numerically) constant.
Moments sample_moments(std::span<const double> xs);

enum class FixedPoolKind { kDeepSets9, kPna7 };

enum class Reduction { kMax, kSum, kMean, kStd, kVar, kSkewness, kKurtosis };

/// deepsets9 = [max x3, sum x3, mean x3]; pna7 = [mean, max, sum, std, var, skewness, kurtosis].
const std::vector<Reduction>& pool_units(FixedPoolKind kind);
std::string to_string(FixedPoolKind kind);

/// Output [num_sets, u*d]; entry (s, k*d + j) is reduction k over dimension j of set s.
nd::Tensor fixed_pool_forward(const SetBatch& batch, FixedPoolKind kind);

/// Tape version; max routes its gradient to the lowest-index arg-max, moment
/// reductions differentiate through their closed forms.
nd::Var fixed_pool(nd::Var elements, std::span<const std::size_t> offsets, FixedPoolKind kind);

}  // namespace laf::pool
