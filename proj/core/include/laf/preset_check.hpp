#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "laf/presets.hpp"

namespace laf {

/// Outcome of checking one preset family against a brute-force aggregator.
struct PresetCheckRow {
  std::string name;
  double max_abs_err = 0.0;
  /// Fixed tolerance for exact rows; for limit rows the largest analytic bound seen.
  double tolerance = 0.0;
  bool passed = true;
  std::string detail;
};

struct PresetCheckOptions {
  std::size_t num_sets = 1000;
  std::uint64_t seed = 1;
  double limit_r = 40.0;
  double exact_tolerance = 1e-9;
  /// Parameter source under test; replaceable so a negative control can sabotage a row.
  std::function<LafParams(const Preset&)> params = preset_params;
};

/// Evaluates every preset row on random sets (values in [0.01, 0.99], sizes
/// 2..10) against naive reference aggregators, plus the max-preset limit
/// monotonicity in r and the variance-as-difference identity.
std::vector<PresetCheckRow> run_preset_checks(const PresetCheckOptions& options);

}  // namespace laf
