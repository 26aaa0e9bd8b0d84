#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace laf::harness {

struct GradSuiteResult {
  std::string name;
  std::size_t instances = 0;
  double worst_rel_error = 0.0;
  double threshold = 0.0;
  bool passed = false;
};

inline constexpr double kUnitGradTolerance = 1e-5;
inline constexpr double kModelGradTolerance = 1e-4;
inline constexpr double kGradStep = 1e-6;

/// Finite-difference suites at random non-degenerate points: a single LAF
/// unit (set elements and all 12 parameters), both fixed pools, and the
/// scalar model's batch MAE w.r.t. every parameter block (4 sets per batch).
/// Unit suites report the worst per-coordinate relative error; the model
/// suite compares each block as a vector, ||a - n|| / (||a|| + ||n||), since
/// components near 1e-8 are below the rounding floor of a 1e-6 step.
std::vector<GradSuiteResult> run_grad_checks(std::uint64_t seed, std::size_t instances);

GradSuiteResult grad_suite_laf_unit(std::uint64_t seed, std::size_t instances);
GradSuiteResult grad_suite_fixed_pool(bool pna, std::uint64_t seed, std::size_t instances);
GradSuiteResult grad_suite_scalar_model(std::uint64_t seed, std::size_t instances);

}  // namespace laf::harness
