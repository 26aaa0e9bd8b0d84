#pragma once

#include <string>
#include <vector>

#include "laf/laf.hpp"

namespace laf {

enum class PresetKind {
  kConstant,
  kMax,
  kMin,
  kSum,
  kNonzeroCount,
  kMean,
  kMoment,
  kPowerMoment,
  kMinOverMax,
  kMaxOverMin,
};

/// A named aggregator expressible as a fixed LAF parameterisation. max/min and
/// the two ratios are exact only as r (and s) grow.
struct Preset {
  PresetKind kind = PresetKind::kSum;
  double kappa = 0.0;  // constant value
  double r = 1.0;      // limit parameter of max/min (numerator of the ratios)
  double s = 1.0;      // limit parameter of the ratio denominators
  double k = 1.0;      // moment order
  double l = 1.0;      // power applied to the moment

  static Preset constant(double kappa) { return {PresetKind::kConstant, kappa}; }
  static Preset max(double r) { return {PresetKind::kMax, 0.0, r}; }
  static Preset min(double r) { return {PresetKind::kMin, 0.0, r}; }
  static Preset sum() { return {PresetKind::kSum}; }
  static Preset nonzero_count() { return {PresetKind::kNonzeroCount}; }
  static Preset mean() { return {PresetKind::kMean}; }
  static Preset moment(double k) { return {PresetKind::kMoment, 0.0, 1.0, 1.0, k}; }
  static Preset power_moment(double l, double k) { return {PresetKind::kPowerMoment, 0.0, 1.0, 1.0, k, l}; }
  static Preset min_over_max(double r, double s) { return {PresetKind::kMinOverMax, 0.0, r, s}; }
  static Preset max_over_min(double r, double s) { return {PresetKind::kMaxOverMin, 0.0, r, s}; }

  std::string name() const;
};

/// Parameters realising `preset`. Unused L-terms get exponents (0,1) and a zero
/// coefficient. Throws DomainError if a limit parameter is below 1.
LafParams preset_params(const Preset& preset);

/// One representative of every preset row, in table order.
std::vector<Preset> all_preset_rows();

}  // namespace laf
