#include "laf/presets.hpp"

#include <cstdio>

#include "laf/errors.hpp"

namespace laf {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

void require_limit(double v, const char* what) {
  if (!(v >= 1.0)) throw DomainError(std::string("preset limit parameter ") + what + " must be >= 1, got " + fmt(v));
}

}  // namespace

std::string Preset::name() const {
  switch (kind) {
    case PresetKind::kConstant: return "constant(" + fmt(kappa) + ")";
    case PresetKind::kMax: return "max(r=" + fmt(r) + ")";
    case PresetKind::kMin: return "min(r=" + fmt(r) + ")";
    case PresetKind::kSum: return "sum";
    case PresetKind::kNonzeroCount: return "nonzero-count";
    case PresetKind::kMean: return "mean";
    case PresetKind::kMoment: return "moment(k=" + fmt(k) + ")";
    case PresetKind::kPowerMoment: return "power-moment(l=" + fmt(l) + ",k=" + fmt(k) + ")";
    case PresetKind::kMinOverMax: return "min/max(r=" + fmt(r) + ",s=" + fmt(s) + ")";
    case PresetKind::kMaxOverMin: return "max/min(r=" + fmt(r) + ",s=" + fmt(s) + ")";
  }
  return "unknown";
}

LafParams preset_params(const Preset& preset) {
  // Start from the neutral fill: every term (0,1) with coefficient 0, gamma = 1.
  LafParams p;
  p.a = 0, p.b = 1, p.c = 0, p.d = 1, p.e = 0, p.f = 1, p.g = 0, p.h = 1;
  p.alpha = 0, p.beta = 0, p.gamma = 1, p.delta = 0;
  switch (preset.kind) {
    case PresetKind::kConstant:
      p.alpha = preset.kappa;
      break;
    case PresetKind::kMax:
      require_limit(preset.r, "r");
      p.a = 1.0 / preset.r, p.b = preset.r;
      p.alpha = 1;
      break;
    case PresetKind::kMin:
      require_limit(preset.r, "r");
      p.c = 1.0 / preset.r, p.d = preset.r;
      p.alpha = 1, p.beta = -1;
      break;
    case PresetKind::kSum:
      p.a = 1, p.b = 1;
      p.alpha = 1;
      break;
    case PresetKind::kNonzeroCount:
      p.a = 1, p.b = 0;
      p.alpha = 1;
      break;
    case PresetKind::kMean:
      p.a = 1, p.b = 1, p.e = 1, p.f = 0;
      p.alpha = 1;
      break;
    case PresetKind::kMoment:
      p.a = 1, p.b = preset.k, p.e = 1, p.f = 0;
      p.alpha = 1;
      break;
    case PresetKind::kPowerMoment:
      p.a = preset.l, p.b = preset.k, p.e = preset.l, p.f = 0;
      p.alpha = 1;
      break;
    case PresetKind::kMinOverMax:
      // 1 - max(1-x) over max(x).
      require_limit(preset.r, "r");
      require_limit(preset.s, "s");
      p.c = 1.0 / preset.r, p.d = preset.r, p.e = 1.0 / preset.s, p.f = preset.s;
      p.alpha = 1, p.beta = -1;
      break;
    case PresetKind::kMaxOverMin:
      // max(x) over 1 - max(1-x).
      require_limit(preset.r, "r");
      require_limit(preset.s, "s");
      p.a = 1.0 / preset.r, p.b = preset.r, p.g = 1.0 / preset.s, p.h = preset.s;
      p.alpha = 1, p.delta = -1;
      break;
  }
  return p;
}

std::vector<Preset> all_preset_rows() {
  return {Preset::constant(0.25),     Preset::max(40),        Preset::min(40),
          Preset::sum(),              Preset::nonzero_count(), Preset::mean(),
          Preset::moment(2),          Preset::power_moment(2, 1), Preset::min_over_max(40, 40),
          Preset::max_over_min(40, 40)};
}

}  // namespace laf
