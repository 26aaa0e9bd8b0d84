#include "laf/laf.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <string>

#include "laf/errors.hpp"
#include "laf/ops.hpp"

namespace laf {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Term t of the unit: outer exponent index 2t, inner exponent index 2t+1,
// coefficient index 8+t; terms 1 and 3 aggregate the complement 1-x.
constexpr bool kComplement[4] = {false, true, false, true};
constexpr const char* kTermNames[4] = {"L_{a,b}(x)", "L_{c,d}(1-x)", "L_{e,f}(x)", "L_{g,h}(1-x)"};

double safe_log(double v) { return v > 0.0 ? std::log(v) : kNegInf; }

// base^q given log(base); 0^0 = 1.
double pow_from_log(double log_base, double q) {
  if (log_base == kNegInf) return q == 0.0 ? 1.0 : 0.0;
  return std::exp(q * log_base);
}

// One set restricted to one dimension, with the logs every term needs.
// Values are held in ascending order so every sum is independent of the
// order the set arrived in; `order[i]` is the source position of x[i].
struct Column {
  std::vector<double> x;
  std::vector<double> c;
  std::vector<double> log_x;
  std::vector<double> log_c;
  std::vector<std::size_t> order;

  void load(const double* first, std::size_t n, std::size_t stride) {
    order.resize(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return first[i * stride] < first[j * stride]; });
    x.resize(n);
    c.resize(n);
    log_x.resize(n);
    log_c.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = first[order[i] * stride];
      c[i] = 1.0 - x[i];
      log_x[i] = safe_log(x[i]);
      log_c[i] = safe_log(c[i]);
    }
  }
  std::size_t size() const { return x.size(); }
  const std::vector<double>& bases(int term) const { return kComplement[term] ? c : x; }
  const std::vector<double>& logs(int term) const { return kComplement[term] ? log_c : log_x; }
};

struct UnitEval {
  double S[4];
  double T[4];
  double num;
  double den_raw;
  double den;
  double value;
};

UnitEval evaluate(const Column& col, const double* p) {
  UnitEval ev{};
  for (int t = 0; t < 4; ++t) {
    const double q = p[2 * t + 1];
    double s = 0.0;
    for (double lb : col.logs(t)) s += pow_from_log(lb, q);
    ev.S[t] = s;
    ev.T[t] = std::pow(s, p[2 * t]);
  }
  ev.num = p[8] * ev.T[0] + p[9] * ev.T[1];
  ev.den_raw = p[10] * ev.T[2] + p[11] * ev.T[3];
  ev.den = stabilize_denominator(ev.den_raw);
  ev.value = ev.num / ev.den;
  return ev;
}

// Adds upstream * dLAF/dparam into dparams[0..11] and upstream * dLAF/dx_i into
// dx[i * stride].
void accumulate(const Column& col, const double* p, const UnitEval& ev, double upstream, double* dparams, double* dx,
                std::size_t stride) {
  const double d_num = upstream / ev.den;
  const double d_den = std::abs(ev.den_raw) >= kDenominatorEps ? -upstream * ev.num / (ev.den * ev.den) : 0.0;
  dparams[8] += d_num * ev.T[0];
  dparams[9] += d_num * ev.T[1];
  dparams[10] += d_den * ev.T[2];
  dparams[11] += d_den * ev.T[3];
  const double d_term[4] = {d_num * p[8], d_num * p[9], d_den * p[10], d_den * p[11]};
  for (int t = 0; t < 4; ++t) {
    const double outer = p[2 * t];
    const double inner = p[2 * t + 1];
    const double S = ev.S[t];
    const double T = ev.T[t];
    double d_outer = 0.0;
    double d_sum = 0.0;
    if (S > 0.0) {
      d_outer = d_term[t] * T * std::log(S);
      d_sum = d_term[t] * outer * T / S;
    }
    double d_inner = 0.0;
    if (d_sum != 0.0) {
      const auto& logs = col.logs(t);
      const auto& bases = col.bases(t);
      const double sign = kComplement[t] ? -1.0 : 1.0;
      for (std::size_t i = 0; i < logs.size(); ++i) {
        const double lb = logs[i];
        if (lb == kNegInf) continue;
        const double pw = std::exp(inner * lb);
        d_inner += pw * lb;
        if (dx != nullptr && inner != 0.0) dx[col.order[i] * stride] += sign * d_sum * inner * pw / bases[i];
      }
      d_inner *= d_sum;
    }
    if (!std::isfinite(d_outer) || !std::isfinite(d_sum) || !std::isfinite(d_inner)) {
      throw NonFiniteError(std::string("laf_backward: non-finite gradient through term ") + kTermNames[t]);
    }
    dparams[2 * t] += d_outer;
    dparams[2 * t + 1] += d_inner;
  }
}

void require_unit_interval(std::span<const double> xs, const char* op) {
  if (xs.empty()) throw DomainError(std::string(op) + ": empty multiset");
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!(xs[i] >= 0.0 && xs[i] <= 1.0)) {
      throw DomainError(std::string(op) + ": element " + std::to_string(i) + " = " + std::to_string(xs[i]) +
                        " outside [0,1]");
    }
  }
}

void require_nonnegative_exponents(const double* p, const char* op) {
  for (std::size_t k = 0; k < 8; ++k) {
    if (!(p[k] >= 0.0)) {
      throw DomainError(std::string(op) + ": exponent " + laf_param_names()[k] + " = " + std::to_string(p[k]) +
                        " is negative");
    }
  }
}

}  // namespace

std::array<double, kLafParamCount> LafParams::to_array() const {
  return {a, b, c, d, e, f, g, h, alpha, beta, gamma, delta};
}

LafParams LafParams::from_array(std::span<const double> v) {
  if (v.size() != kLafParamCount) {
    throw DimensionError("LafParams needs 12 values, got " + std::to_string(v.size()));
  }
  return LafParams{v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8], v[9], v[10], v[11]};
}

const std::array<const char*, kLafParamCount>& laf_param_names() {
  static const std::array<const char*, kLafParamCount> names{"a", "b", "c",     "d",    "e",     "f",
                                                             "g", "h", "alpha", "beta", "gamma", "delta"};
  return names;
}

double l_ab(std::span<const double> xs, double a, double b) {
  require_unit_interval(xs, "l_ab");
  if (!(a >= 0.0) || !(b >= 0.0)) throw DomainError("l_ab: exponents must be nonnegative");
  std::vector<double> sorted(xs.begin(), xs.end());
  std::sort(sorted.begin(), sorted.end());
  double s = 0.0;
  for (double x : sorted) s += pow_from_log(safe_log(x), b);
  return std::pow(s, a);
}

double stabilize_denominator(double den) {
  if (std::abs(den) >= kDenominatorEps) return den;
  return den < 0.0 ? -kDenominatorEps : kDenominatorEps;
}

double laf_forward(std::span<const double> xs, const LafParams& p) {
  require_unit_interval(xs, "laf_forward");
  const auto arr = p.to_array();
  require_nonnegative_exponents(arr.data(), "laf_forward");
  Column col;
  col.load(xs.data(), xs.size(), 1);
  return evaluate(col, arr.data()).value;
}

LafGradient laf_backward(std::span<const double> xs, const LafParams& p, double upstream) {
  require_unit_interval(xs, "laf_backward");
  const auto arr = p.to_array();
  require_nonnegative_exponents(arr.data(), "laf_backward");
  Column col;
  col.load(xs.data(), xs.size(), 1);
  const UnitEval ev = evaluate(col, arr.data());
  if (!std::isfinite(ev.value)) throw NonFiniteError("laf_backward: forward value is not finite");
  LafGradient grad;
  grad.xs.assign(xs.size(), 0.0);
  accumulate(col, arr.data(), ev, upstream, grad.params.data(), grad.xs.data(), 1);
  return grad;
}

LafParams init_params(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> coef(0.0, 0.01);
  std::array<double, kLafParamCount> v{};
  for (std::size_t k = 0; k < 8; ++k) v[k] = unit(rng);
  for (std::size_t k = 8; k < kLafParamCount; ++k) v[k] = coef(rng);
  return LafParams::from_array(v);
}

LafParams project_params(LafParams p) {
  auto v = p.to_array();
  for (std::size_t k = 0; k < 8; ++k) v[k] = std::max(v[k], 0.0);
  return LafParams::from_array(v);
}

void project_params(nd::Tensor& units) {
  if (units.rank() != 2 || units.shape()[1] != kLafParamCount) {
    throw DimensionError("LAF unit tensor must be [r,12], got " + nd::shape_string(units.shape()));
  }
  for (std::size_t r = 0; r < units.shape()[0]; ++r)
    for (std::size_t k = 0; k < 8; ++k) units.at(r, k) = std::max(units.at(r, k), 0.0);
}

std::string format_unit(const LafParams& p) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "(%.2f(\xCE\xA3x^%.2f)^%.2f + %.2f(\xCE\xA3(1\xE2\x88\x92x)^%.2f)^%.2f) / "
                "(%.2f(\xCE\xA3x^%.2f)^%.2f + %.2f(\xCE\xA3(1\xE2\x88\x92x)^%.2f)^%.2f)",
                p.alpha, p.b, p.a, p.beta, p.d, p.c, p.gamma, p.f, p.e, p.delta, p.h, p.g);
  return buf;
}

nd::Tensor LafLayer::to_tensor() const {
  nd::Tensor t({units.size(), kLafParamCount});
  for (std::size_t r = 0; r < units.size(); ++r) {
    const auto v = units[r].to_array();
    std::copy(v.begin(), v.end(), t.row(r).begin());
  }
  return t;
}

LafLayer LafLayer::from_tensor(const nd::Tensor& units, std::size_t input_dim) {
  if (units.rank() != 2 || units.shape()[1] != kLafParamCount) {
    throw DimensionError("LAF unit tensor must be [r,12], got " + nd::shape_string(units.shape()));
  }
  LafLayer layer;
  layer.input_dim = input_dim;
  for (std::size_t r = 0; r < units.shape()[0]; ++r) layer.units.push_back(LafParams::from_array(units.row(r)));
  return layer;
}

namespace {

void check_pool_inputs(const nd::Tensor& elements, std::span<const std::size_t> offsets, const nd::Tensor& units) {
  if (elements.rank() != 2) throw DimensionError("laf_pool: elements must be [total,d]");
  if (units.rank() != 2 || units.shape()[1] != kLafParamCount || units.shape()[0] == 0) {
    throw DimensionError("laf_pool: units must be [r,12] with r >= 1, got " + nd::shape_string(units.shape()));
  }
  if (offsets.empty() || offsets.front() != 0 || offsets.back() != elements.shape()[0]) {
    throw DimensionError("laf_pool: offsets do not cover the element matrix");
  }
  for (std::size_t s = 0; s + 1 < offsets.size(); ++s) {
    if (offsets[s + 1] <= offsets[s]) throw DomainError("laf_pool: empty set at batch index " + std::to_string(s));
  }
  for (std::size_t i = 0; i < elements.size(); ++i) {
    if (!(elements[i] >= 0.0 && elements[i] <= 1.0)) {
      throw DomainError("laf_pool: element value " + std::to_string(elements[i]) + " outside [0,1] (squash first)");
    }
  }
  for (std::size_t r = 0; r < units.shape()[0]; ++r) require_nonnegative_exponents(&units.at(r, 0), "laf_pool");
}

nd::Tensor pool_forward(const nd::Tensor& elements, std::span<const std::size_t> offsets, const nd::Tensor& units) {
  check_pool_inputs(elements, offsets, units);
  const std::size_t n = offsets.size() - 1;
  const std::size_t d = elements.shape()[1];
  const std::size_t r = units.shape()[0];
  nd::Tensor out({n, r * d});
  Column col;
  for (std::size_t s = 0; s < n; ++s) {
    const std::size_t count = offsets[s + 1] - offsets[s];
    for (std::size_t j = 0; j < d; ++j) {
      col.load(elements.data() + offsets[s] * d + j, count, d);
      for (std::size_t k = 0; k < r; ++k) out.at(s, k * d + j) = evaluate(col, &units.at(k, 0)).value;
    }
  }
  return out;
}

}  // namespace

nd::Tensor laf_layer_forward(const SetBatch& batch, const LafLayer& layer) {
  batch.require_nonempty_sets();
  if (batch.dim() != layer.input_dim) {
    throw DimensionError("laf_layer_forward: batch dimension " + std::to_string(batch.dim()) + " vs layer input_dim " +
                         std::to_string(layer.input_dim));
  }
  if (layer.units.empty()) throw DimensionError("laf_layer_forward: layer has no units");
  return pool_forward(batch.elements, batch.offsets, layer.to_tensor());
}

nd::Var laf_pool(nd::Var elements, std::span<const std::size_t> offsets, nd::Var units) {
  nd::Tensor out = pool_forward(elements.value(), offsets, units.value());
  std::vector<std::size_t> offs(offsets.begin(), offsets.end());
  const std::size_t eid = elements.id(), uid = units.id();
  return elements.tape().record(
      std::move(out), {elements, units},
      [eid, uid, offs = std::move(offs)](nd::Tape& t, const nd::Tensor& g) {
        const nd::Tensor& X = t.value(eid);
        const nd::Tensor& U = t.value(uid);
        const std::size_t n = offs.size() - 1;
        const std::size_t d = X.shape()[1];
        const std::size_t r = U.shape()[0];
        double* dx = t.requires_grad(eid) ? t.grad_mut(eid).data() : nullptr;
        nd::Tensor dunits(U.shape());
        Column col;
        for (std::size_t s = 0; s < n; ++s) {
          const std::size_t count = offs[s + 1] - offs[s];
          for (std::size_t j = 0; j < d; ++j) {
            col.load(X.data() + offs[s] * d + j, count, d);
            double* dcol = dx != nullptr ? dx + offs[s] * d + j : nullptr;
            for (std::size_t k = 0; k < r; ++k) {
              const double up = g.at(s, k * d + j);
              if (up == 0.0) continue;
              const UnitEval ev = evaluate(col, &U.at(k, 0));
              accumulate(col, &U.at(k, 0), ev, up, &dunits.at(k, 0), dcol, d);
            }
          }
        }
        if (t.requires_grad(uid)) {
          nd::Tensor& du = t.grad_mut(uid);
          for (std::size_t i = 0; i < du.size(); ++i) du[i] += dunits[i];
        }
      },
      "laf_pool");
}

nd::Tensor squash(const nd::Tensor& x) {
  nd::Tensor y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = nd::sigmoid(x[i]);
  return y;
}

nd::Var squash(nd::Var x) { return nd::sigmoid(x); }

}  // namespace laf
