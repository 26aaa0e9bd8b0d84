#include "laf/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "laf/errors.hpp"

namespace laf::pool {

namespace {

bool degenerate(double mean, double var) {
  const double scale = 1e-12 * (1.0 + std::abs(mean));
  return var <= scale * scale;
}

// Central moments of one strided column.
struct Central {
  double n = 0, mean = 0, m2 = 0, m3 = 0, m4 = 0;
  bool flat = false;
};

// Sums run over the sorted column so results do not depend on element order.
std::vector<double> sorted_column(const double* x, std::size_t count, std::size_t stride) {
  std::vector<double> v(count);
  for (std::size_t i = 0; i < count; ++i) v[i] = x[i * stride];
  std::sort(v.begin(), v.end());
  return v;
}

Central central(const double* x, std::size_t count, std::size_t stride) {
  const std::vector<double> v = sorted_column(x, count, stride);
  Central c;
  c.n = static_cast<double>(count);
  for (double e : v) c.mean += e;
  c.mean /= c.n;
  for (double e : v) {
    const double d = e - c.mean;
    const double d2 = d * d;
    c.m2 += d2;
    c.m3 += d2 * d;
    c.m4 += d2 * d2;
  }
  c.m2 /= c.n;
  c.m3 /= c.n;
  c.m4 /= c.n;
  c.flat = degenerate(c.mean, c.m2);
  return c;
}

double reduce(Reduction r, const double* x, std::size_t count, std::size_t stride, const Central& c) {
  switch (r) {
    case Reduction::kMax: {
      double m = x[0];
      for (std::size_t i = 1; i < count; ++i) m = std::max(m, x[i * stride]);
      return m;
    }
    case Reduction::kSum: {
      double s = 0.0;
      for (double e : sorted_column(x, count, stride)) s += e;
      return s;
    }
    case Reduction::kMean: return c.mean;
    case Reduction::kStd: return c.flat ? 0.0 : std::sqrt(c.m2);
    case Reduction::kVar: return c.flat ? 0.0 : c.m2;
    case Reduction::kSkewness: return c.flat ? 0.0 : c.m3 / std::pow(c.m2, 1.5);
    case Reduction::kKurtosis: return c.flat ? 0.0 : c.m4 / (c.m2 * c.m2);
  }
  return 0.0;
}

void reduce_backward(Reduction r, const double* x, std::size_t count, std::size_t stride, const Central& c, double g,
                     double* dx) {
  const double n = c.n;
  switch (r) {
    case Reduction::kMax: {
      std::size_t arg = 0;
      for (std::size_t i = 1; i < count; ++i)
        if (x[i * stride] > x[arg * stride]) arg = i;
      dx[arg * stride] += g;
      return;
    }
    case Reduction::kSum:
      for (std::size_t i = 0; i < count; ++i) dx[i * stride] += g;
      return;
    case Reduction::kMean:
      for (std::size_t i = 0; i < count; ++i) dx[i * stride] += g / n;
      return;
    default: break;
  }
  if (c.flat) return;
  const double sigma = std::sqrt(c.m2);
  for (std::size_t i = 0; i < count; ++i) {
    const double d = x[i * stride] - c.mean;
    const double dm2 = 2.0 * d / n;
    double v = 0.0;
    switch (r) {
      case Reduction::kVar: v = dm2; break;
      case Reduction::kStd: v = d / (n * sigma); break;
      case Reduction::kSkewness: {
        const double dm3 = 3.0 * (d * d - c.m2) / n;
        v = dm3 / std::pow(c.m2, 1.5) - 1.5 * c.m3 / std::pow(c.m2, 2.5) * dm2;
        break;
      }
      case Reduction::kKurtosis: {
        const double dm4 = 4.0 * (d * d * d - c.m3) / n;
        v = dm4 / (c.m2 * c.m2) - 2.0 * c.m4 / (c.m2 * c.m2 * c.m2) * dm2;
        break;
      }
      default: break;
    }
    dx[i * stride] += g * v;
  }
}

void check_inputs(const nd::Tensor& elements, std::span<const std::size_t> offsets) {
  if (elements.rank() != 2) throw DimensionError("fixed_pool: elements must be [total,d]");
  if (offsets.empty() || offsets.front() != 0 || offsets.back() != elements.shape()[0]) {
    throw DimensionError("fixed_pool: offsets do not cover the element matrix");
  }
  for (std::size_t s = 0; s + 1 < offsets.size(); ++s) {
    if (offsets[s + 1] <= offsets[s]) throw DomainError("fixed_pool: empty set at batch index " + std::to_string(s));
  }
}

nd::Tensor forward(const nd::Tensor& X, std::span<const std::size_t> offsets, FixedPoolKind kind) {
  check_inputs(X, offsets);
  const auto& units = pool_units(kind);
  const std::size_t n = offsets.size() - 1;
  const std::size_t d = X.shape()[1];
  const std::size_t u = units.size();
  nd::Tensor out({n, u * d});
  for (std::size_t s = 0; s < n; ++s) {
    const std::size_t count = offsets[s + 1] - offsets[s];
    for (std::size_t j = 0; j < d; ++j) {
      const double* col = X.data() + offsets[s] * d + j;
      const Central c = central(col, count, d);
      for (std::size_t k = 0; k < u; ++k) out.at(s, k * d + j) = reduce(units[k], col, count, d, c);
    }
  }
  return out;
}

}  // namespace

Moments sample_moments(std::span<const double> xs) {
  if (xs.empty()) throw DomainError("sample_moments: empty multiset");
  const Central c = central(xs.data(), xs.size(), 1);
  Moments m;
  m.mean = c.mean;
  if (c.flat) return m;
  m.var = c.m2;
  m.std = std::sqrt(c.m2);
  m.skewness = c.m3 / std::pow(c.m2, 1.5);
  m.kurtosis = c.m4 / (c.m2 * c.m2);
  return m;
}

const std::vector<Reduction>& pool_units(FixedPoolKind kind) {
  static const std::vector<Reduction> deepsets{Reduction::kMax, Reduction::kMax, Reduction::kMax,
                                               Reduction::kSum, Reduction::kSum, Reduction::kSum,
                                               Reduction::kMean, Reduction::kMean, Reduction::kMean};
  static const std::vector<Reduction> pna{Reduction::kMean, Reduction::kMax,      Reduction::kSum,
                                          Reduction::kStd,  Reduction::kVar,      Reduction::kSkewness,
                                          Reduction::kKurtosis};
  return kind == FixedPoolKind::kDeepSets9 ? deepsets : pna;
}

std::string to_string(FixedPoolKind kind) { return kind == FixedPoolKind::kDeepSets9 ? "deepsets9" : "pna7"; }

nd::Tensor fixed_pool_forward(const SetBatch& batch, FixedPoolKind kind) {
  batch.require_nonempty_sets();
  return forward(batch.elements, batch.offsets, kind);
}

nd::Var fixed_pool(nd::Var elements, std::span<const std::size_t> offsets, FixedPoolKind kind) {
  nd::Tensor out = forward(elements.value(), offsets, kind);
  std::vector<std::size_t> offs(offsets.begin(), offsets.end());
  const std::size_t eid = elements.id();
  return elements.tape().record(
      std::move(out), {elements},
      [eid, kind, offs = std::move(offs)](nd::Tape& t, const nd::Tensor& g) {
        const nd::Tensor& X = t.value(eid);
        nd::Tensor& dX = t.grad_mut(eid);
        const auto& units = pool_units(kind);
        const std::size_t d = X.shape()[1];
        for (std::size_t s = 0; s + 1 < offs.size(); ++s) {
          const std::size_t count = offs[s + 1] - offs[s];
          for (std::size_t j = 0; j < d; ++j) {
            const double* col = X.data() + offs[s] * d + j;
            double* dcol = dX.data() + offs[s] * d + j;
            const Central c = central(col, count, d);
            for (std::size_t k = 0; k < units.size(); ++k) {
              const double up = g.at(s, k * d + j);
              if (up != 0.0) reduce_backward(units[k], col, count, d, c, up, dcol);
            }
          }
        }
      },
      std::string("fixed_pool:") + to_string(kind));
}

}  // namespace laf::pool
