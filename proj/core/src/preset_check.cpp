#include "laf/preset_check.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace laf {

namespace {

// Reference aggregators: plain loops, deliberately not sharing code with laf.cpp.
double ref_sum(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s;
}

double ref_moment(const std::vector<double>& xs, int k) {
  double s = 0.0;
  for (double x : xs) {
    double p = 1.0;
    for (int i = 0; i < k; ++i) p *= x;
    s += p;
  }
  return s / static_cast<double>(xs.size());
}

double ref_max(const std::vector<double>& xs) {
  double m = xs[0];
  for (double x : xs) m = x > m ? x : m;
  return m;
}

double ref_min(const std::vector<double>& xs) {
  double m = xs[0];
  for (double x : xs) m = x < m ? x : m;
  return m;
}

double ref_variance(const std::vector<double>& xs) {
  const double mu = ref_sum(xs) / static_cast<double>(xs.size());
  double s = 0.0;
  for (double x : xs) s += (x - mu) * (x - mu);
  return s / static_cast<double>(xs.size());
}

struct RowAccumulator {
  PresetCheckRow row;

  explicit RowAccumulator(std::string name) { row.name = std::move(name); }

  void exact(double got, double want, double tol) {
    const double err = std::abs(got - want);
    row.max_abs_err = std::max(row.max_abs_err, err);
    row.tolerance = tol;
    if (!(err < tol)) row.passed = false;
  }

  void bounded(double got, double want, double bound) {
    const double err = std::abs(got - want);
    row.max_abs_err = std::max(row.max_abs_err, err);
    row.tolerance = std::max(row.tolerance, bound);
    if (!(err <= bound + 1e-12)) row.passed = false;
  }

  // got must lie in [lo, hi]; tolerance reports the widest distance from the
  // reference to an interval end.
  void interval(double got, double want, double lo, double hi) {
    row.max_abs_err = std::max(row.max_abs_err, std::abs(got - want));
    row.tolerance = std::max({row.tolerance, want - lo, hi - want});
    if (!(got >= lo - 1e-12 && got <= hi + 1e-12)) row.passed = false;
  }

  std::size_t skipped = 0;
};

}  // namespace

std::vector<PresetCheckRow> run_preset_checks(const PresetCheckOptions& options) {
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> value(0.01, 0.99);
  std::uniform_int_distribution<int> size(2, 10);
  std::uniform_real_distribution<double> kappa_dist(-2.0, 2.0);

  std::vector<std::vector<double>> sets(options.num_sets);
  for (auto& s : sets) {
    s.resize(static_cast<std::size_t>(size(rng)));
    for (double& x : s) x = value(rng);
  }

  const double r = options.limit_r;
  const double tol = options.exact_tolerance;
  RowAccumulator constant{"constant"}, sum{"sum"}, count{"nonzero-count"}, mean{"mean"},
      moment{"moment(k=1..4)"}, power{"power-moment(l=1..3,k=1..2)"}, max{"max(r=40)"}, min{"min(r=40)"},
      min_over_max{"min/max(r=s=40)"}, max_over_min{"max/min(r=s=40)"}, monotone{"max limit monotone in r"},
      variance{"variance = moment(2) - power(2,1)"};
  max.row.name = "max(r=" + std::to_string(static_cast<int>(r)) + ")";
  min.row.name = "min(r=" + std::to_string(static_cast<int>(r)) + ")";

  const auto& P = options.params;
  for (const auto& xs : sets) {
    const double n = static_cast<double>(xs.size());
    const double kappa = kappa_dist(rng);
    constant.exact(laf_forward(xs, P(Preset::constant(kappa))), kappa, tol);
    sum.exact(laf_forward(xs, P(Preset::sum())), ref_sum(xs), tol);
    count.exact(laf_forward(xs, P(Preset::nonzero_count())), n, tol);
    mean.exact(laf_forward(xs, P(Preset::mean())), ref_sum(xs) / n, tol);
    for (int k = 1; k <= 4; ++k) moment.exact(laf_forward(xs, P(Preset::moment(k))), ref_moment(xs, k), tol);
    for (int l = 1; l <= 3; ++l)
      for (int k = 1; k <= 2; ++k)
        power.exact(laf_forward(xs, P(Preset::power_moment(l, k))), std::pow(ref_moment(xs, k), l), tol);

    // (sum x^r)^(1/r) lies in [max, max * N^(1/r)]; the min row is the dual on 1-x.
    const double growth = std::pow(n, 1.0 / r) - 1.0;
    const double mx = ref_max(xs);
    const double mn = ref_min(xs);
    max.bounded(laf_forward(xs, P(Preset::max(r))), mx, mx * growth);
    min.bounded(laf_forward(xs, P(Preset::min(r))), mn, (1.0 - mn) * growth);

    // Ratios: numerator and denominator each lie between their limit bounds,
    // so the preset lies in the quotient interval. When the lower bound of
    // the divisor reaches 0 the divisor may change sign and the set is skipped.
    {
      const double num_lo = mn - (1.0 - mn) * growth;
      min_over_max.interval(laf_forward(xs, P(Preset::min_over_max(r, r))), mn / mx, num_lo / (mx * (1.0 + growth)),
                            mn / mx);
    }
    {
      const double den_lo = mn - (1.0 - mn) * growth;
      if (den_lo > 0.0) {
        max_over_min.interval(laf_forward(xs, P(Preset::max_over_min(r, r))), mx / mn, mx / mn,
                              mx * (1.0 + growth) / den_lo);
      } else {
        ++max_over_min.skipped;
      }
    }

    // Reported error is the largest step-to-step increase, which must be 0.
    double prev = std::numeric_limits<double>::infinity();
    for (double rr : {2.0, 5.0, 10.0, 20.0, 40.0}) {
      const double err = std::abs(laf_forward(xs, P(Preset::max(rr))) - mx);
      if (err > prev + 1e-15) {
        monotone.row.max_abs_err = std::max(monotone.row.max_abs_err, err - prev);
        monotone.row.passed = false;
        monotone.row.detail = "error increased at r=" + std::to_string(static_cast<int>(rr));
      }
      prev = err;
    }

    const double diff = laf_forward(xs, P(Preset::moment(2))) - laf_forward(xs, P(Preset::power_moment(2, 1)));
    variance.exact(diff, ref_variance(xs), tol);
  }

  if (max_over_min.skipped > 0)
    max_over_min.row.detail = "(" + std::to_string(max_over_min.skipped) + " sets with no usable bound skipped)";

  std::vector<PresetCheckRow> rows;
  for (auto* acc : {&constant, &max, &min, &sum, &count, &mean, &moment, &power, &min_over_max, &max_over_min,
                    &monotone, &variance}) {
    rows.push_back(acc->row);
  }
  return rows;
}

}  // namespace laf
