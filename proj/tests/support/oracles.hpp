#pragma once

// Brute-force reference implementations used by the tests. They are written
// with plain loops and share no code with the library.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "laf/datasets.hpp"

namespace oracle {

inline double sum(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s;
}

inline double mean(const std::vector<double>& xs) { return sum(xs) / static_cast<double>(xs.size()); }

inline double power_mean(const std::vector<double>& xs, int k) {
  double s = 0.0;
  for (double x : xs) {
    double p = 1.0;
    for (int i = 0; i < k; ++i) p *= x;
    s += p;
  }
  return s / static_cast<double>(xs.size());
}

inline double population_variance(const std::vector<double>& xs) {
  const double mu = mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - mu) * (x - mu);
  return s / static_cast<double>(xs.size());
}

// Standardized moment of order k with population divisors; 0 on constant sets.
inline double standardized(const std::vector<double>& xs, int k) {
  const double mu = mean(xs);
  const double sd = std::sqrt(population_variance(xs));
  if (sd == 0.0) return 0.0;
  double s = 0.0;
  for (double x : xs) s += std::pow((x - mu) / sd, k);
  return s / static_cast<double>(xs.size());
}

inline double median(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

inline double target(const laf::data::Target& t, const std::vector<double>& xs) {
  using K = laf::data::TargetKind;
  switch (t.kind) {
    case K::kCount: return static_cast<double>(xs.size());
    case K::kSum: return sum(xs);
    case K::kMax: return *std::max_element(xs.begin(), xs.end());
    case K::kMin: return *std::min_element(xs.begin(), xs.end());
    case K::kMean: return mean(xs);
    case K::kMedian: return median(xs);
    case K::kInverseCount: return 1.0 / static_cast<double>(xs.size());
    case K::kMoment: return power_mean(xs, t.k);
    case K::kSkewness: return standardized(xs, 3);
    case K::kKurtosis: return standardized(xs, 4);
  }
  return 0.0;
}

inline double target(const laf::data::Target& t, const std::vector<int>& xs) {
  return target(t, std::vector<double>(xs.begin(), xs.end()));
}

// Best constant under absolute error is any median of the labels; its MAE is
// the mean absolute deviation around that median.
inline double constant_mae(std::vector<double> labels) {
  const double m = median(labels);
  double s = 0.0;
  for (double y : labels) s += std::abs(y - m);
  return s / static_cast<double>(labels.size());
}

inline std::vector<laf::data::Target> all_targets() {
  using K = laf::data::TargetKind;
  return {{K::kCount},  {K::kSum},          {K::kMax},       {K::kMin},       {K::kMean},
          {K::kMedian}, {K::kInverseCount}, {K::kMoment, 2}, {K::kMoment, 3}, {K::kSkewness},
          {K::kKurtosis}};
}

// MNIST directory from the environment, empty if unset.
inline std::filesystem::path mnist_dir() {
  const char* env = std::getenv("LAF_DATA_DIR");
  return env ? std::filesystem::path(env) : std::filesystem::path();
}

}  // namespace oracle
