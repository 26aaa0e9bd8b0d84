#include "laf/injectivity.hpp"

#include <algorithm>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "laf/errors.hpp"

namespace laf {

namespace {

// Appends the encodings of all multisets extending `partial` with symbols >= first.
void enumerate(std::span<const double> encoding, std::size_t first, std::size_t remaining, double partial,
               std::vector<double>& out) {
  out.push_back(partial);
  if (remaining == 0) return;
  for (std::size_t s = first; s < encoding.size(); ++s) enumerate(encoding, s, remaining - 1, partial + encoding[s], out);
}

}  // namespace

std::size_t count_multisets(std::size_t domain_size, std::size_t max_card) {
  // sum_{k=0..K} C(n+k-1, k) = C(n+K, K)
  constexpr std::size_t kMax = std::numeric_limits<std::size_t>::max();
  std::size_t c = 1;
  for (std::size_t i = 1; i <= max_card; ++i) {
    const std::size_t mul = domain_size + i;
    if (c > kMax / mul) return kMax;
    c = c * mul / i;
  }
  return c;
}

InjectivityReport sum_encoding_injectivity(std::span<const double> encoding, std::size_t max_card) {
  const std::size_t total = count_multisets(encoding.size(), max_card);
  if (total > kInjectivityBudget) {
    throw ConfigError("sum_encoding_injectivity: " + std::to_string(total) + " multisets exceed the budget of " +
                      std::to_string(kInjectivityBudget));
  }
  std::vector<double> sums;
  sums.reserve(total);
  enumerate(encoding, 0, max_card, 0.0, sums);
  std::sort(sums.begin(), sums.end());
  InjectivityReport rep;
  rep.multisets = sums.size();
  rep.min_gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < sums.size(); ++i) rep.min_gap = std::min(rep.min_gap, sums[i] - sums[i - 1]);
  rep.injective = rep.min_gap > 1e-12;
  return rep;
}

InjectivityReport sum_encoding_injectivity(std::size_t domain_size, std::size_t max_card, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> encoding(domain_size);
  for (double& r : encoding) r = u(rng);
  return sum_encoding_injectivity(encoding, max_card);
}

}  // namespace laf
