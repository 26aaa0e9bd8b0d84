#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

namespace laf {

struct InjectivityReport {
  bool injective = false;
  std::size_t multisets = 0;
  /// Smallest gap between two sorted sum encodings.
  double min_gap = 0.0;
};

/// Largest number of multisets the brute-force check will enumerate.
inline constexpr std::size_t kInjectivityBudget = 100000;

/// Number of multisets of size 0..max_card over `domain_size` symbols,
/// saturating at SIZE_MAX.
std::size_t count_multisets(std::size_t domain_size, std::size_t max_card);

/// Enumerates every multiset of size 0..max_card over symbols 0..n-1 (n =
/// encoding.size()), encodes each as the sum of encoding[symbol], and reports
/// whether all encodings are pairwise further apart than 1e-12.
/// Throws ConfigError when the enumeration exceeds kInjectivityBudget.
InjectivityReport sum_encoding_injectivity(std::span<const double> encoding, std::size_t max_card);

/// Same check with encoding[i] ~ Uniform[0,1] drawn from `seed`.
InjectivityReport sum_encoding_injectivity(std::size_t domain_size, std::size_t max_card, std::uint64_t seed);

}  // namespace laf
