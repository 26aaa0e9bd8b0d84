#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace laf::data {

enum class TargetKind { kCount, kSum, kMax, kMin, kMean, kMedian, kInverseCount, kMoment, kSkewness, kKurtosis };

/// Ground-truth aggregator of a synthetic task. `k` is used by kMoment only.
struct Target {
  TargetKind kind = TargetKind::kSum;
  int k = 1;

  /// "count", "sum", ..., "inverse_count", "moment<k>" (e.g. "moment2"), "skewness", "kurtosis".
  std::string name() const;
  /// Inverse of name(); throws ConfigError listing the valid names.
  static Target parse(std::string_view name);

  friend bool operator==(const Target&, const Target&) = default;
};

/// Names accepted by Target::parse, for usage messages.
std::vector<std::string> target_names();

/// count = N, median averages the two middle order statistics for even N,
/// inverse_count = 1/N, moment(k) = mean of x^k, skewness/kurtosis use
/// population moments and are 0 on constant sets. Throws DomainError on an empty set.
double target_value(const Target& target, std::span<const double> xs);
double target_value(const Target& target, std::span<const int> xs);

struct ScalarSetSample {
  std::vector<int> elements;
  double label = 0.0;

  friend bool operator==(const ScalarSetSample&, const ScalarSetSample&) = default;
};

/// n sets with cardinality ~ Uniform{2..max_card} and elements ~ Uniform{0..9}.
std::vector<ScalarSetSample> gen_scalar_train(const Target& target, std::size_t n, int max_card, std::uint64_t seed);

struct ScalarTestSet {
  std::vector<ScalarSetSample> samples;
  /// False when the pilot labels were constant and sampling fell back to plain draws.
  bool stratified = true;
};

/// Label-diversified test sets with cardinality in 2..max_card: the label
/// range of a 10n-draw pilot is split into 20 equal-width bins; each sample
/// picks a nonempty bin uniformly and rejection-samples into it (at most 1000
/// draws, otherwise the draw nearest to the bin is kept).
ScalarTestSet gen_scalar_test(const Target& target, std::size_t n, int max_card, std::uint64_t seed);

inline constexpr int kLabelBins = 20;
inline constexpr int kMaxRejections = 1000;

struct RealSetSample {
  std::vector<double> elements;
  double label = 0.0;
};

/// Sets of reals ~ Uniform[0,1] with cardinality ~ Uniform{2..max_card}.
std::vector<RealSetSample> gen_real_sets(const Target& target, std::size_t n, int max_card, std::uint64_t seed);

/// Cache file: one line per set, "K,x_1,...,x_K,label".
std::string format_scalar_cache(std::span<const ScalarSetSample> samples);
void write_scalar_cache(const std::filesystem::path& path, std::span<const ScalarSetSample> samples);
std::vector<ScalarSetSample> read_scalar_cache(const std::filesystem::path& path);

}  // namespace laf::data
