#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "laf/datasets.hpp"

namespace laf::data {

/// Images scaled to [0,1] and their digit labels.
struct MnistImages {
  std::size_t count = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<float> pixels;  // count * rows * cols
  std::vector<std::uint8_t> labels;

  std::size_t image_size() const { return rows * cols; }
  std::span<const float> image(std::size_t i) const { return {pixels.data() + i * image_size(), image_size()}; }
  /// The first n items (n clipped to count).
  MnistImages head(std::size_t n) const;
};

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

/// Parses an IDX image/label file pair. Throws FormatError (with the byte
/// offset) on bad magic, truncation or a count mismatch, IoError if a file is missing.
MnistImages mnist_load_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path);

/// Standard file names inside an MNIST directory.
MnistImages mnist_load_dir(const std::filesystem::path& dir, bool train);

enum class Split { kTrain, kTest };

struct MnistSetSample {
  std::vector<std::size_t> image_indices;  // into the split's MnistImages
  std::vector<int> digits;
  double label = 0.0;
  Split split = Split::kTrain;
};

/// Replaces every integer of every scalar set by a uniformly drawn image of
/// that digit from `images` (which must be the `split` pool); labels are kept.
std::vector<MnistSetSample> mnist_setify(std::span<const ScalarSetSample> samples, const MnistImages& images,
                                         std::uint64_t seed, Split split);

}  // namespace laf::data
