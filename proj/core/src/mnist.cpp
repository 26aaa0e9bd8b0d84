#include "laf/mnist.hpp"

#include <algorithm>
#include <random>
#include <string>

#include "laf/errors.hpp"
#include "laf/io.hpp"

namespace laf::data {

namespace {

std::uint32_t read_be32(const std::string& bytes, std::size_t offset, const std::filesystem::path& path) {
  if (bytes.size() < offset + 4) {
    throw FormatError(path.string() + ": truncated header at byte offset " + std::to_string(offset));
  }
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + offset);
  return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) | std::uint32_t{p[3]};
}

void require_magic(std::uint32_t got, std::uint32_t want, const std::filesystem::path& path) {
  if (got != want) {
    char buf[96];
    std::snprintf(buf, sizeof buf, ": bad magic 0x%08x at byte offset 0 (expected 0x%08x)", got, want);
    throw FormatError(path.string() + buf);
  }
}

}  // namespace

MnistImages MnistImages::head(std::size_t n) const {
  MnistImages out;
  out.count = std::min(n, count);
  out.rows = rows;
  out.cols = cols;
  out.pixels.assign(pixels.begin(), pixels.begin() + static_cast<std::ptrdiff_t>(out.count * image_size()));
  out.labels.assign(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(out.count));
  return out;
}

MnistImages mnist_load_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path) {
  const std::string img = io::read_file(images_path);
  const std::string lab = io::read_file(labels_path);

  require_magic(read_be32(img, 0, images_path), kIdxImageMagic, images_path);
  require_magic(read_be32(lab, 0, labels_path), kIdxLabelMagic, labels_path);
  const std::size_t n_img = read_be32(img, 4, images_path);
  const std::size_t rows = read_be32(img, 8, images_path);
  const std::size_t cols = read_be32(img, 12, images_path);
  const std::size_t n_lab = read_be32(lab, 4, labels_path);
  if (n_img != n_lab) {
    throw FormatError(images_path.string() + ": item count " + std::to_string(n_img) + " at byte offset 4 does not match " +
                      std::to_string(n_lab) + " labels in " + labels_path.string());
  }
  const std::size_t img_bytes = 16 + n_img * rows * cols;
  if (img.size() < img_bytes) {
    throw FormatError(images_path.string() + ": truncated at byte offset " + std::to_string(img.size()) + ", expected " +
                      std::to_string(img_bytes) + " bytes");
  }
  if (lab.size() < 8 + n_lab) {
    throw FormatError(labels_path.string() + ": truncated at byte offset " + std::to_string(lab.size()) + ", expected " +
                      std::to_string(8 + n_lab) + " bytes");
  }

  MnistImages out;
  out.count = n_img;
  out.rows = rows;
  out.cols = cols;
  out.pixels.resize(n_img * rows * cols);
  const auto* px = reinterpret_cast<const unsigned char*>(img.data() + 16);
  for (std::size_t i = 0; i < out.pixels.size(); ++i) out.pixels[i] = static_cast<float>(px[i]) / 255.0f;
  out.labels.resize(n_lab);
  const auto* lb = reinterpret_cast<const unsigned char*>(lab.data() + 8);
  for (std::size_t i = 0; i < n_lab; ++i) {
    if (lb[i] > 9) {
      throw FormatError(labels_path.string() + ": label " + std::to_string(lb[i]) + " at byte offset " +
                        std::to_string(8 + i) + " is not a digit");
    }
    out.labels[i] = lb[i];
  }
  return out;
}

MnistImages mnist_load_dir(const std::filesystem::path& dir, bool train) {
  return train ? mnist_load_idx(dir / "train-images-idx3-ubyte", dir / "train-labels-idx1-ubyte")
               : mnist_load_idx(dir / "t10k-images-idx3-ubyte", dir / "t10k-labels-idx1-ubyte");
}

std::vector<MnistSetSample> mnist_setify(std::span<const ScalarSetSample> samples, const MnistImages& images,
                                         std::uint64_t seed, Split split) {
  std::vector<std::vector<std::size_t>> by_digit(10);
  for (std::size_t i = 0; i < images.count; ++i) by_digit[images.labels[i]].push_back(i);
  std::mt19937_64 rng(seed);
  std::vector<MnistSetSample> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    MnistSetSample m;
    m.split = split;
    m.label = s.label;
    m.digits = s.elements;
    for (int digit : s.elements) {
      if (digit < 0 || digit > 9) throw DomainError("mnist_setify: element " + std::to_string(digit) + " is not a digit");
      const auto& pool = by_digit[static_cast<std::size_t>(digit)];
      if (pool.empty()) throw DomainError("mnist_setify: no image of digit " + std::to_string(digit));
      std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
      m.image_indices.push_back(pool[pick(rng)]);
    }
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace laf::data
