#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>

#include "laf/datasets.hpp"
#include "laf/errors.hpp"
#include "laf/mnist.hpp"
#include "oracles.hpp"

using namespace laf;
using namespace laf::data;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("laf_test_" + tag + "_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void put_u32(std::string& out, std::uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<char>((v >> s) & 0xFF));
}

// Writes an IDX pair with `n` 2x2 images whose pixels all equal 51 * label.
void write_idx(const fs::path& dir, std::uint32_t n, std::uint32_t image_magic = kIdxImageMagic,
               std::size_t chop = 0, std::uint32_t label_count = 0) {
  std::string img, lab;
  put_u32(img, image_magic);
  put_u32(img, n);
  put_u32(img, 2);
  put_u32(img, 2);
  put_u32(lab, kIdxLabelMagic);
  put_u32(lab, label_count ? label_count : n);
  for (std::uint32_t i = 0; i < n; ++i) {
    const auto digit = static_cast<unsigned char>(i % 5);
    for (int p = 0; p < 4; ++p) img.push_back(static_cast<char>(51 * digit));
    lab.push_back(static_cast<char>(digit));
  }
  img.resize(img.size() - chop);
  std::ofstream(dir / "img", std::ios::binary) << img;
  std::ofstream(dir / "lab", std::ios::binary) << lab;
}

}  // namespace

TEST_CASE("target_value examples") {
  CHECK(target_value(Target{TargetKind::kMedian}, std::vector<int>{1, 3, 7}) == 3);
  CHECK(target_value(Target{TargetKind::kMedian}, std::vector<int>{1, 3}) == 2);
  CHECK(target_value(Target{TargetKind::kSkewness}, std::vector<int>{0, 0, 9}) ==
        doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
  CHECK(target_value(Target{TargetKind::kInverseCount}, std::vector<int>{4, 4, 4, 4}) == 0.25);
  CHECK(target_value(Target{TargetKind::kMoment, 2}, std::vector<int>{1, 3}) == 5.0);
  CHECK(target_value(Target{TargetKind::kKurtosis}, std::vector<int>{2, 2}) == 0.0);
  CHECK_THROWS_AS(target_value(Target{TargetKind::kSum}, std::vector<int>{}), DomainError);
}

TEST_CASE("target names round-trip and reject unknown names") {
  for (const auto& t : oracle::all_targets()) CHECK(Target::parse(t.name()) == t);
  CHECK(Target::parse("moment4") == Target{TargetKind::kMoment, 4});
  try {
    Target::parse("mode");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("inverse_count") != std::string::npos);
  }
  CHECK_THROWS_AS(Target::parse("moment0"), ConfigError);
}

TEST_CASE("target_value agrees with brute force on random sets") {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> card(1, 12), digit(0, 9);
  for (const auto& t : oracle::all_targets()) {
    const bool exact = t.kind != TargetKind::kMoment && t.kind != TargetKind::kSkewness &&
                       t.kind != TargetKind::kKurtosis;
    for (int i = 0; i < 10000; ++i) {
      std::vector<int> xs(static_cast<std::size_t>(card(rng)));
      for (int& x : xs) x = digit(rng);
      const double got = target_value(t, xs);
      const double want = oracle::target(t, xs);
      if (exact) {
        REQUIRE_MESSAGE(got == want, t.name());
      } else {
        REQUIRE_MESSAGE(std::abs(got - want) <= 1e-12 * std::max(1.0, std::abs(want)), t.name());
      }
    }
  }
}

TEST_CASE("gen_scalar_train") {
  const Target sum{TargetKind::kSum};
  const auto a = gen_scalar_train(sum, 100000, 10, 5);
  REQUIRE(a.size() == 100000);
  std::map<int, int> hist;
  for (const auto& s : a) {
    REQUIRE(s.elements.size() >= 2);
    REQUIRE(s.elements.size() <= 10);
    for (int x : s.elements) REQUIRE((x >= 0 && x <= 9));
    REQUIRE(s.label == oracle::target(sum, s.elements));
    ++hist[static_cast<int>(s.elements.size())];
  }
  // Chi-square against Uniform{2..10}: 8 degrees of freedom, critical value 20.09 at alpha = 0.01.
  double chi2 = 0.0;
  const double expected = 100000.0 / 9.0;
  for (int k = 2; k <= 10; ++k) chi2 += std::pow(hist[k] - expected, 2) / expected;
  CHECK(chi2 < 20.09);

  CHECK(gen_scalar_train(sum, 500, 10, 5) == std::vector<ScalarSetSample>(a.begin(), a.begin() + 500));
  CHECK(gen_scalar_train(sum, 500, 10, 6) != std::vector<ScalarSetSample>(a.begin(), a.begin() + 500));
  CHECK_THROWS_AS(gen_scalar_train(sum, 10, 1, 5), ConfigError);
}

TEST_CASE("gen_scalar_test diversifies labels") {
  const Target max{TargetKind::kMax};
  const auto t = gen_scalar_test(max, 5000, 50, 3);
  REQUIRE(t.samples.size() == 5000);
  CHECK(t.stratified);
  std::map<double, int> hist;
  for (const auto& s : t.samples) {
    REQUIRE(s.elements.size() >= 2);
    REQUIRE(s.elements.size() <= 50);
    REQUIRE(s.label == oracle::target(max, s.elements));
    ++hist[s.label];
  }
  for (const auto& [label, n] : hist) CHECK_MESSAGE(n <= 0.3 * 5000, "label " << label);

  const auto count = gen_scalar_test(Target{TargetKind::kCount}, 2000, 5, 3);
  std::set<double> labels;
  for (const auto& s : count.samples) labels.insert(s.label);
  CHECK(labels == std::set<double>{2, 3, 4, 5});

  CHECK(gen_scalar_test(max, 300, 20, 9).samples == gen_scalar_test(max, 300, 20, 9).samples);
}

TEST_CASE("gen_scalar_test falls back on a degenerate target") {
  // Sets of exactly two elements: the count label is constant.
  const auto t = gen_scalar_test(Target{TargetKind::kCount}, 100, 2, 1);
  CHECK_FALSE(t.stratified);
  CHECK(t.samples.size() == 100);
}

TEST_CASE("gen_real_sets") {
  const Target mean{TargetKind::kMean};
  const auto sets = gen_real_sets(mean, 1000, 10, 4);
  REQUIRE(sets.size() == 1000);
  for (const auto& s : sets) {
    REQUIRE(s.elements.size() >= 2);
    REQUIRE(s.elements.size() <= 10);
    for (double x : s.elements) REQUIRE((x >= 0.0 && x <= 1.0));
    CHECK(s.label == doctest::Approx(oracle::mean(s.elements)).epsilon(1e-14));
  }
}

TEST_CASE("scalar cache round-trip and malformed lines") {
  TempDir dir("cache");
  const auto samples = gen_scalar_test(Target{TargetKind::kMean}, 200, 10, 2).samples;
  write_scalar_cache(dir.path / "c.csv", samples);
  CHECK(read_scalar_cache(dir.path / "c.csv") == samples);
  const auto first = format_scalar_cache(std::span(samples).first(1));
  CHECK(std::count(first.begin(), first.end(), ',') == static_cast<long>(samples[0].elements.size()) + 1);

  std::ofstream(dir.path / "bad.csv") << "3,1,2,5\n";
  CHECK_THROWS_AS(read_scalar_cache(dir.path / "bad.csv"), FormatError);
  CHECK_THROWS_AS(read_scalar_cache(dir.path / "missing.csv"), IoError);
}

TEST_CASE("IDX parsing of synthetic files") {
  TempDir dir("idx");
  write_idx(dir.path, 10);
  const auto m = mnist_load_idx(dir.path / "img", dir.path / "lab");
  CHECK(m.count == 10);
  CHECK(m.image_size() == 4);
  CHECK(m.labels[3] == 3);
  CHECK(m.image(3)[0] == doctest::Approx(153.0 / 255.0));
  CHECK(m.head(4).count == 4);
  CHECK(m.head(40).count == 10);
}

TEST_CASE("IDX errors") {
  TempDir dir("idxerr");
  SUBCASE("bad magic") {
    write_idx(dir.path, 4, 0x00000802);
    try {
      mnist_load_idx(dir.path / "img", dir.path / "lab");
      FAIL("expected FormatError");
    } catch (const FormatError& e) {
      CHECK(std::string(e.what()).find("offset") != std::string::npos);
    }
  }
  SUBCASE("truncated") {
    write_idx(dir.path, 4, kIdxImageMagic, 3);
    CHECK_THROWS_AS(mnist_load_idx(dir.path / "img", dir.path / "lab"), FormatError);
  }
  SUBCASE("count mismatch") {
    write_idx(dir.path, 4, kIdxImageMagic, 0, 5);
    CHECK_THROWS_AS(mnist_load_idx(dir.path / "img", dir.path / "lab"), FormatError);
  }
  SUBCASE("missing") { CHECK_THROWS_AS(mnist_load_idx(dir.path / "nope", dir.path / "lab"), IoError); }
}

TEST_CASE("mnist_setify") {
  TempDir dir("setify");
  write_idx(dir.path, 50);
  const auto images = mnist_load_idx(dir.path / "img", dir.path / "lab");
  std::vector<ScalarSetSample> scalar{{{3, 3, 3, 3, 3, 3}, 18.0}, {{1, 4}, 5.0}};
  const auto sets = mnist_setify(scalar, images, 1, Split::kTrain);
  REQUIRE(sets.size() == 2);
  for (std::size_t s = 0; s < 2; ++s) {
    CHECK(sets[s].label == scalar[s].label);
    CHECK(sets[s].digits == scalar[s].elements);
    CHECK(sets[s].split == Split::kTrain);
    for (std::size_t i = 0; i < sets[s].image_indices.size(); ++i) {
      REQUIRE(sets[s].image_indices[i] < images.count);
      CHECK(images.labels[sets[s].image_indices[i]] == sets[s].digits[i]);
    }
  }
  // Six draws from the ten images of digit 3 are not all the same image.
  std::set<std::size_t> distinct(sets[0].image_indices.begin(), sets[0].image_indices.end());
  CHECK(distinct.size() > 1);
}

TEST_CASE("MNIST files from LAF_DATA_DIR") {
  const auto dir = oracle::mnist_dir();
  if (dir.empty() || !fs::exists(dir / "train-images-idx3-ubyte")) {
    MESSAGE("LAF_DATA_DIR not set or incomplete; skipping");
    return;
  }
  const auto train = mnist_load_dir(dir, true);
  const auto test = mnist_load_dir(dir, false);
  CHECK(train.count == 60000);
  CHECK(test.count == 10000);
  CHECK(train.image_size() == 784);
  CHECK(std::all_of(train.labels.begin(), train.labels.end(), [](auto l) { return l <= 9; }));
  CHECK(std::all_of(test.pixels.begin(), test.pixels.end(), [](float p) { return p >= 0.0f && p <= 1.0f; }));

  const auto scalar = gen_scalar_train(Target{TargetKind::kSum}, 200, 10, 1);
  const auto sets = mnist_setify(scalar, test, 2, Split::kTest);
  for (const auto& s : sets)
    for (std::size_t i = 0; i < s.digits.size(); ++i) {
      REQUIRE(s.image_indices[i] < test.count);
      CHECK(test.labels[s.image_indices[i]] == s.digits[i]);
    }
}
