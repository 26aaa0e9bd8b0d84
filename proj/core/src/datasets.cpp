#include "laf/datasets.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "laf/baselines.hpp"
#include "laf/errors.hpp"
#include "laf/io.hpp"

namespace laf::data {

namespace {

struct NamedKind {
  const char* name;
  TargetKind kind;
};

constexpr NamedKind kNamed[] = {
    {"count", TargetKind::kCount},     {"sum", TargetKind::kSum},
    {"max", TargetKind::kMax},         {"min", TargetKind::kMin},
    {"mean", TargetKind::kMean},       {"median", TargetKind::kMedian},
    {"inverse_count", TargetKind::kInverseCount}, {"skewness", TargetKind::kSkewness},
    {"kurtosis", TargetKind::kKurtosis},
};

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (const auto& x : v) s += (s.empty() ? "" : ", ") + x;
  return s;
}

ScalarSetSample draw_scalar(const Target& target, int max_card, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> card(2, max_card);
  std::uniform_int_distribution<int> digit(0, 9);
  ScalarSetSample s;
  s.elements.resize(static_cast<std::size_t>(card(rng)));
  for (int& x : s.elements) x = digit(rng);
  s.label = target_value(target, s.elements);
  return s;
}

void require_card(int max_card) {
  if (max_card < 2) throw ConfigError("maximum set cardinality must be >= 2, got " + std::to_string(max_card));
}

}  // namespace

std::string Target::name() const {
  if (kind == TargetKind::kMoment) return "moment" + std::to_string(k);
  for (const auto& nk : kNamed)
    if (nk.kind == kind) return nk.name;
  return "unknown";
}

std::vector<std::string> target_names() {
  std::vector<std::string> names;
  for (const auto& nk : kNamed) names.emplace_back(nk.name);
  names.emplace_back("moment<k>");
  return names;
}

Target Target::parse(std::string_view name) {
  for (const auto& nk : kNamed)
    if (name == nk.name) return Target{nk.kind, 1};
  if (name.rfind("moment", 0) == 0 && name.size() > 6) {
    int k = 0;
    const char* first = name.data() + 6;
    const char* last = name.data() + name.size();
    auto [ptr, ec] = std::from_chars(first, last, k);
    if (ec == std::errc() && ptr == last && k >= 1) return Target{TargetKind::kMoment, k};
  }
  throw ConfigError("unknown target '" + std::string(name) + "'; valid: " + join(target_names()));
}

double target_value(const Target& target, std::span<const double> xs) {
  if (xs.empty()) throw DomainError("target_value: empty set");
  const double n = static_cast<double>(xs.size());
  switch (target.kind) {
    case TargetKind::kCount: return n;
    case TargetKind::kInverseCount: return 1.0 / n;
    case TargetKind::kSum: {
      double s = 0.0;
      for (double x : xs) s += x;
      return s;
    }
    case TargetKind::kMean: {
      double s = 0.0;
      for (double x : xs) s += x;
      return s / n;
    }
    case TargetKind::kMax: return *std::max_element(xs.begin(), xs.end());
    case TargetKind::kMin: return *std::min_element(xs.begin(), xs.end());
    case TargetKind::kMedian: {
      std::vector<double> v(xs.begin(), xs.end());
      std::sort(v.begin(), v.end());
      const std::size_t m = v.size() / 2;
      return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
    }
    case TargetKind::kMoment: {
      double s = 0.0;
      for (double x : xs) s += std::pow(x, target.k);
      return s / n;
    }
    case TargetKind::kSkewness: return pool::sample_moments(xs).skewness;
    case TargetKind::kKurtosis: return pool::sample_moments(xs).kurtosis;
  }
  return 0.0;
}

double target_value(const Target& target, std::span<const int> xs) {
  std::vector<double> v(xs.begin(), xs.end());
  return target_value(target, std::span<const double>(v));
}

std::vector<ScalarSetSample> gen_scalar_train(const Target& target, std::size_t n, int max_card, std::uint64_t seed) {
  require_card(max_card);
  std::mt19937_64 rng(seed);
  std::vector<ScalarSetSample> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(draw_scalar(target, max_card, rng));
  return out;
}

ScalarTestSet gen_scalar_test(const Target& target, std::size_t n, int max_card, std::uint64_t seed) {
  require_card(max_card);
  std::mt19937_64 rng(seed);
  ScalarTestSet out;
  out.samples.reserve(n);

  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  std::vector<double> pilot(10 * n);
  for (double& label : pilot) {
    label = draw_scalar(target, max_card, rng).label;
    lo = std::min(lo, label);
    hi = std::max(hi, label);
  }
  if (n == 0) return out;
  if (!(hi - lo > 1e-12)) {
    out.stratified = false;
    for (std::size_t i = 0; i < n; ++i) out.samples.push_back(draw_scalar(target, max_card, rng));
    return out;
  }

  const double width = (hi - lo) / kLabelBins;
  auto bin_of = [&](double label) {
    const int b = static_cast<int>(std::floor((label - lo) / width));
    return std::clamp(b, 0, kLabelBins - 1);
  };
  std::vector<int> nonempty;
  {
    std::vector<bool> seen(kLabelBins, false);
    for (double label : pilot) seen[static_cast<std::size_t>(bin_of(label))] = true;
    for (int b = 0; b < kLabelBins; ++b)
      if (seen[static_cast<std::size_t>(b)]) nonempty.push_back(b);
  }
  std::uniform_int_distribution<std::size_t> pick(0, nonempty.size() - 1);
  for (std::size_t i = 0; i < n; ++i) {
    const int bin = nonempty[pick(rng)];
    const double bin_lo = lo + bin * width;
    const double bin_hi = bin_lo + width;
    ScalarSetSample best;
    double best_dist = std::numeric_limits<double>::infinity();
    for (int attempt = 0; attempt < kMaxRejections; ++attempt) {
      ScalarSetSample s = draw_scalar(target, max_card, rng);
      if (bin_of(s.label) == bin) {
        best = std::move(s);
        break;
      }
      const double dist = s.label < bin_lo ? bin_lo - s.label : s.label - bin_hi;
      if (dist < best_dist) {
        best_dist = dist;
        best = std::move(s);
      }
    }
    out.samples.push_back(std::move(best));
  }
  return out;
}

std::vector<RealSetSample> gen_real_sets(const Target& target, std::size_t n, int max_card, std::uint64_t seed) {
  require_card(max_card);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> card(2, max_card);
  std::uniform_real_distribution<double> value(0.0, 1.0);
  std::vector<RealSetSample> out(n);
  for (auto& s : out) {
    s.elements.resize(static_cast<std::size_t>(card(rng)));
    for (double& x : s.elements) x = value(rng);
    s.label = target_value(target, s.elements);
  }
  return out;
}

std::string format_scalar_cache(std::span<const ScalarSetSample> samples) {
  std::string text;
  for (const auto& s : samples) {
    text += std::to_string(s.elements.size());
    for (int x : s.elements) text += "," + std::to_string(x);
    text += "," + io::format_double(s.label) + "\n";
  }
  return text;
}

void write_scalar_cache(const std::filesystem::path& path, std::span<const ScalarSetSample> samples) {
  io::write_atomic(path, format_scalar_cache(samples));
}

std::vector<ScalarSetSample> read_scalar_cache(const std::filesystem::path& path) {
  const std::string text = io::read_file(path);
  std::vector<ScalarSetSample> out;
  std::istringstream lines(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(lines, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::istringstream ls(line);
    std::string f;
    while (std::getline(ls, f, ',')) fields.push_back(f);
    auto fail = [&](const std::string& why) {
      return FormatError(path.string() + ":" + std::to_string(lineno) + ": " + why);
    };
    std::size_t k = 0;
    try {
      k = std::stoul(fields.at(0));
    } catch (const std::exception&) {
      throw fail("bad cardinality field");
    }
    if (fields.size() != k + 2) throw fail("expected " + std::to_string(k + 2) + " fields, got " + std::to_string(fields.size()));
    ScalarSetSample s;
    try {
      for (std::size_t i = 0; i < k; ++i) s.elements.push_back(std::stoi(fields[i + 1]));
      s.label = std::stod(fields[k + 1]);
    } catch (const std::exception&) {
      throw fail("non-numeric field");
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace laf::data
