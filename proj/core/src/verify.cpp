#include "laf/verify.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>

#include "laf/baselines.hpp"
#include "laf/grad_check.hpp"
#include "laf/laf.hpp"
#include "laf/model.hpp"
#include "laf/ops.hpp"
#include "laf/train.hpp"

namespace laf::harness {

namespace {

// Exponents this close to 0 would cross into the invalid region under a
// finite-difference perturbation.
constexpr double kMinExponent = 1e-3;
// Fraction of the denominator's magnitude that may cancel.
constexpr double kMaxCancellation = 0.75;
constexpr double kPoleDistance = 1e-3;

bool denominator_is_benign(std::span<const double> xs, const LafParams& p) {
  std::vector<double> comp(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) comp[i] = 1.0 - xs[i];
  const double t3 = p.gamma * l_ab(xs, p.e, p.f);
  const double t4 = p.delta * l_ab(comp, p.g, p.h);
  const double den = t3 + t4;
  return std::abs(den) >= (1.0 - kMaxCancellation) * (std::abs(t3) + std::abs(t4)) && std::abs(den) > 1e-6;
}

double block_relative_error(std::span<const double> a, std::span<const double> n) {
  double diff = 0.0, na = 0.0, nn = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - n[i]) * (a[i] - n[i]);
    na += a[i] * a[i];
    nn += n[i] * n[i];
  }
  return std::sqrt(diff) / std::max(1e-8, std::sqrt(na) + std::sqrt(nn));
}

GradSuiteResult finish(std::string name, std::size_t instances, double worst, double threshold) {
  return {std::move(name), instances, worst, threshold, worst < threshold};
}

}  // namespace

GradSuiteResult grad_suite_laf_unit(std::uint64_t seed, std::size_t instances) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> card(2, 8);
  std::uniform_real_distribution<double> value(0.05, 0.95);
  double worst = 0.0;
  for (std::size_t it = 0; it < instances; ++it) {
    std::vector<double> xs;
    LafParams p;
    do {
      xs.assign(static_cast<std::size_t>(card(rng)), 0.0);
      for (double& x : xs) x = value(rng);
      p = project_params(init_params(rng));
      auto v = p.to_array();
      for (std::size_t k = 0; k < 8; ++k) v[k] = std::max(v[k], kMinExponent);
      p = LafParams::from_array(v);
    } while (!denominator_is_benign(xs, p));

    const std::size_t n = xs.size();
    nd::Tensor point({n + kLafParamCount});
    std::copy(xs.begin(), xs.end(), point.data());
    const auto arr = p.to_array();
    std::copy(arr.begin(), arr.end(), point.data() + n);
    auto split = [n](const nd::Tensor& t) {
      return std::make_pair(std::vector<double>(t.data(), t.data() + n),
                            LafParams::from_array(std::span<const double>(t.data() + n, kLafParamCount)));
    };
    const auto res = nd::grad_check(
        [&](const nd::Tensor& t) {
          const auto [x, q] = split(t);
          return laf_forward(x, q);
        },
        [&](const nd::Tensor& t) {
          const auto [x, q] = split(t);
          const LafGradient g = laf_backward(x, q, 1.0);
          nd::Tensor out({n + kLafParamCount});
          std::copy(g.xs.begin(), g.xs.end(), out.data());
          std::copy(g.params.begin(), g.params.end(), out.data() + n);
          return out;
        },
        point, kGradStep);
    worst = std::max(worst, res.max_rel_error);
  }
  return finish("laf-unit", instances, worst, kUnitGradTolerance);
}

GradSuiteResult grad_suite_fixed_pool(bool pna, std::uint64_t seed, std::size_t instances) {
  const auto kind = pna ? pool::FixedPoolKind::kPna7 : pool::FixedPoolKind::kDeepSets9;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> num_sets(1, 3);
  std::uniform_int_distribution<int> card(2, 6);
  std::uniform_int_distribution<int> dims(1, 2);
  std::uniform_real_distribution<double> value(0.0, 1.0);
  std::normal_distribution<double> weight(0.0, 1.0);
  double worst = 0.0;
  for (std::size_t it = 0; it < instances; ++it) {
    const auto d = static_cast<std::size_t>(dims(rng));
    std::vector<std::size_t> offsets{0};
    const int n = num_sets(rng);
    for (int s = 0; s < n; ++s) offsets.push_back(offsets.back() + static_cast<std::size_t>(card(rng)));
    const std::size_t total = offsets.back();
    // Distinct values per column keep max unique and the spread away from 0.
    nd::Tensor point({total, d});
    for (std::size_t s = 0; s + 1 < offsets.size(); ++s) {
      for (std::size_t j = 0; j < d; ++j) {
        bool ok = false;
        while (!ok) {
          for (std::size_t i = offsets[s]; i < offsets[s + 1]; ++i) point.at(i, j) = value(rng);
          ok = true;
          for (std::size_t a = offsets[s]; a < offsets[s + 1]; ++a)
            for (std::size_t b = a + 1; b < offsets[s + 1]; ++b)
              if (std::abs(point.at(a, j) - point.at(b, j)) < 0.05) ok = false;
        }
      }
    }
    const std::size_t width = pool::pool_units(kind).size() * d;
    nd::Tensor w({static_cast<std::size_t>(n), width});
    for (double& v : w.values()) v = weight(rng);
    const auto res = nd::grad_check(
        [&](nd::Tape& tape, nd::Var x) {
          return nd::sum(nd::mul(pool::fixed_pool(x, offsets, kind), tape.constant(w)));
        },
        point, kGradStep);
    worst = std::max(worst, res.max_rel_error);
  }
  return finish(pna ? "pna7" : "deepsets9", instances, worst, kUnitGradTolerance);
}

namespace {

// Distance of every LAF denominator of the batch from its pole, measured along
// the gamma/delta axes, must be well above the finite-difference step.
bool model_is_benign(const SetModel& model, const SetBatch& batch) {
  const auto& table = model.params().value("embedding");
  const auto units = model.laf_units();
  const std::size_t dim = table.shape()[1];
  std::vector<double> xs, cs;
  for (std::size_t s = 0; s < batch.num_sets(); ++s) {
    for (std::size_t j = 0; j < dim; ++j) {
      xs.clear();
      cs.clear();
      for (std::size_t i = batch.offsets[s]; i < batch.offsets[s + 1]; ++i) {
        xs.push_back(nd::sigmoid(table.at(static_cast<std::size_t>(batch.elements[i]), j)));
        cs.push_back(1.0 - xs.back());
      }
      for (const auto& p : units) {
        const double t3 = l_ab(xs, p.e, p.f);
        const double t4 = l_ab(cs, p.g, p.h);
        if (std::abs(p.gamma * t3 + p.delta * t4) < kPoleDistance * (t3 + t4)) return false;
      }
    }
  }
  return true;
}

}  // namespace

GradSuiteResult grad_suite_scalar_model(std::uint64_t seed, std::size_t instances) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> card(2, 10);
  std::uniform_int_distribution<int> digit(0, 9);
  std::uniform_real_distribution<double> offset(0.5, 2.0);
  double worst = 0.0;
  for (std::size_t it = 0; it < instances; ++it) {
    std::vector<data::ScalarSetSample> samples(4);
    SetBatch batch;
    std::optional<SetModel> model;
    do {
      model = SetModel::scalar(ModelSpec{}, rng());
      auto& laf = model->params().value("laf");
      for (std::size_t r = 0; r < laf.shape()[0]; ++r)
        for (std::size_t k = 0; k < 8; ++k) laf.at(r, k) = std::max(laf.at(r, k), kMinExponent);
      for (auto& s : samples) {
        s.elements.resize(static_cast<std::size_t>(card(rng)));
        for (int& x : s.elements) x = digit(rng);
      }
      const std::vector<std::size_t> idx{0, 1, 2, 3};
      batch = ScalarSets(samples).batch(idx);
    } while (!model_is_benign(*model, batch));

    // Targets sit away from the MAE kink, three above and one below.
    const auto pred = model->predict(batch);
    std::vector<double> targets(pred.size());
    for (std::size_t i = 0; i < pred.size(); ++i) targets[i] = pred[i] + (i == 3 ? -1.0 : 1.0) * offset(rng);

    std::vector<std::pair<std::string, std::size_t>> blocks;
    std::size_t total = 0;
    for (const auto& [name, blk] : model->params().blocks()) {
      blocks.emplace_back(name, blk.value.size());
      total += blk.value.size();
    }
    auto load = [&](const nd::Tensor& t) {
      std::size_t pos = 0;
      for (const auto& [name, size] : blocks) {
        auto& v = model->params().value(name);
        std::copy(t.data() + pos, t.data() + pos + size, v.data());
        pos += size;
      }
    };
    nd::Tensor point({total});
    {
      std::size_t pos = 0;
      for (const auto& [name, size] : blocks) {
        const auto& v = model->params().value(name);
        std::copy(v.data(), v.data() + size, point.data() + pos);
        pos += size;
      }
    }
    const auto res = nd::grad_check(
        [&](const nd::Tensor& t) {
          load(t);
          return mean_absolute_error(model->predict(batch), targets);
        },
        [&](const nd::Tensor& t) {
          load(t);
          model->params().zero_grad();
          nd::Tape tape;
          tape.backward(nd::mae_loss(model->forward(tape, batch), nd::Tensor::vector(targets)));
          nd::Tensor g({total});
          std::size_t pos = 0;
          for (const auto& [name, size] : blocks) {
            const auto& gb = model->params().block(name).grad;
            std::copy(gb.data(), gb.data() + size, g.data() + pos);
            pos += size;
          }
          return g;
        },
        point, kGradStep);
    std::size_t pos = 0;
    for (const auto& [name, size] : blocks) {
      worst = std::max(worst, block_relative_error(std::span<const double>(res.analytic.data() + pos, size),
                                                   std::span<const double>(res.numeric.data() + pos, size)));
      pos += size;
    }
  }
  return finish("scalar-model", instances, worst, kModelGradTolerance);
}

std::vector<GradSuiteResult> run_grad_checks(std::uint64_t seed, std::size_t instances) {
  return {grad_suite_laf_unit(derive_seed(seed, 1), instances),
          grad_suite_fixed_pool(false, derive_seed(seed, 2), instances),
          grad_suite_fixed_pool(true, derive_seed(seed, 3), instances),
          grad_suite_scalar_model(derive_seed(seed, 4), instances)};
}

}  // namespace laf::harness
