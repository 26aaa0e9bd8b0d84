#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "laf/baselines.hpp"
#include "laf/datasets.hpp"
#include "laf/laf.hpp"
#include "laf/model.hpp"
#include "laf/ops.hpp"
#include "laf/optim.hpp"
#include "laf/train.hpp"

using namespace laf;

namespace {

std::vector<double> random_set(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> xs(n);
  for (double& x : xs) x = u(rng);
  return xs;
}

// Batch of 64 sets of 10-dimensional elements, sizes 2..10.
SetBatch random_batch(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> size(2, 10);
  std::vector<std::vector<std::vector<double>>> sets(64);
  for (auto& s : sets) {
    s.resize(static_cast<std::size_t>(size(rng)), std::vector<double>(10));
    for (auto& e : s)
      for (double& v : e) v = u(rng);
  }
  return SetBatch::from_vectors(sets);
}

void BM_LafForward(benchmark::State& state) {
  const auto xs = random_set(static_cast<std::size_t>(state.range(0)), 1);
  std::mt19937_64 rng(2);
  const auto p = project_params(init_params(rng));
  for (auto _ : state) benchmark::DoNotOptimize(laf_forward(xs, p));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_LafForward)->Arg(10)->Arg(50)->Arg(1000);

void BM_LafBackward(benchmark::State& state) {
  const auto xs = random_set(static_cast<std::size_t>(state.range(0)), 1);
  std::mt19937_64 rng(2);
  const auto p = project_params(init_params(rng));
  for (auto _ : state) benchmark::DoNotOptimize(laf_backward(xs, p, 1.0));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_LafBackward)->Arg(10)->Arg(50)->Arg(1000);

void BM_LafLayer(benchmark::State& state) {
  const auto batch = random_batch(3);
  std::mt19937_64 rng(4);
  LafLayer layer;
  layer.input_dim = 10;
  for (int k = 0; k < 9; ++k) layer.units.push_back(project_params(init_params(rng)));
  for (auto _ : state) benchmark::DoNotOptimize(laf_layer_forward(batch, layer));
}
BENCHMARK(BM_LafLayer);

void BM_FixedPool(benchmark::State& state) {
  const auto batch = random_batch(3);
  const auto kind = state.range(0) == 0 ? pool::FixedPoolKind::kDeepSets9 : pool::FixedPoolKind::kPna7;
  state.SetLabel(pool::to_string(kind));
  for (auto _ : state) benchmark::DoNotOptimize(pool::fixed_pool_forward(batch, kind));
}
BENCHMARK(BM_FixedPool)->Arg(0)->Arg(1);

// One minibatch step of the scalar model: forward, MAE, backward, Adam, projection.
void BM_ScalarTrainStep(benchmark::State& state) {
  const auto spec = harness::ModelSpec::parse(state.range(0) == 0 ? "laf" : "deepsets9");
  state.SetLabel(spec.name());
  auto model = harness::SetModel::scalar(spec, 5);
  const auto samples = data::gen_scalar_train(data::Target{data::TargetKind::kSum}, 64, 10, 6);
  const harness::ScalarSets sets(samples);
  std::vector<std::size_t> idx(samples.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  const auto batch = sets.batch(idx);
  nd::Tensor labels({samples.size()});
  for (std::size_t i = 0; i < samples.size(); ++i) labels[i] = samples[i].label;
  for (auto _ : state) {
    nd::Tape tape;
    const auto loss = nd::mae_loss(model.forward(tape, batch), labels);
    tape.backward(loss);
    nd::adam_step(model.params(), {});
    model.project();
  }
}
BENCHMARK(BM_ScalarTrainStep)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
