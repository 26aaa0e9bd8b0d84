#include "laf/model.hpp"

#include <cmath>
#include <random>

#include "laf/errors.hpp"
#include "laf/ops.hpp"

namespace laf::harness {

std::string ModelSpec::name() const {
  switch (pool) {
    case PoolKind::kLaf: return "laf";
    case PoolKind::kDeepSets9: return "deepsets9";
    case PoolKind::kPna7: return "pna7";
  }
  return "unknown";
}

ModelSpec ModelSpec::parse(std::string_view name) {
  if (name == "laf") return {PoolKind::kLaf, 9};
  if (name == "deepsets9") return {PoolKind::kDeepSets9, 9};
  if (name == "pna7") return {PoolKind::kPna7, 7};
  throw ConfigError("unknown model '" + std::string(name) + "'; valid: laf, deepsets9, pna7");
}

std::size_t ModelSpec::pool_units() const {
  switch (pool) {
    case PoolKind::kLaf: return laf_units;
    case PoolKind::kDeepSets9: return 9;
    case PoolKind::kPna7: return 7;
  }
  return 0;
}

void SetModel::add_dense(std::vector<Layer>& where, std::size_t in, std::size_t out, std::mt19937_64& rng) {
  const std::string name = "dense" + std::to_string(dense_count_++);
  params_.add(name + ".weight", nd::dense_init(in, out, rng));
  // Bias shares the fan-in bound of the weights.
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  std::uniform_real_distribution<double> u(-bound, bound);
  nd::Tensor bias({out});
  for (double& v : bias.values()) v = u(rng);
  params_.add(name + ".bias", std::move(bias));
  where.push_back({LayerKind::kDense, name});
}

void SetModel::add_pool(std::size_t /*dim*/, std::mt19937_64& rng) {
  if (spec_.pool != PoolKind::kLaf) return;
  if (spec_.laf_units == 0) throw ConfigError("a LAF layer needs at least one unit");
  nd::Tensor units({spec_.laf_units, kLafParamCount});
  for (std::size_t r = 0; r < spec_.laf_units; ++r) {
    const auto v = init_params(rng).to_array();
    std::copy(v.begin(), v.end(), units.row(r).begin());
  }
  params_.add("laf", std::move(units));
}

SetModel SetModel::scalar(const ModelSpec& spec, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  SetModel m;
  m.spec_ = spec;
  m.params_.add("embedding", nd::embedding_init(10, 10, rng));
  m.trunk_.push_back({LayerKind::kEmbedding, "embedding"});
  m.trunk_.push_back({LayerKind::kSigmoid, ""});
  m.add_pool(10, rng);
  m.add_dense(m.head_, 10 * spec.pool_units(), 1, rng);
  return m;
}

SetModel SetModel::mnist(const ModelSpec& spec, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  SetModel m;
  m.spec_ = spec;
  m.add_dense(m.trunk_, 784, 300, rng);
  m.trunk_.push_back({LayerKind::kTanh, ""});
  m.add_dense(m.trunk_, 300, 100, rng);
  m.trunk_.push_back({LayerKind::kTanh, ""});
  m.add_dense(m.trunk_, 100, 30, rng);
  m.trunk_.push_back({LayerKind::kSigmoid, ""});
  m.add_pool(30, rng);
  m.add_dense(m.head_, 30 * spec.pool_units(), 1000, rng);
  m.head_.push_back({LayerKind::kTanh, ""});
  m.add_dense(m.head_, 1000, 100, rng);
  m.head_.push_back({LayerKind::kTanh, ""});
  m.add_dense(m.head_, 100, 1, rng);
  return m;
}

SetModel SetModel::raw(std::size_t laf_units, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  SetModel m;
  m.spec_ = {PoolKind::kLaf, laf_units};
  m.add_pool(1, rng);
  if (laf_units > 1) m.add_dense(m.head_, laf_units, 1, rng);
  return m;
}

nd::Var SetModel::run(nd::Tape& tape, const SetBatch& batch, nd::ParamStore* store) const {
  batch.require_nonempty_sets();
  auto param = [&](const std::string& name) {
    return store != nullptr ? tape.parameter(*store, name) : tape.constant(params_.value(name));
  };
  auto apply = [&](const Layer& layer, nd::Var x) -> nd::Var {
    switch (layer.kind) {
      case LayerKind::kEmbedding: return x;  // handled before the trunk loop
      case LayerKind::kDense: return nd::dense(x, param(layer.name + ".weight"), param(layer.name + ".bias"));
      case LayerKind::kSigmoid: return nd::sigmoid(x);
      case LayerKind::kTanh: return nd::tanh(x);
    }
    return x;
  };

  nd::Var x;
  if (!trunk_.empty() && trunk_.front().kind == LayerKind::kEmbedding) {
    std::vector<std::size_t> idx(batch.elements.shape()[0]);
    const std::size_t d = batch.dim();
    for (std::size_t i = 0; i < idx.size(); ++i) {
      const double code = batch.elements[i * d];
      if (!(code >= 0.0) || code != std::floor(code)) {
        throw LookupError("embedding: element code " + std::to_string(code) + " is not a nonnegative integer");
      }
      idx[i] = static_cast<std::size_t>(code);
    }
    x = nd::embedding(param(trunk_.front().name), idx);
  } else {
    x = tape.constant(batch.elements);
  }
  for (const Layer& layer : trunk_) x = apply(layer, x);

  if (spec_.pool == PoolKind::kLaf) {
    x = laf_pool(x, batch.offsets, param("laf"));
  } else {
    x = pool::fixed_pool(x, batch.offsets,
                         spec_.pool == PoolKind::kDeepSets9 ? pool::FixedPoolKind::kDeepSets9 : pool::FixedPoolKind::kPna7);
  }
  for (const Layer& layer : head_) x = apply(layer, x);
  if (x.value().rank() == 2 && x.value().shape()[1] != 1) {
    throw DimensionError("model output must have one column, got " + nd::shape_string(x.shape()));
  }
  return nd::flatten(x);
}

nd::Var SetModel::forward(nd::Tape& tape, const SetBatch& batch) { return run(tape, batch, &params_); }

std::vector<double> SetModel::predict(const SetBatch& batch) const {
  nd::Tape tape;
  const nd::Var out = run(tape, batch, nullptr);
  return {out.value().values().begin(), out.value().values().end()};
}

void SetModel::project() {
  if (params_.contains("laf")) project_params(params_.value("laf"));
}

std::vector<LafParams> SetModel::laf_units() const {
  if (!params_.contains("laf")) return {};
  return LafLayer::from_tensor(params_.value("laf"), 1).units;
}

std::vector<double> SetModel::head_weights() const {
  if (head_.empty()) return {};
  const auto& w = params_.value(head_.back().name + ".weight");
  return {w.values().begin(), w.values().end()};
}

double SetModel::head_bias() const {
  if (head_.empty()) return 0.0;
  return params_.value(head_.back().name + ".bias")[0];
}

}  // namespace laf::harness
