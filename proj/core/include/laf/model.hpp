#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "laf/baselines.hpp"
#include "laf/laf.hpp"
#include "laf/param_store.hpp"
#include "laf/set_batch.hpp"
#include "laf/tape.hpp"

namespace laf::harness {

enum class PoolKind { kLaf, kDeepSets9, kPna7 };

/// Which aggregation layer a model uses.
struct ModelSpec {
  PoolKind pool = PoolKind::kLaf;
  std::size_t laf_units = 9;

  /// "laf", "deepsets9" or "pna7".
  std::string name() const;
  static ModelSpec parse(std::string_view name);
  std::size_t pool_units() const;

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

/// Feed-forward set model: per-element trunk, aggregation layer, head.
///
///   scalar: Embedding(10,10) -> Sigmoid -> pool -> Dense(10*u, 1)
///   mnist:  Dense(784,300) -> Tanh -> Dense(300,100) -> Tanh -> Dense(100,30) -> Sigmoid
///           -> pool -> Dense(30*u, 1000) -> Tanh -> Dense(1000,100) -> Tanh -> Dense(100,1)
///   raw:    LAF(u) on reals in [0,1], followed by Dense(u, 1) when u > 1
///
/// Scalar batches carry digit codes in column 0 of SetBatch::elements.
class SetModel {
 public:
  static SetModel scalar(const ModelSpec& spec, std::uint64_t seed);
  static SetModel mnist(const ModelSpec& spec, std::uint64_t seed);
  static SetModel raw(std::size_t laf_units, std::uint64_t seed);

  /// Builds the graph on `tape` with parameters bound to the store (gradients
  /// flow back into it). Returns predictions of shape [num_sets].
  nd::Var forward(nd::Tape& tape, const SetBatch& batch);
  /// Inference without touching the store.
  std::vector<double> predict(const SetBatch& batch) const;

  /// Clamps LAF exponents at 0; no-op for fixed pools.
  void project();

  nd::ParamStore& params() { return params_; }
  const nd::ParamStore& params() const { return params_; }
  const ModelSpec& spec() const { return spec_; }
  std::size_t parameter_count() const { return params_.parameter_count(); }

  /// Learned LAF units (empty for fixed pools).
  std::vector<LafParams> laf_units() const;
  /// Weights and bias of the final dense layer, if any.
  std::vector<double> head_weights() const;
  double head_bias() const;

 private:
  enum class LayerKind { kEmbedding, kDense, kSigmoid, kTanh };
  struct Layer {
    LayerKind kind;
    std::string name;
  };

  SetModel() = default;
  void add_dense(std::vector<Layer>& where, std::size_t in, std::size_t out, std::mt19937_64& rng);
  void add_pool(std::size_t dim, std::mt19937_64& rng);
  // store == nullptr binds parameters as constants.
  nd::Var run(nd::Tape& tape, const SetBatch& batch, nd::ParamStore* store) const;

  ModelSpec spec_;
  std::vector<Layer> trunk_;
  std::vector<Layer> head_;
  std::size_t dense_count_ = 0;
  nd::ParamStore params_;
};

}  // namespace laf::harness
