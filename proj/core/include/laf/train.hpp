#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "laf/datasets.hpp"
#include "laf/mnist.hpp"
#include "laf/model.hpp"
#include "laf/optim.hpp"
#include "laf/set_batch.hpp"

namespace laf::harness {

/// Labelled sets that can be cut into SetBatches by index.
class SetDataset {
 public:
  virtual ~SetDataset() = default;
  virtual std::size_t size() const = 0;
  virtual double label(std::size_t i) const = 0;
  virtual SetBatch batch(std::span<const std::size_t> indices) const = 0;
};

/// Digit sets; codes go to column 0 of the batch for the embedding lookup.
class ScalarSets : public SetDataset {
 public:
  explicit ScalarSets(std::span<const data::ScalarSetSample> samples) : samples_(samples) {}
  std::size_t size() const override { return samples_.size(); }
  double label(std::size_t i) const override { return samples_[i].label; }
  SetBatch batch(std::span<const std::size_t> indices) const override;

 private:
  std::span<const data::ScalarSetSample> samples_;
};

/// Sets of reals in [0,1], fed to the LAF layer without a trunk.
class RealSets : public SetDataset {
 public:
  explicit RealSets(std::span<const data::RealSetSample> samples) : samples_(samples) {}
  std::size_t size() const override { return samples_.size(); }
  double label(std::size_t i) const override { return samples_[i].label; }
  SetBatch batch(std::span<const std::size_t> indices) const override;

 private:
  std::span<const data::RealSetSample> samples_;
};

/// Image sets; pixels are materialized per batch from the split's images.
class MnistSets : public SetDataset {
 public:
  MnistSets(std::span<const data::MnistSetSample> samples, const data::MnistImages& images)
      : samples_(samples), images_(&images) {}
  std::size_t size() const override { return samples_.size(); }
  double label(std::size_t i) const override { return samples_[i].label; }
  SetBatch batch(std::span<const std::size_t> indices) const override;

 private:
  std::span<const data::MnistSetSample> samples_;
  const data::MnistImages* images_;
};

struct TrainConfig {
  std::size_t epochs = 30;
  std::size_t batch_size = 64;
  nd::AdamConfig adam;
  nd::PlateauConfig plateau;
  std::uint64_t seed = 1;  // minibatch order
  /// Called after every epoch with (epoch, train loss, val loss, lr).
  std::function<void(std::size_t, double, double, double)> on_epoch;
};

struct TrainResult {
  /// Entry 0 is a full pass at the initial weights; entry e > 0 is the mean
  /// minibatch loss of epoch e.
  std::vector<double> train_losses;
  /// Full-pass validation MAE, entry 0 at the initial weights.
  std::vector<double> val_losses;
  std::size_t best_epoch = 0;
  double best_val = 0.0;
  double final_val = 0.0;
  double final_lr = 0.0;
};

/// Minibatch Adam on the MAE loss with LAF projection after every step,
/// plateau decay on the validation loss and best-validation weights restored
/// at the end. Throws NonFiniteError with a dump of the batch on a NaN loss.
TrainResult train(SetModel& model, const SetDataset& train_data, const SetDataset& val_data, const TrainConfig& config);

/// Predictions for every set, computed in chunks.
std::vector<double> predict_all(const SetModel& model, const SetDataset& data, std::size_t chunk = 512);
double evaluate_mae(const SetModel& model, const SetDataset& data);
double mean_absolute_error(std::span<const double> pred, std::span<const double> target);

/// MAE of the best constant predictor (the label median).
double constant_predictor_mae(std::span<const double> labels);

using ScalarPredictor = std::function<std::vector<double>(std::span<const data::ScalarSetSample>)>;

ScalarPredictor as_predictor(const SetModel& model);

/// Seed of the test set for one sweep point.
std::uint64_t sweep_seed(std::uint64_t seed, int max_card);

/// Test MAE per maximum cardinality M on label-diversified scalar test sets.
/// With a cache directory the test sets are read from (or written to) it.
std::map<int, double> evaluate_sweep(const ScalarPredictor& predictor, const data::Target& target,
                                     std::span<const int> sweep, std::size_t per_m, std::uint64_t seed,
                                     const std::string& cache_dir = "");

/// Deterministic child seed for an independent stream.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

/// Runs fn(0..count-1) on up to `jobs` threads. Exceptions are rethrown
/// after all workers finish (the first by index wins).
void parallel_for(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& fn);

}  // namespace laf::harness
