#include "laf/train.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <filesystem>
#include <numeric>
#include <random>
#include <thread>

#include "laf/errors.hpp"
#include "laf/ops.hpp"

namespace laf::harness {

SetBatch ScalarSets::batch(std::span<const std::size_t> indices) const {
  std::size_t total = 0;
  for (std::size_t i : indices) total += samples_[i].elements.size();
  SetBatch b;
  b.elements = nd::Tensor({total, 1});
  std::size_t row = 0;
  for (std::size_t i : indices) {
    for (int x : samples_[i].elements) b.elements[row++] = x;
    b.offsets.push_back(row);
  }
  return b;
}

SetBatch RealSets::batch(std::span<const std::size_t> indices) const {
  std::size_t total = 0;
  for (std::size_t i : indices) total += samples_[i].elements.size();
  SetBatch b;
  b.elements = nd::Tensor({total, 1});
  std::size_t row = 0;
  for (std::size_t i : indices) {
    for (double x : samples_[i].elements) b.elements[row++] = x;
    b.offsets.push_back(row);
  }
  return b;
}

SetBatch MnistSets::batch(std::span<const std::size_t> indices) const {
  const std::size_t width = images_->image_size();
  std::size_t total = 0;
  for (std::size_t i : indices) total += samples_[i].image_indices.size();
  SetBatch b;
  b.elements = nd::Tensor({total, width});
  std::size_t row = 0;
  for (std::size_t i : indices) {
    for (std::size_t img : samples_[i].image_indices) {
      const auto px = images_->image(img);
      std::copy(px.begin(), px.end(), b.elements.data() + row * width);
      ++row;
    }
    b.offsets.push_back(row);
  }
  return b;
}

double mean_absolute_error(std::span<const double> pred, std::span<const double> target) {
  if (pred.size() != target.size()) throw DimensionError("mean_absolute_error: length mismatch");
  if (pred.empty()) throw DomainError("mean_absolute_error: empty input");
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) s += std::abs(pred[i] - target[i]);
  return s / static_cast<double>(pred.size());
}

double constant_predictor_mae(std::span<const double> labels) {
  if (labels.empty()) throw DomainError("constant_predictor_mae: empty input");
  std::vector<double> v(labels.begin(), labels.end());
  std::sort(v.begin(), v.end());
  const double median = v[v.size() / 2];
  double s = 0.0;
  for (double y : v) s += std::abs(y - median);
  return s / static_cast<double>(v.size());
}

std::vector<double> predict_all(const SetModel& model, const SetDataset& data, std::size_t chunk) {
  std::vector<double> out;
  out.reserve(data.size());
  std::vector<std::size_t> idx;
  for (std::size_t start = 0; start < data.size(); start += chunk) {
    idx.resize(std::min(chunk, data.size() - start));
    std::iota(idx.begin(), idx.end(), start);
    const auto p = model.predict(data.batch(idx));
    out.insert(out.end(), p.begin(), p.end());
  }
  return out;
}

double evaluate_mae(const SetModel& model, const SetDataset& data) {
  const auto pred = predict_all(model, data);
  std::vector<double> labels(data.size());
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = data.label(i);
  return mean_absolute_error(pred, labels);
}

namespace {

std::string dump_batch(const SetModel& model, std::span<const std::size_t> indices) {
  std::string s = "batch indices:";
  for (std::size_t i : indices) s += " " + std::to_string(i);
  const auto units = model.laf_units();
  for (std::size_t k = 0; k < units.size(); ++k) {
    s += "\nunit " + std::to_string(k) + ":";
    for (double v : units[k].to_array()) s += " " + std::to_string(v);
  }
  return s;
}

}  // namespace

TrainResult train(SetModel& model, const SetDataset& train_data, const SetDataset& val_data,
                  const TrainConfig& config) {
  if (train_data.size() == 0 || val_data.size() == 0) throw ConfigError("train: empty training or validation data");
  if (config.batch_size == 0) throw ConfigError("train: batch_size must be >= 1");

  TrainResult result;
  result.train_losses.push_back(evaluate_mae(model, train_data));
  result.val_losses.push_back(evaluate_mae(model, val_data));
  result.best_val = result.val_losses.back();
  result.final_val = result.best_val;
  auto best = model.params().snapshot();

  nd::PlateauState plateau;
  plateau.config = config.plateau;
  plateau.lr = config.adam.lr;
  // The initial pass is a baseline, not an epoch the scheduler reacts to.
  plateau.best = result.val_losses.back();
  plateau.consumed = 1;
  nd::AdamConfig adam = config.adam;

  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(train_data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> targets;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::span<const std::size_t> idx(order.data() + start, std::min(config.batch_size, order.size() - start));
      const SetBatch batch = train_data.batch(idx);
      targets.resize(idx.size());
      for (std::size_t i = 0; i < idx.size(); ++i) targets[i] = train_data.label(idx[i]);

      model.params().zero_grad();
      double loss = 0.0;
      try {
        nd::Tape tape;
        const nd::Var pred = model.forward(tape, batch);
        const nd::Var l = nd::mae_loss(pred, nd::Tensor::vector(targets));
        loss = l.value()[0];
        tape.backward(l);
      } catch (const NonFiniteError& e) {
        throw NonFiniteError(std::string(e.what()) + " at epoch " + std::to_string(epoch) + "\n" +
                             dump_batch(model, idx));
      }
      if (!std::isfinite(loss)) {
        throw NonFiniteError("train: non-finite loss at epoch " + std::to_string(epoch) + "\n" + dump_batch(model, idx));
      }
      adam.lr = plateau.lr;
      nd::adam_step(model.params(), adam);
      model.project();
      loss_sum += loss;
      ++batches;
    }
    const double val = evaluate_mae(model, val_data);
    result.train_losses.push_back(loss_sum / static_cast<double>(batches));
    result.val_losses.push_back(val);
    result.final_val = val;
    if (val < result.best_val) {
      result.best_val = val;
      result.best_epoch = epoch;
      best = model.params().snapshot();
    }
    nd::plateau_decay(result.val_losses, plateau);
    if (config.on_epoch) config.on_epoch(epoch, result.train_losses.back(), val, plateau.lr);
  }
  model.params().restore(best);
  result.final_lr = plateau.lr;
  return result;
}

ScalarPredictor as_predictor(const SetModel& model) {
  return [&model](std::span<const data::ScalarSetSample> samples) {
    return predict_all(model, ScalarSets(samples));
  };
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  // splitmix64 finalizer over the pair
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t sweep_seed(std::uint64_t seed, int max_card) {
  return derive_seed(seed, 1000 + static_cast<std::uint64_t>(max_card));
}

std::map<int, double> evaluate_sweep(const ScalarPredictor& predictor, const data::Target& target,
                                     std::span<const int> sweep, std::size_t per_m, std::uint64_t seed,
                                     const std::string& cache_dir) {
  std::map<int, double> out;
  for (int m : sweep) {
    const std::uint64_t s = sweep_seed(seed, m);
    std::vector<data::ScalarSetSample> samples;
    std::filesystem::path cache;
    if (!cache_dir.empty()) {
      cache = std::filesystem::path(cache_dir) / ("test_" + target.name() + "_M" + std::to_string(m) + "_n" +
                                                  std::to_string(per_m) + "_s" + std::to_string(s) + ".csv");
    }
    if (!cache.empty() && std::filesystem::exists(cache)) {
      samples = data::read_scalar_cache(cache);
    } else {
      samples = data::gen_scalar_test(target, per_m, m, s).samples;
      if (!cache.empty()) data::write_scalar_cache(cache, samples);
    }
    const auto pred = predictor(samples);
    std::vector<double> labels(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) labels[i] = samples[i].label;
    out[m] = mean_absolute_error(pred, labels);
  }
  return out;
}

void parallel_for(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& fn) {
  jobs = std::max<std::size_t>(1, std::min(jobs, count));
  std::vector<std::exception_ptr> errors(count);
  if (jobs == 1) {
    for (std::size_t i = 0; i < count; ++i) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::vector<std::thread> workers;
    for (std::size_t w = 0; w < jobs; ++w) {
      workers.emplace_back([&, w] {
        for (std::size_t i = w; i < count; i += jobs) {
          try {
            fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
    for (auto& t : workers) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace laf::harness
