#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "laf/datasets.hpp"
#include "laf/laf.hpp"
#include "laf/model.hpp"
#include "laf/train.hpp"

namespace laf::harness {

enum class Task { kScalar, kMnist };

std::string to_string(Task task);
Task parse_task(std::string_view name);

struct ExperimentConfig {
  std::string model = "laf";
  std::size_t laf_units = 9;
  Task task = Task::kScalar;
  std::string target = "sum";
  std::size_t epochs = 30;
  std::size_t batch_size = 64;
  double lr = 1e-3;
  std::uint64_t seed = 1;       // weights and minibatch order
  std::uint64_t data_seed = 1;  // every generated dataset
  std::size_t train_size = 10000;
  std::size_t val_size = 2000;
  std::size_t test_size = 10000;  // per sweep point
  int train_max_card = 10;
  std::vector<int> sweep{5, 10, 15, 20, 25, 30, 35, 40, 45, 50};
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  double plateau_factor = 0.5;
  std::size_t plateau_patience = 5;
  double plateau_min_improvement = 1e-4;
  double lr_min = 1e-5;
  std::size_t mnist_images = 10000;  // training-split subset for the image task

  /// Sizes and epochs of the original protocol (100k/20k/100k, 100 epochs).
  static ExperimentConfig full_scale();
  /// Image-task defaults: 10 epochs on a 10000-image subset.
  static ExperimentConfig mnist_defaults();

  ModelSpec model_spec() const;
  data::Target parsed_target() const;
  TrainConfig train_config() const;
  /// Throws ConfigError on an invalid combination.
  void validate() const;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Serialized as a JSON object; from_json rejects unknown keys and fills
/// missing ones with defaults.
std::string config_to_json(const ExperimentConfig& config);
ExperimentConfig config_from_json(std::string_view text);

inline constexpr int kRecordVersion = 1;

struct RunRecord {
  ExperimentConfig config;
  std::vector<double> train_losses;
  std::vector<double> val_losses;
  std::map<int, double> test_mae;
  std::vector<std::array<double, kLafParamCount>> laf_params;
  std::vector<double> head_weights;
  double head_bias = 0.0;
  std::map<std::string, nd::Tensor> weights;  // every parameter block, best-validation epoch
  std::size_t best_epoch = 0;
  double best_val = 0.0;
  double final_val = 0.0;
  double wall_time = 0.0;
  std::string dataset_hash;
  int version = kRecordVersion;

  friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

/// Seeds of the generated datasets of a run: every test set of the sweep is
/// drawn with sweep_seed(test, M).
struct DataSeeds {
  std::uint64_t train = 0;
  std::uint64_t val = 0;
  std::uint64_t test = 0;
};
DataSeeds data_seeds(const ExperimentConfig& config);

/// Git blob hash (SHA-1 over "blob <len>\0<content>") of the text listing
/// every dataset seed of the run.
std::string dataset_hash(const ExperimentConfig& config);

struct RunOptions {
  std::filesystem::path data_dir;   // MNIST IDX files
  std::filesystem::path cache_dir;  // optional test-set cache
  std::function<void(std::size_t, double, double, double)> on_epoch;
};

RunRecord run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

/// Rebuilds the trained model of a record.
SetModel restore_model(const RunRecord& record);

/// Writes run.json and results.csv (header "target,model,M,mae,seed") into dir.
void persist(const RunRecord& record, const std::filesystem::path& dir);
RunRecord load(const std::filesystem::path& dir);

std::string record_to_json(const RunRecord& record);
RunRecord record_from_json(std::string_view text);
std::string results_csv(const RunRecord& record);

struct StudyConfig {
  std::size_t train_size = 5000;
  std::size_t val_size = 1000;
  std::size_t test_size = 5000;
  int max_card = 10;
  std::size_t epochs = 30;
  std::size_t batch_size = 64;
  double lr = 1e-3;
  std::uint64_t seed = 1;
  std::size_t jobs = 1;
};

struct StudyRow {
  std::size_t units = 0;
  std::size_t restart = 0;
  double mae = 0.0;
  std::vector<LafParams> laf_params;
  std::vector<double> linear_weights;  // empty for a single unit
  double linear_bias = 0.0;
};

/// Raw LAF(u) on real sets, topped by a linear layer when u > 1, trained
/// n_restarts times per unit count from different initializations. Rows are
/// ordered by (unit count, restart).
std::vector<StudyRow> restarts_study(const data::Target& target, std::span<const std::size_t> unit_counts,
                                     std::size_t n_restarts, const StudyConfig& config);

/// One "units,restart,mae" line per row.
std::string study_csv(std::span<const StudyRow> rows);

/// Inter-quartile range (linear interpolation between order statistics).
double interquartile_range(std::span<const double> values);

}  // namespace laf::harness
