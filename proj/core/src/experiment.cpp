#include "laf/experiment.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <nlohmann/json.hpp>
#include <optional>

#include "laf/errors.hpp"
#include "laf/io.hpp"
#include "laf/mnist.hpp"

namespace laf::harness {

using nlohmann::json;

std::string to_string(Task task) { return task == Task::kScalar ? "scalar" : "mnist"; }

Task parse_task(std::string_view name) {
  if (name == "scalar") return Task::kScalar;
  if (name == "mnist") return Task::kMnist;
  throw ConfigError("unknown task '" + std::string(name) + "'; valid: scalar, mnist");
}

ExperimentConfig ExperimentConfig::full_scale() {
  ExperimentConfig c;
  c.train_size = 100000;
  c.val_size = 20000;
  c.test_size = 100000;
  c.epochs = 100;
  return c;
}

ExperimentConfig ExperimentConfig::mnist_defaults() {
  ExperimentConfig c;
  c.task = Task::kMnist;
  c.epochs = 10;
  c.train_size = 5000;
  c.val_size = 1000;
  c.test_size = 1000;
  return c;
}

ModelSpec ExperimentConfig::model_spec() const {
  ModelSpec spec = ModelSpec::parse(model);
  if (spec.pool == PoolKind::kLaf) spec.laf_units = laf_units;
  return spec;
}

data::Target ExperimentConfig::parsed_target() const { return data::Target::parse(target); }

TrainConfig ExperimentConfig::train_config() const {
  TrainConfig t;
  t.epochs = epochs;
  t.batch_size = batch_size;
  t.adam = {lr, beta1, beta2, adam_eps};
  t.plateau = {plateau_factor, plateau_patience, plateau_min_improvement, lr_min};
  t.seed = derive_seed(seed, 1);
  return t;
}

void ExperimentConfig::validate() const {
  model_spec();
  parsed_target();
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (laf_units < 1) throw ConfigError("laf_units must be >= 1");
  if (train_size < 1 || val_size < 1 || test_size < 1) throw ConfigError("dataset sizes must be >= 1");
  if (train_max_card < 2) throw ConfigError("train_max_card must be >= 2");
  if (!(lr > 0.0)) throw ConfigError("lr must be positive");
  if (sweep.empty()) throw ConfigError("sweep must list at least one M");
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    if (sweep[i] < 2) throw ConfigError("sweep values must be >= 2");
    if (i > 0 && sweep[i] <= sweep[i - 1]) throw ConfigError("sweep must be strictly ascending");
  }
  if (task == Task::kMnist && mnist_images < 10) throw ConfigError("mnist_images must be >= 10");
}

namespace {

json config_json(const ExperimentConfig& c) {
  return json{{"model", c.model},
              {"laf_units", c.laf_units},
              {"task", to_string(c.task)},
              {"target", c.target},
              {"epochs", c.epochs},
              {"batch_size", c.batch_size},
              {"lr", c.lr},
              {"seed", c.seed},
              {"data_seed", c.data_seed},
              {"train_size", c.train_size},
              {"val_size", c.val_size},
              {"test_size", c.test_size},
              {"train_max_card", c.train_max_card},
              {"sweep", c.sweep},
              {"beta1", c.beta1},
              {"beta2", c.beta2},
              {"adam_eps", c.adam_eps},
              {"plateau_factor", c.plateau_factor},
              {"plateau_patience", c.plateau_patience},
              {"plateau_min_improvement", c.plateau_min_improvement},
              {"lr_min", c.lr_min},
              {"mnist_images", c.mnist_images}};
}

template <typename T>
void read_field(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config field '") + key + "': " + e.what());
  }
}

ExperimentConfig config_from(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  const json known = config_json(ExperimentConfig{});
  for (const auto& [key, _] : j.items()) {
    if (!known.contains(key)) throw ConfigError("unknown config key '" + key + "'");
  }
  ExperimentConfig c;
  read_field(j, "model", c.model);
  read_field(j, "laf_units", c.laf_units);
  std::string task = to_string(c.task);
  read_field(j, "task", task);
  c.task = parse_task(task);
  read_field(j, "target", c.target);
  read_field(j, "epochs", c.epochs);
  read_field(j, "batch_size", c.batch_size);
  read_field(j, "lr", c.lr);
  read_field(j, "seed", c.seed);
  read_field(j, "data_seed", c.data_seed);
  read_field(j, "train_size", c.train_size);
  read_field(j, "val_size", c.val_size);
  read_field(j, "test_size", c.test_size);
  read_field(j, "train_max_card", c.train_max_card);
  read_field(j, "sweep", c.sweep);
  read_field(j, "beta1", c.beta1);
  read_field(j, "beta2", c.beta2);
  read_field(j, "adam_eps", c.adam_eps);
  read_field(j, "plateau_factor", c.plateau_factor);
  read_field(j, "plateau_patience", c.plateau_patience);
  read_field(j, "plateau_min_improvement", c.plateau_min_improvement);
  read_field(j, "lr_min", c.lr_min);
  read_field(j, "mnist_images", c.mnist_images);
  return c;
}

json parse_json(std::string_view text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string(what) + ": " + e.what());
  }
}

// Dataset seeds, one stream per split.
std::uint64_t train_seed(const ExperimentConfig& c) { return derive_seed(c.data_seed, 10); }
std::uint64_t val_seed(const ExperimentConfig& c) { return derive_seed(c.data_seed, 11); }
std::uint64_t test_seed(const ExperimentConfig& c) { return derive_seed(c.data_seed, 12); }
std::uint64_t setify_seed(const ExperimentConfig& c, std::uint64_t stream) { return derive_seed(c.data_seed, 20 + stream); }

std::string sha1_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha1(), nullptr) != 1) throw Error("SHA-1 digest failed");
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", md[i]);
    hex += buf;
  }
  return hex;
}

}  // namespace

DataSeeds data_seeds(const ExperimentConfig& config) {
  return {train_seed(config), val_seed(config), test_seed(config)};
}

std::string config_to_json(const ExperimentConfig& config) { return config_json(config).dump(2) + "\n"; }

ExperimentConfig config_from_json(std::string_view text) { return config_from(parse_json(text, "config")); }

std::string dataset_hash(const ExperimentConfig& c) {
  std::string content = "task " + to_string(c.task) + "\ntarget " + c.target + "\n";
  content += "train " + std::to_string(train_seed(c)) + " " + std::to_string(c.train_size) + "\n";
  content += "val " + std::to_string(val_seed(c)) + " " + std::to_string(c.val_size) + "\n";
  for (int m : c.sweep) {
    content += "test " + std::to_string(m) + " " + std::to_string(sweep_seed(test_seed(c), m)) + " " +
               std::to_string(c.test_size) + "\n";
  }
  if (c.task == Task::kMnist) content += "mnist_images " + std::to_string(c.mnist_images) + "\n";
  return sha1_hex("blob " + std::to_string(content.size()) + std::string(1, '\0') + content);
}

RunRecord run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  const data::Target target = config.parsed_target();
  const ModelSpec spec = config.model_spec();

  const auto train_samples = data::gen_scalar_train(target, config.train_size, config.train_max_card, train_seed(config));
  const auto val_samples = data::gen_scalar_train(target, config.val_size, config.train_max_card, val_seed(config));

  TrainConfig tc = config.train_config();
  tc.on_epoch = options.on_epoch;

  RunRecord rec;
  rec.config = config;
  rec.dataset_hash = dataset_hash(config);
  TrainResult tr;
  std::optional<SetModel> model;

  if (config.task == Task::kScalar) {
    model = SetModel::scalar(spec, config.seed);
    tr = train(*model, ScalarSets(train_samples), ScalarSets(val_samples), tc);
    rec.test_mae = evaluate_sweep(as_predictor(*model), target, config.sweep, config.test_size, test_seed(config),
                                  options.cache_dir.string());
  } else {
    if (options.data_dir.empty()) throw IoError("mnist task needs a data directory (set LAF_DATA_DIR)");
    const auto train_images = data::mnist_load_dir(options.data_dir, true).head(config.mnist_images);
    const auto test_images = data::mnist_load_dir(options.data_dir, false);
    const auto train_sets = data::mnist_setify(train_samples, train_images, setify_seed(config, 0), data::Split::kTrain);
    const auto val_sets = data::mnist_setify(val_samples, train_images, setify_seed(config, 1), data::Split::kTrain);
    model = SetModel::mnist(spec, config.seed);
    tr = train(*model, MnistSets(train_sets, train_images), MnistSets(val_sets, train_images), tc);
    for (int m : config.sweep) {
      const auto scalar = data::gen_scalar_test(target, config.test_size, m, sweep_seed(test_seed(config), m)).samples;
      const auto sets = data::mnist_setify(scalar, test_images, setify_seed(config, 100 + m), data::Split::kTest);
      rec.test_mae[m] = evaluate_mae(*model, MnistSets(sets, test_images));
    }
  }

  rec.train_losses = tr.train_losses;
  rec.val_losses = tr.val_losses;
  rec.best_epoch = tr.best_epoch;
  rec.best_val = tr.best_val;
  rec.final_val = tr.final_val;
  for (const auto& u : model->laf_units()) rec.laf_params.push_back(u.to_array());
  rec.head_weights = model->head_weights();
  rec.head_bias = model->head_bias();
  rec.weights = model->params().snapshot();
  rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

SetModel restore_model(const RunRecord& record) {
  const ModelSpec spec = record.config.model_spec();
  SetModel model = record.config.task == Task::kScalar ? SetModel::scalar(spec, record.config.seed)
                                                       : SetModel::mnist(spec, record.config.seed);
  model.params().restore(record.weights);
  return model;
}

std::string record_to_json(const RunRecord& r) {
  json test = json::object();
  for (const auto& [m, mae] : r.test_mae) test[std::to_string(m)] = mae;
  json weights = json::object();
  for (const auto& [name, t] : r.weights) {
    weights[name] = {{"shape", t.shape()}, {"values", std::vector<double>(t.values().begin(), t.values().end())}};
  }
  json j{{"version", r.version},
         {"config", config_json(r.config)},
         {"losses", {{"train", r.train_losses}, {"val", r.val_losses}}},
         {"test_mae", test},
         {"laf_params", r.laf_params},
         {"head_weights", r.head_weights},
         {"head_bias", r.head_bias},
         {"weights", weights},
         {"best_epoch", r.best_epoch},
         {"best_val", r.best_val},
         {"final_val", r.final_val},
         {"wall_time", r.wall_time},
         {"dataset_hash", r.dataset_hash}};
  return j.dump(2) + "\n";
}

RunRecord record_from_json(std::string_view text) {
  const json j = parse_json(text, "run record");
  RunRecord r;
  try {
    r.version = j.at("version").get<int>();
    if (r.version != kRecordVersion) {
      throw VersionError("run record has schema version " + std::to_string(r.version) + ", this build reads version " +
                         std::to_string(kRecordVersion));
    }
    r.config = config_from(j.at("config"));
    r.train_losses = j.at("losses").at("train").get<std::vector<double>>();
    r.val_losses = j.at("losses").at("val").get<std::vector<double>>();
    for (const auto& [m, mae] : j.at("test_mae").items()) r.test_mae[std::stoi(m)] = mae.get<double>();
    r.laf_params = j.at("laf_params").get<std::vector<std::array<double, kLafParamCount>>>();
    r.head_weights = j.at("head_weights").get<std::vector<double>>();
    r.head_bias = j.at("head_bias").get<double>();
    for (const auto& [name, w] : j.at("weights").items()) {
      r.weights.emplace(name, nd::Tensor(w.at("shape").get<nd::Shape>(), w.at("values").get<std::vector<double>>()));
    }
    r.best_epoch = j.at("best_epoch").get<std::size_t>();
    r.best_val = j.at("best_val").get<double>();
    r.final_val = j.at("final_val").get<double>();
    r.wall_time = j.at("wall_time").get<double>();
    r.dataset_hash = j.at("dataset_hash").get<std::string>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("run record: ") + e.what());
  } catch (const DimensionError& e) {
    throw FormatError(std::string("run record: ") + e.what());
  } catch (const std::invalid_argument&) {
    throw FormatError("run record: non-numeric test_mae key");
  }
  return r;
}

std::string results_csv(const RunRecord& r) {
  std::string out = "target,model,M,mae,seed\n";
  for (const auto& [m, mae] : r.test_mae) {
    out += r.config.target + "," + r.config.model + "," + std::to_string(m) + "," + io::format_double(mae) + "," +
           std::to_string(r.config.seed) + "\n";
  }
  return out;
}

void persist(const RunRecord& record, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  io::write_atomic(dir / "run.json", record_to_json(record));
  io::write_atomic(dir / "results.csv", results_csv(record));
}

RunRecord load(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw IoError("run directory not found: " + dir.string());
  return record_from_json(io::read_file(dir / "run.json"));
}

double interquartile_range(std::span<const double> values) {
  if (values.empty()) throw DomainError("interquartile_range: empty input");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
  };
  return quantile(0.75) - quantile(0.25);
}

std::vector<StudyRow> restarts_study(const data::Target& target, std::span<const std::size_t> unit_counts,
                                     std::size_t n_restarts, const StudyConfig& config) {
  for (std::size_t u : unit_counts)
    if (u == 0) throw ConfigError("restarts_study: unit counts must be >= 1");
  const auto train_set = data::gen_real_sets(target, config.train_size, config.max_card, derive_seed(config.seed, 10));
  const auto val_set = data::gen_real_sets(target, config.val_size, config.max_card, derive_seed(config.seed, 11));
  const auto test_set = data::gen_real_sets(target, config.test_size, config.max_card, derive_seed(config.seed, 12));

  std::vector<StudyRow> rows(unit_counts.size() * n_restarts);
  parallel_for(rows.size(), config.jobs, [&](std::size_t i) {
    StudyRow& row = rows[i];
    row.units = unit_counts[i / n_restarts];
    row.restart = i % n_restarts;
    const std::uint64_t run_seed = derive_seed(config.seed, 1000 + 7919 * row.units + row.restart);
    SetModel model = SetModel::raw(row.units, run_seed);
    TrainConfig tc;
    tc.epochs = config.epochs;
    tc.batch_size = config.batch_size;
    tc.adam.lr = config.lr;
    tc.seed = derive_seed(run_seed, 1);
    train(model, RealSets(train_set), RealSets(val_set), tc);
    row.mae = evaluate_mae(model, RealSets(test_set));
    row.laf_params = model.laf_units();
    row.linear_weights = model.head_weights();
    row.linear_bias = model.head_bias();
  });
  return rows;
}

std::string study_csv(std::span<const StudyRow> rows) {
  std::string out = "units,restart,mae\n";
  for (const auto& r : rows) {
    out += std::to_string(r.units) + "," + std::to_string(r.restart) + "," + io::format_double(r.mae) + "\n";
  }
  return out;
}

}  // namespace laf::harness
