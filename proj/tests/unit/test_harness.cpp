#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>

#include "laf/errors.hpp"
#include "laf/experiment.hpp"
#include "laf/io.hpp"
#include "laf/model.hpp"
#include "laf/ops.hpp"
#include "laf/optim.hpp"
#include "laf/train.hpp"
#include "laf/verify.hpp"
#include "oracles.hpp"

using namespace laf;
using namespace laf::harness;
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

ExperimentConfig tiny_config() {
  ExperimentConfig c;
  c.target = "mean";
  c.epochs = 2;
  c.train_size = 300;
  c.val_size = 100;
  c.test_size = 100;
  c.sweep = {5, 10};
  return c;
}

}  // namespace

TEST_CASE("scalar model parameter counts") {
  CHECK(SetModel::scalar(ModelSpec::parse("laf"), 1).parameter_count() == 299);
  CHECK(SetModel::scalar(ModelSpec::parse("deepsets9"), 1).parameter_count() == 191);
  CHECK(SetModel::scalar(ModelSpec::parse("pna7"), 1).parameter_count() == 100 + 70 + 1);
  CHECK(SetModel::scalar(ModelSpec::parse("laf"), 1).params().value("embedding").shape() == nd::Shape{10, 10});
  CHECK_THROWS_AS(ModelSpec::parse("lstm"), ConfigError);
}

TEST_CASE("scalar model init is seed-deterministic") {
  const auto a = SetModel::scalar(ModelSpec{}, 4), b = SetModel::scalar(ModelSpec{}, 4),
             c = SetModel::scalar(ModelSpec{}, 5);
  CHECK(a.params().snapshot() == b.params().snapshot());
  CHECK(a.params().snapshot() != c.params().snapshot());
}

TEST_CASE("mnist model post-pool widths") {
  auto laf_model = SetModel::mnist(ModelSpec::parse("laf"), 1);
  auto pna_model = SetModel::mnist(ModelSpec::parse("pna7"), 1);
  // Trunk dense0..2, then the first head layer.
  CHECK(laf_model.params().value("dense3.weight").shape() == nd::Shape{270, 1000});
  CHECK(pna_model.params().value("dense3.weight").shape() == nd::Shape{210, 1000});
  CHECK(laf_model.params().value("dense0.weight").shape() == nd::Shape{784, 300});

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::vector<std::vector<double>>> sets(2);
  sets[0].assign(3, std::vector<double>(784));
  sets[1].assign(5, std::vector<double>(784));
  for (auto& s : sets)
    for (auto& e : s)
      for (double& v : e) v = u(rng);
  const auto batch = SetBatch::from_vectors(sets);
  CHECK(laf_model.predict(batch).size() == 2);
  nd::Tape tape;
  CHECK(laf_model.forward(tape, batch).shape() == nd::Shape{2});
}

TEST_CASE("scalar model rejects non-digit codes") {
  auto model = SetModel::scalar(ModelSpec{}, 1);
  CHECK_THROWS_AS(model.predict(SetBatch::from_scalars({{1, 12}})), LookupError);
  CHECK_THROWS_AS(model.predict(SetBatch::from_scalars({{1.5}})), LookupError);
}

TEST_CASE("scalar model is permutation invariant") {
  auto model = SetModel::scalar(ModelSpec{}, 3);
  const auto a = model.predict(SetBatch::from_scalars({{1, 7, 3, 3, 9}}));
  const auto b = model.predict(SetBatch::from_scalars({{9, 3, 1, 3, 7}}));
  CHECK(a == b);
}

TEST_CASE("train: sanity descent on the mean target") {
  const data::Target mean{data::TargetKind::kMean};
  const auto train_set = data::gen_scalar_train(mean, 2000, 10, 1);
  const auto val_set = data::gen_scalar_train(mean, 400, 10, 2);
  auto model = SetModel::scalar(ModelSpec{}, 7);
  TrainConfig cfg;
  cfg.epochs = 20;
  const auto res = train(model, ScalarSets(train_set), ScalarSets(val_set), cfg);
  REQUIRE(res.train_losses.size() == 21);
  CHECK(res.train_losses.back() < res.train_losses.front());
  CHECK(res.best_val <= res.val_losses.front());
  CHECK(res.val_losses[res.best_epoch] == res.best_val);
  // Best-validation weights are the ones left in the model.
  CHECK(evaluate_mae(model, ScalarSets(val_set)) == doctest::Approx(res.best_val).epsilon(1e-12));
  for (const auto& u : model.laf_units())
    for (std::size_t k = 0; k < 8; ++k) CHECK(u.to_array()[k] >= 0.0);
}

TEST_CASE("train: zero epochs returns the initial record") {
  const data::Target sum{data::TargetKind::kSum};
  const auto d = data::gen_scalar_train(sum, 100, 10, 1);
  auto model = SetModel::scalar(ModelSpec{}, 2);
  const auto before = model.params().snapshot();
  TrainConfig cfg;
  cfg.epochs = 0;
  const auto res = train(model, ScalarSets(d), ScalarSets(d), cfg);
  CHECK(model.params().snapshot() == before);
  CHECK(res.train_losses.size() == 1);
  CHECK(res.best_epoch == 0);
  CHECK(res.val_losses[0] == doctest::Approx(evaluate_mae(model, ScalarSets(d))));
}

TEST_CASE("train: bit-identical curves under a fixed seed") {
  const data::Target sum{data::TargetKind::kSum};
  const auto d = data::gen_scalar_train(sum, 300, 10, 1);
  const auto v = data::gen_scalar_train(sum, 100, 10, 2);
  auto run = [&] {
    auto model = SetModel::scalar(ModelSpec{}, 2);
    TrainConfig cfg;
    cfg.epochs = 3;
    cfg.seed = 9;
    return train(model, ScalarSets(d), ScalarSets(v), cfg).train_losses;
  };
  CHECK(run() == run());
}

TEST_CASE("stress: 50 steps at lr 0.1 stay finite and projected") {
  const data::Target max{data::TargetKind::kMax};
  const auto d = data::gen_scalar_train(max, 64 * 50, 10, 3);
  auto model = SetModel::scalar(ModelSpec{}, 11);
  ScalarSets sets(d);
  nd::AdamConfig adam;
  adam.lr = 0.1;
  for (std::size_t step = 0; step < 50; ++step) {
    std::vector<std::size_t> idx(64);
    std::iota(idx.begin(), idx.end(), step * 64);
    const auto batch = sets.batch(idx);
    std::vector<double> y;
    for (auto i : idx) y.push_back(d[i].label);
    model.params().zero_grad();
    nd::Tape tape;
    tape.backward(nd::mae_loss(model.forward(tape, batch), nd::Tensor::vector(y)));
    nd::adam_step(model.params(), adam);
    model.project();
    for (const auto& [name, blk] : model.params().blocks()) REQUIRE_MESSAGE(blk.value.all_finite(), name);
    for (const auto& u : model.laf_units())
      for (std::size_t k = 0; k < 8; ++k) REQUIRE(u.to_array()[k] >= 0.0);
  }
}

TEST_CASE("end-to-end gradient suite") {
  const auto r = grad_suite_scalar_model(5, 10);
  CHECK(r.passed);
  CHECK(r.worst_rel_error < 1e-4);
}

TEST_CASE("evaluate_sweep: oracle and constant predictors") {
  const data::Target median{data::TargetKind::kMedian};
  const std::vector<int> sweep{5, 10, 20};
  const ScalarPredictor oracle_model = [&](std::span<const data::ScalarSetSample> s) {
    std::vector<double> out;
    for (const auto& x : s) out.push_back(oracle::target(median, x.elements));
    return out;
  };
  const auto perfect = evaluate_sweep(oracle_model, median, sweep, 500, 3);
  CHECK(perfect.size() == 3);
  for (int m : sweep) CHECK(perfect.at(m) == 0.0);

  const ScalarPredictor constant = [](std::span<const data::ScalarSetSample> s) {
    return std::vector<double>(s.size(), 4.5);
  };
  const auto res = evaluate_sweep(constant, median, sweep, 500, 3);
  for (int m : sweep) {
    const auto test = data::gen_scalar_test(median, 500, m, sweep_seed(3, m)).samples;
    double mad = 0.0;
    for (const auto& s : test) mad += std::abs(s.label - 4.5);
    CHECK(res.at(m) == doctest::Approx(mad / 500).epsilon(1e-12));
  }
}

TEST_CASE("evaluate_sweep leaves the model untouched and uses the cache") {
  TempDir dir("sweep");
  auto model = SetModel::scalar(ModelSpec{}, 3);
  const auto before = model.params().snapshot();
  const data::Target sum{data::TargetKind::kSum};
  const std::vector<int> sweep{5, 15};
  const auto a = evaluate_sweep(as_predictor(model), sum, sweep, 200, 1, dir.path.string());
  CHECK(model.params().snapshot() == before);
  CHECK(std::distance(fs::directory_iterator(dir.path), fs::directory_iterator()) == 2);
  CHECK(evaluate_sweep(as_predictor(model), sum, sweep, 200, 1, dir.path.string()) == a);
  CHECK(evaluate_sweep(as_predictor(model), sum, sweep, 200, 1) == a);
}

TEST_CASE("constant predictor MAE") {
  CHECK(constant_predictor_mae(std::vector<double>{1, 2, 3, 10}) == doctest::Approx(2.5));
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0, 3);
  std::vector<double> y(501);
  for (double& v : y) v = n(rng);
  CHECK(constant_predictor_mae(y) == doctest::Approx(oracle::constant_mae(y)).epsilon(1e-12));
}

TEST_CASE("interquartile range") {
  CHECK(interquartile_range(std::vector<double>{1, 2, 3, 4, 5}) == doctest::Approx(2.0));
  CHECK(interquartile_range(std::vector<double>{4, 1, 3, 2}) == doctest::Approx(1.5));
  CHECK(interquartile_range(std::vector<double>{7}) == 0.0);
}

TEST_CASE("config JSON") {
  auto c = tiny_config();
  c.seed = 77;
  c.sweep = {5, 25, 50};
  CHECK(config_from_json(config_to_json(c)) == c);
  CHECK(config_from_json("{\"target\": \"max\"}").target == "max");
  CHECK_THROWS_AS(config_from_json("{\"tagret\": \"max\"}"), ConfigError);
  CHECK_THROWS_AS(config_from_json("{\"epochs\": \"ten\"}"), ConfigError);
  CHECK_THROWS_AS(config_from_json("{not json"), FormatError);

  auto bad = c;
  bad.sweep = {10, 5};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = c;
  bad.batch_size = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = c;
  bad.target = "mode";
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("dataset hash") {
  auto a = tiny_config(), b = tiny_config();
  CHECK(dataset_hash(a).size() == 40);
  CHECK(dataset_hash(a) == dataset_hash(b));
  b.seed = 99;  // weights only
  CHECK(dataset_hash(a) == dataset_hash(b));
  b.data_seed = 2;
  CHECK(dataset_hash(a) != dataset_hash(b));
}

TEST_CASE("run, persist and load") {
  TempDir dir("run");
  const auto rec = run_experiment(tiny_config());
  CHECK(rec.test_mae.size() == 2);
  CHECK(rec.laf_params.size() == 9);
  CHECK(rec.train_losses.size() == 3);
  persist(rec, dir.path);
  CHECK(load(dir.path) == rec);

  const auto csv = io::read_file(dir.path / "results.csv");
  CHECK(csv.rfind("target,model,M,mae,seed\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);

  // The restored model reproduces the stored sweep exactly.
  const auto again = evaluate_sweep(as_predictor(restore_model(rec)), rec.config.parsed_target(), rec.config.sweep,
                                    rec.config.test_size, data_seeds(rec.config).test);
  CHECK(again == rec.test_mae);

  // A second run with the same config is bit-identical apart from wall time.
  auto rec2 = run_experiment(tiny_config());
  rec2.wall_time = rec.wall_time;
  CHECK(rec2 == rec);
}

TEST_CASE("record version and corrupt files") {
  TempDir dir("ver");
  RunRecord rec;
  rec.config = tiny_config();
  rec.test_mae = {{5, 0.25}, {10, 0.5}};
  rec.dataset_hash = dataset_hash(rec.config);
  persist(rec, dir.path);
  CHECK(load(dir.path) == rec);

  auto text = io::read_file(dir.path / "run.json");
  const auto pos = text.find("\"version\": 1");
  REQUIRE(pos != std::string::npos);
  text.replace(pos, 12, "\"version\": 2");
  io::write_atomic(dir.path / "run.json", text);
  CHECK_THROWS_AS(load(dir.path), VersionError);

  io::write_atomic(dir.path / "run.json", "{\"config\": ");
  CHECK_THROWS_AS(load(dir.path), FormatError);
  CHECK_THROWS_AS(load(dir.path / "missing"), IoError);
}

TEST_CASE("restarts study shape") {
  StudyConfig cfg;
  cfg.train_size = 200;
  cfg.val_size = 50;
  cfg.test_size = 100;
  cfg.epochs = 1;
  const std::vector<std::size_t> units{1, 3};
  const auto rows = restarts_study(data::Target{data::TargetKind::kMean}, units, 20, cfg);
  REQUIRE(rows.size() == 40);
  CHECK(rows.front().units == 1);
  CHECK(rows.front().linear_weights.empty());
  CHECK(rows.back().units == 3);
  CHECK(rows.back().restart == 19);
  CHECK(rows.back().laf_params.size() == 3);
  CHECK(rows.back().linear_weights.size() == 3);
  CHECK_FALSE(format_unit(rows.back().laf_params[0]).empty());
  const auto csv = study_csv(rows);
  CHECK(csv.rfind("units,restart,mae\n", 0) == 0);

  cfg.jobs = 3;
  const auto threaded = restarts_study(data::Target{data::TargetKind::kMean}, units, 20, cfg);
  CHECK(study_csv(threaded) == csv);
}

TEST_CASE("parallel_for rethrows the lowest-index failure") {
  std::vector<int> hits(10, 0);
  parallel_for(10, 4, [&](std::size_t i) { hits[i] = 1; });
  CHECK(std::accumulate(hits.begin(), hits.end(), 0) == 10);
  try {
    parallel_for(10, 3, [](std::size_t i) {
      if (i == 7 || i == 2) throw ConfigError("job " + std::to_string(i));
    });
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()) == "job 2");
  }
}

TEST_CASE("seed derivation") {
  CHECK(derive_seed(1, 2) == derive_seed(1, 2));
  CHECK(derive_seed(1, 2) != derive_seed(1, 3));
  CHECK(derive_seed(1, 2) != derive_seed(2, 2));
  CHECK(sweep_seed(1, 10) != sweep_seed(1, 15));
}
