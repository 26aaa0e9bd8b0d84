// lafctl: data generation, training, evaluation and checks for LAF models.

#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "laf/datasets.hpp"
#include "laf/errors.hpp"
#include "laf/experiment.hpp"
#include "laf/io.hpp"
#include "laf/preset_check.hpp"
#include "laf/presets.hpp"
#include "laf/train.hpp"
#include "laf/verify.hpp"

namespace fs = std::filesystem;
using namespace laf;

namespace {

enum Exit { kOk = 0, kCheckFailed = 1, kUsage = 2, kIo = 3 };

struct Common {
  std::uint64_t seed = 1;
  std::string out;
};

void add_common(CLI::App* cmd, Common& c, bool out_required = false) {
  cmd->add_option("--seed", c.seed, "Random seed")->capture_default_str();
  auto* o = cmd->add_option("--out", c.out, "Output path");
  if (out_required) o->required();
}

// Writes to --out when given, stdout otherwise.
void emit(const std::string& out, const std::string& text) {
  if (out.empty()) {
    std::cout << text;
  } else {
    if (fs::path(out).has_parent_path()) fs::create_directories(fs::path(out).parent_path());
    io::write_atomic(out, text);
  }
}

fs::path data_dir() {
  const char* env = std::getenv("LAF_DATA_DIR");
  return env != nullptr ? fs::path(env) : fs::path();
}

void print_progress(std::size_t epoch, double train, double val, double lr) {
  std::fprintf(stderr, "epoch %3zu  train %.5f  val %.5f  lr %.2e\n", epoch, train, val, lr);
}

std::string inspect_text(const harness::RunRecord& rec) {
  std::ostringstream os;
  os << "model " << rec.config.model << " on " << rec.config.target << " (" << harness::to_string(rec.config.task)
     << "), best epoch " << rec.best_epoch << ", best val MAE " << rec.best_val << "\n";
  for (std::size_t k = 0; k < rec.laf_params.size(); ++k) {
    os << "unit" << k + 1 << ": " << format_unit(LafParams::from_array(rec.laf_params[k])) << "\n";
  }
  if (!rec.head_weights.empty()) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", rec.head_bias);
    os << "linear: " << buf;
    const std::size_t n = rec.head_weights.size();
    const std::size_t units = rec.laf_params.empty() ? n : rec.laf_params.size();
    for (std::size_t i = 0; i < n; ++i) {
      std::snprintf(buf, sizeof buf, "%.2f", rec.head_weights[i]);
      os << " + (" << buf << "*";
      if (units == n) {
        os << "unit" << i + 1;
      } else {
        os << "h" << i + 1;
      }
      os << ")";
    }
    os << "\n";
  }
  for (const auto& [m, mae] : rec.test_mae) os << "test M=" << m << " MAE " << mae << "\n";
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LAF aggregation experiments"};
  app.require_subcommand(1);

  // gen
  Common gen_c;
  std::string gen_task = "scalar", gen_target = "sum", gen_split = "train";
  int gen_m = 10;
  std::size_t gen_n = 100;
  auto* gen = app.add_subcommand("gen", "Generate a scalar-set dataset cache file");
  add_common(gen, gen_c);
  gen->add_option("--task", gen_task, "scalar")->capture_default_str();
  gen->add_option("--target", gen_target, "Target aggregator")->capture_default_str();
  gen->add_option("--M", gen_m, "Maximum cardinality")->capture_default_str();
  gen->add_option("-n", gen_n, "Number of sets")->capture_default_str();
  gen->add_option("--split", gen_split, "train (uniform) or test (label-diversified)")
      ->check(CLI::IsMember({"train", "test"}))
      ->capture_default_str();

  // train / sweep share experiment flags
  Common train_c;
  std::string train_config_path;
  bool full_scale = false;
  harness::ExperimentConfig cfg;
  std::string cfg_task = "scalar";
  std::string ms_text;
  bool quiet = false;
  auto add_experiment_flags = [&](CLI::App* cmd) {
    add_common(cmd, train_c, true);
    cmd->add_option("--config", train_config_path, "JSON experiment config (flags override it)");
    cmd->add_flag("--full-scale", full_scale, "100k/20k/100k sets and 100 epochs");
    cmd->add_option("--target", cfg.target, "Target aggregator");
    cmd->add_option("--model", cfg.model, "laf, deepsets9 or pna7");
    cmd->add_option("--units", cfg.laf_units, "LAF units");
    cmd->add_option("--task", cfg_task, "scalar or mnist");
    cmd->add_option("--epochs", cfg.epochs, "Epochs");
    cmd->add_option("--batch-size", cfg.batch_size, "Sets per minibatch");
    cmd->add_option("--lr", cfg.lr, "Initial learning rate");
    cmd->add_option("--data-seed", cfg.data_seed, "Seed of the generated datasets");
    cmd->add_option("--train-size", cfg.train_size, "Training sets");
    cmd->add_option("--val-size", cfg.val_size, "Validation sets");
    cmd->add_option("--test-size", cfg.test_size, "Test sets per M");
    cmd->add_option("--Ms", ms_text, "Comma-separated test cardinalities");
    cmd->add_option("--mnist-images", cfg.mnist_images, "Training images used by the mnist task");
    cmd->add_flag("--quiet", quiet, "No per-epoch progress");
  };
  auto* train = app.add_subcommand("train", "Train a model and write run.json + results.csv");
  add_experiment_flags(train);
  auto* sweep = app.add_subcommand("sweep", "Train one (target, model) cell and evaluate the M sweep");
  add_experiment_flags(sweep);

  // eval
  Common eval_c;
  std::string eval_run, eval_ms;
  std::size_t eval_n = 10000;
  auto* eval = app.add_subcommand("eval", "Evaluate a stored run on fresh test sweeps");
  add_common(eval, eval_c);
  eval->add_option("--run", eval_run, "Run directory")->required();
  eval->add_option("--Ms", eval_ms, "Comma-separated test cardinalities");
  eval->add_option("-n", eval_n, "Test sets per M")->capture_default_str();

  // study
  Common study_c;
  std::string study_target = "count", study_units = "1,3,6,9,12,15,18,21";
  std::size_t study_restarts = 20;
  harness::StudyConfig study_cfg;
  auto* study = app.add_subcommand("study", "Multi-unit restart study on real-valued sets");
  add_common(study, study_c, true);
  study->add_option("--target", study_target)->capture_default_str();
  study->add_option("--units", study_units, "Comma-separated unit counts")->capture_default_str();
  study->add_option("--restarts", study_restarts)->capture_default_str();
  study->add_option("--epochs", study_cfg.epochs)->capture_default_str();
  study->add_option("--train-size", study_cfg.train_size)->capture_default_str();
  study->add_option("--test-size", study_cfg.test_size)->capture_default_str();
  study->add_option("--jobs", study_cfg.jobs, "Parallel runs")->capture_default_str();

  // preset-check
  Common preset_c;
  std::string sabotage;
  auto* preset = app.add_subcommand("preset-check", "Preset parameterisations against reference aggregators");
  add_common(preset, preset_c);
  preset->add_option("--sabotage", sabotage, "Negative control: perturb the named preset (mean)")
      ->check(CLI::IsMember({"mean"}));

  // grad-check
  Common grad_c;
  std::size_t grad_instances = 100;
  auto* grad = app.add_subcommand("grad-check", "Finite-difference gradient suites");
  add_common(grad, grad_c);
  grad->add_option("--instances", grad_instances, "Random instances per suite")->capture_default_str();

  // inspect
  Common inspect_c;
  std::string inspect_run;
  auto* inspect = app.add_subcommand("inspect", "Print learned LAF units and head weights of a run");
  add_common(inspect, inspect_c);
  inspect->add_option("--run", inspect_run, "Run directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  auto parse_ints = [](const std::string& text) {
    std::vector<int> v;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        std::size_t pos = 0;
        v.push_back(std::stoi(item, &pos));
        if (pos != item.size()) throw std::invalid_argument(item);
      } catch (const std::exception&) {
        throw ConfigError("not an integer list: '" + text + "'");
      }
    }
    return v;
  };

  try {
    if (*gen) {
      if (gen_task != "scalar") throw ConfigError("gen: unknown task '" + gen_task + "'; valid: scalar");
      const auto target = data::Target::parse(gen_target);
      const auto samples = gen_split == "train" ? data::gen_scalar_train(target, gen_n, gen_m, gen_c.seed)
                                                : data::gen_scalar_test(target, gen_n, gen_m, gen_c.seed).samples;
      emit(gen_c.out, data::format_scalar_cache(samples));
      return kOk;
    }

    if (*train || *sweep) {
      harness::ExperimentConfig base = full_scale ? harness::ExperimentConfig::full_scale()
                                                   : harness::ExperimentConfig{};
      if (cfg_task == "mnist" && !full_scale) base = harness::ExperimentConfig::mnist_defaults();
      if (!train_config_path.empty()) base = harness::config_from_json(io::read_file(train_config_path));
      // Explicit flags override the base configuration.
      CLI::App* cmd = *train ? train : sweep;
      auto given = [&](const char* flag) { return cmd->count(flag) > 0; };
      if (given("--target")) base.target = cfg.target;
      if (given("--model")) base.model = cfg.model;
      if (given("--units")) base.laf_units = cfg.laf_units;
      if (given("--task")) base.task = harness::parse_task(cfg_task);
      if (given("--epochs")) base.epochs = cfg.epochs;
      if (given("--batch-size")) base.batch_size = cfg.batch_size;
      if (given("--lr")) base.lr = cfg.lr;
      if (given("--data-seed")) base.data_seed = cfg.data_seed;
      if (given("--train-size")) base.train_size = cfg.train_size;
      if (given("--val-size")) base.val_size = cfg.val_size;
      if (given("--test-size")) base.test_size = cfg.test_size;
      if (given("--mnist-images")) base.mnist_images = cfg.mnist_images;
      if (given("--Ms")) base.sweep = parse_ints(ms_text);
      if (given("--seed")) base.seed = train_c.seed;
      harness::RunOptions opts;
      opts.data_dir = data_dir();
      if (!quiet) opts.on_epoch = print_progress;
      const auto rec = harness::run_experiment(base, opts);
      harness::persist(rec, train_c.out);
      std::cout << harness::results_csv(rec);
      return kOk;
    }

    if (*eval) {
      const auto rec = harness::load(eval_run);
      if (rec.config.task != harness::Task::kScalar) throw ConfigError("eval supports scalar runs only");
      const auto model = harness::restore_model(rec);
      const std::vector<int> ms = eval_ms.empty() ? rec.config.sweep : parse_ints(eval_ms);
      const auto mae = harness::evaluate_sweep(harness::as_predictor(model), rec.config.parsed_target(), ms, eval_n,
                                               eval_c.seed);
      std::string csv = "target,model,M,mae,seed\n";
      for (const auto& [m, v] : mae) {
        csv += rec.config.target + "," + rec.config.model + "," + std::to_string(m) + "," + io::format_double(v) + "," +
               std::to_string(eval_c.seed) + "\n";
      }
      emit(eval_c.out, csv);
      return kOk;
    }

    if (*study) {
      study_cfg.seed = study_c.seed;
      std::vector<std::size_t> units;
      for (int u : parse_ints(study_units)) {
        if (u < 1) throw ConfigError("unit counts must be >= 1");
        units.push_back(static_cast<std::size_t>(u));
      }
      const auto rows = harness::restarts_study(data::Target::parse(study_target), units, study_restarts, study_cfg);
      const fs::path out(study_c.out);
      fs::create_directories(out);
      io::write_atomic(out / "study.csv", harness::study_csv(rows));
      std::string formulas;
      for (const auto& r : rows) {
        formulas += "units=" + std::to_string(r.units) + " restart=" + std::to_string(r.restart) +
                    " mae=" + io::format_double(r.mae) + "\n";
        for (std::size_t k = 0; k < r.laf_params.size(); ++k) {
          formulas += "  unit" + std::to_string(k + 1) + ": " + format_unit(r.laf_params[k]) + "\n";
        }
        if (!r.linear_weights.empty()) {
          char buf[64];
          std::snprintf(buf, sizeof buf, "%.2f", r.linear_bias);
          formulas += std::string("  linear: ") + buf;
          for (std::size_t k = 0; k < r.linear_weights.size(); ++k) {
            std::snprintf(buf, sizeof buf, "%.2f", r.linear_weights[k]);
            formulas += std::string(" + (") + buf + "*unit" + std::to_string(k + 1) + ")";
          }
          formulas += "\n";
        }
      }
      io::write_atomic(out / "units.txt", formulas);
      for (std::size_t u : units) {
        std::vector<double> maes;
        for (const auto& r : rows)
          if (r.units == u) maes.push_back(r.mae);
        std::sort(maes.begin(), maes.end());
        std::printf("units %zu: median MAE %.4f, IQR %.4f\n", u, maes[maes.size() / 2],
                    harness::interquartile_range(maes));
      }
      return kOk;
    }

    if (*preset) {
      PresetCheckOptions opts;
      opts.seed = preset_c.seed;
      if (sabotage == "mean") {
        opts.params = [](const Preset& p) {
          LafParams q = preset_params(p);
          if (p.kind == PresetKind::kMean) q.alpha *= 1.01;
          return q;
        };
      }
      const auto rows = run_preset_checks(opts);
      std::string report;
      bool ok = true;
      for (const auto& r : rows) {
        char buf[256];
        std::snprintf(buf, sizeof buf, "%-6s %s: max_abs_err %.3e (tolerance %.3e)%s%s\n", r.passed ? "PASS" : "FAIL",
                      r.name.c_str(), r.max_abs_err, r.tolerance, r.detail.empty() ? "" : " ", r.detail.c_str());
        report += buf;
        ok = ok && r.passed;
      }
      std::cout << report;
      if (!preset_c.out.empty()) emit(preset_c.out, report);
      return ok ? kOk : kCheckFailed;
    }

    if (*grad) {
      const auto suites = harness::run_grad_checks(grad_c.seed, grad_instances);
      std::string report;
      bool ok = true;
      for (const auto& s : suites) {
        char buf[256];
        std::snprintf(buf, sizeof buf, "%-6s %s: worst rel. error %.3e over %zu instances (threshold %.0e)\n",
                      s.passed ? "PASS" : "FAIL", s.name.c_str(), s.worst_rel_error, s.instances, s.threshold);
        report += buf;
        ok = ok && s.passed;
      }
      std::cout << report;
      if (!grad_c.out.empty()) emit(grad_c.out, report);
      return ok ? kOk : kCheckFailed;
    }

    if (*inspect) {
      emit(inspect_c.out, inspect_text(harness::load(inspect_run)));
      return kOk;
    }
  } catch (const ConfigError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kIo;
  } catch (const FormatError& e) {
    std::cerr << "format error: " << e.what() << "\n";
    return kIo;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kCheckFailed;
  }
  return kOk;
}
