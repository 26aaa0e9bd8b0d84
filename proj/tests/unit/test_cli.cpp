#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>

#include "laf/io.hpp"

namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("laf_cli_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

Result lafctl(const std::string& args, const TempDir& tmp) {
  const auto out = tmp.path / "stdout.txt", err = tmp.path / "stderr.txt";
  const std::string cmd = std::string(LAFCTL_PATH) + " " + args + " >" + out.string() + " 2>" + err.string();
  const int status = std::system(cmd.c_str());
  Result r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = laf::io::read_file(out);
  r.err = laf::io::read_file(err);
  return r;
}

std::size_t lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

const char* kSmall = " --epochs 1 --train-size 200 --val-size 50 --test-size 100 --quiet";

}  // namespace

TEST_CASE("cli: usage errors exit 2") {
  TempDir tmp;
  CHECK(lafctl("", tmp).code == 2);
  CHECK(lafctl("frobnicate", tmp).code == 2);
  CHECK(lafctl("preset-check --bogus", tmp).code == 2);
  const auto bad = lafctl("sweep --target mode --model laf --out " + (tmp.path / "r").string(), tmp);
  CHECK(bad.code == 2);
  CHECK(bad.err.find("inverse_count") != std::string::npos);
  const auto model = lafctl("sweep --target sum --model lstm --out " + (tmp.path / "r").string(), tmp);
  CHECK(model.code == 2);
  CHECK(model.err.find("deepsets9") != std::string::npos);
}

TEST_CASE("cli: gen writes one record per set") {
  TempDir tmp;
  const auto file = tmp.path / "sets.csv";
  CHECK(lafctl("gen --task scalar --target sum --M 10 -n 100 --out " + file.string(), tmp).code == 0);
  CHECK(lines(laf::io::read_file(file)) == 100);
  CHECK(lafctl("gen --target max --M 20 -n 50 --split test --seed 4", tmp).code == 0);
}

TEST_CASE("cli: sweep rows, determinism, eval and inspect") {
  TempDir tmp;
  const auto a = tmp.path / "a", b = tmp.path / "b";
  const auto r1 = lafctl("sweep --target mean --model laf --Ms 5,10,25,50" + std::string(kSmall) + " --out " +
                             a.string(),
                         tmp);
  REQUIRE(r1.code == 0);
  const auto csv = laf::io::read_file(a / "results.csv");
  CHECK(lines(csv) == 5);
  CHECK(csv.rfind("target,model,M,mae,seed\n", 0) == 0);
  CHECK(lafctl("sweep --target mean --model laf --Ms 5,10,25,50" + std::string(kSmall) + " --out " + b.string(), tmp)
            .code == 0);
  CHECK(laf::io::read_file(b / "results.csv") == csv);

  const auto ev = lafctl("eval --run " + a.string() + " --Ms 5,10 -n 50", tmp);
  CHECK(ev.code == 0);
  CHECK(lines(ev.out) == 3);

  const auto ins = lafctl("inspect --run " + a.string(), tmp);
  CHECK(ins.code == 0);
  CHECK(ins.out.find("unit9: (") != std::string::npos);
  CHECK(ins.out.find("linear: ") != std::string::npos);

  const auto median = lafctl("sweep --target median --model deepsets9 --Ms 5" + std::string(kSmall) + " --out " +
                                 (tmp.path / "m").string(),
                             tmp);
  CHECK(median.code == 0);
  CHECK(median.out.find("median,deepsets9,5,") != std::string::npos);
}

TEST_CASE("cli: raw three-unit study and its inspection output") {
  TempDir tmp;
  const auto dir = tmp.path / "study";
  const auto r = lafctl("study --target count --units 1,3 --restarts 4 --epochs 1 --train-size 100 --test-size 50 "
                        "--out " + dir.string(),
                        tmp);
  REQUIRE(r.code == 0);
  CHECK(lines(laf::io::read_file(dir / "study.csv")) == 9);
  const auto units = laf::io::read_file(dir / "units.txt");
  CHECK(units.find("  unit3: (") != std::string::npos);
  CHECK(units.find("  linear: ") != std::string::npos);
  CHECK(r.out.find("units 3: median MAE") != std::string::npos);
}

TEST_CASE("cli: IO and format errors exit 3") {
  TempDir tmp;
  CHECK(lafctl("inspect --run " + (tmp.path / "missing").string(), tmp).code == 3);
  fs::create_directories(tmp.path / "bad");
  laf::io::write_atomic(tmp.path / "bad" / "run.json", "{oops");
  CHECK(lafctl("inspect --run " + (tmp.path / "bad").string(), tmp).code == 3);
  CHECK(lafctl("train --config " + (tmp.path / "nope.json").string() + " --out " + (tmp.path / "r").string(), tmp)
            .code == 3);
}

TEST_CASE("cli: preset-check and its negative control") {
  TempDir tmp;
  const auto ok = lafctl("preset-check", tmp);
  CHECK(ok.code == 0);
  CHECK(ok.out.find("PASS   sum: max_abs_err") != std::string::npos);
  for (const char* row : {"constant", "max(", "min(", "sum", "nonzero-count", "mean", "moment(", "power-moment(",
                          "min/max(", "max/min("})
    CHECK_MESSAGE(ok.out.find(std::string(" ") + row) != std::string::npos, row);

  const auto bad = lafctl("preset-check --sabotage mean", tmp);
  CHECK(bad.code == 1);
  CHECK(bad.out.find("FAIL   mean") != std::string::npos);
}

TEST_CASE("cli: grad-check is deterministic") {
  TempDir tmp;
  const auto a = lafctl("grad-check --instances 5 --seed 3", tmp);
  const auto b = lafctl("grad-check --instances 5 --seed 3", tmp);
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(lines(a.out) == 4);
}
