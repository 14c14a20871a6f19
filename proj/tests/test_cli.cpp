#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include <json.hpp>

#include "dlglab/data.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(DLGLAB_BIN) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::path("cli_scratch") / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("gen writes a parseable dataset and identical bytes per seed") {
  const fs::path dir = fresh_dir("gen");
  const std::string base = "gen --classes 3 --per-class 8 --pool 12 --feature-dim 4 --seed 7";
  CHECK(run(base + " --out " + (dir / "a.json").string() + " --out-dir " + dir.string()) == 0);
  CHECK(run(base + " --out " + (dir / "b.json").string() + " --out-dir " + dir.string()) == 0);
  CHECK(slurp(dir / "a.json") == slurp(dir / "b.json"));

  const dlglab::Dataset ds = dlglab::parse_dataset((dir / "a.json").string());
  CHECK(ds.hypergraph.edge_count() == 24);

  const json report = json::parse(slurp(dir / "report.json"));
  CHECK(report["command"] == "gen");
  CHECK(report["payload"]["hyperedges"] == 24);
  CHECK(report.contains("config"));
  CHECK(report.contains("wall_time_s"));
}

TEST_CASE("verify passes on the golden fixture and fails a corrupted run") {
  const fs::path dir = fresh_dir("verify");
  const fs::path dataset = dir / "golden.json";
  std::ofstream(dataset) << dlglab::testing::golden_dataset_json();

  CHECK(run("verify --dataset " + dataset.string() + " --trials 25 --seed 3 --out-dir " +
            dir.string()) == 0);
  const json spectrum = json::parse(slurp(dir / "spectrum.json"));
  CHECK(spectrum["passed"].get<bool>());
  CHECK(spectrum["eigenvalues"].size() == 3);

  CHECK(run("verify --dataset " + dataset.string() + " --corrupt 0,1 --out-dir " +
            dir.string()) == 1);
  CHECK_FALSE(json::parse(slurp(dir / "spectrum.json"))["passed"].get<bool>());
}

TEST_CASE("verify exits with the usage code on unparseable datasets") {
  const fs::path dir = fresh_dir("verify_bad");
  const fs::path broken = dir / "broken.json";
  std::ofstream(broken) << "{this is not json";
  CHECK(run("verify --dataset " + broken.string() + " --out-dir " + dir.string()) == 2);
  CHECK(run("verify --no-such-flag") == 2);
}

TEST_CASE("inspect dumps full-precision CSV matrices") {
  const fs::path dir = fresh_dir("inspect");
  const fs::path dataset = dir / "golden.json";
  std::ofstream(dataset) << dlglab::testing::golden_dataset_json();

  CHECK(run("inspect --dataset " + dataset.string() + " --matrix laplacian --out-dir " +
            dir.string()) == 0);
  const std::string csv = slurp(dir / "laplacian.csv");
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  CHECK(line == "i,j,re,im");
  int rows = 0;
  bool found_mixed_entry = false;
  while (std::getline(lines, line)) {
    ++rows;
    int i = -1, j = -1;
    double re = 0.0, im = 0.0;
    REQUIRE(std::sscanf(line.c_str(), "%d,%d,%lf,%lf", &i, &j, &re, &im) == 4);
    if (i == 0 && j == 1) {
      found_mixed_entry = true;
      CHECK(re == doctest::Approx(-1.0 / 6.0).epsilon(1e-15));
      CHECK(im == doctest::Approx(-1.0 / 6.0).epsilon(1e-15));
    }
  }
  CHECK(rows == 9);
  CHECK(found_mixed_entry);
}

TEST_CASE("inspect agrees with the undirected matrix on undirected data") {
  const fs::path dir = fresh_dir("inspect_undirected");
  const fs::path dataset = dir / "undirected.json";
  // same topology, all roles collapsed into heads
  std::ofstream(dataset) << R"({
    "classes": ["r0", "r1", "r2"],
    "vertices": [
      {"name": "a", "features": [1.0]},
      {"name": "b", "features": [1.0]},
      {"name": "c", "features": [1.0]},
      {"name": "d", "features": [1.0]},
      {"name": "e", "features": [1.0]}
    ],
    "hyperedges": [
      {"head": ["b", "c", "a"], "label": "r0"},
      {"head": ["a", "b", "d"], "label": "r1"},
      {"head": ["e", "d"], "label": "r2"}
    ]
  })";
  CHECK(run("inspect --dataset " + dataset.string() + " --matrix laplacian --out-dir " +
            dir.string()) == 0);
  CHECK(run("inspect --dataset " + dataset.string() + " --matrix undirected --out-dir " +
            dir.string()) == 0);
  auto body = [&](const std::string& name) {
    const std::string text = slurp(dir / name);
    return text.substr(text.find('\n') + 1);
  };
  CHECK(body("laplacian.csv") == body("undirected.csv"));
}

TEST_CASE("train runs end to end and writes models, confusions and metrics") {
  const fs::path dir = fresh_dir("train");
  const fs::path dataset = dir / "synth.json";
  CHECK(run("gen --classes 2 --per-class 12 --pool 12 --feature-dim 4 --seed 5 --out " +
            dataset.string() + " --out-dir " + dir.string()) == 0);
  CHECK(run("train --dataset " + dataset.string() +
            " --folds 2 --epochs 6 --filters 4 --hidden 8 --seed 5 --out-dir " +
            dir.string()) == 0);

  for (const char* name : {"model_fold0.json", "model_fold1.json", "confusion_fold0.csv",
                           "confusion_fold1.csv", "metrics.json", "report.json"})
    CHECK(fs::exists(dir / name));

  const json metrics = json::parse(slurp(dir / "metrics.json"));
  CHECK(metrics["per_fold"].size() == 2);
  const double mean = metrics["mean_test_macro_f1"].get<double>();
  CHECK(mean >= 0.0);
  CHECK(mean <= 100.0);

  const json report = json::parse(slurp(dir / "report.json"));
  CHECK(report["command"] == "train");
  CHECK(report["config"]["epochs"] == 6);
  CHECK(report["config"]["ablation"] == "none");

  // the stored model must load and have the configured shape
  const dlglab::DlgModel model = dlglab::load_model((dir / "model_fold0.json").string());
  CHECK(model.conv.size() == 2);
  CHECK(model.classes() == 2);
}

TEST_CASE("train without folds is a usage error") {
  const fs::path dir = fresh_dir("train_nofolds");
  const fs::path dataset = dir / "golden.json";
  std::ofstream(dataset) << dlglab::testing::golden_dataset_json();
  CHECK(run("train --dataset " + dataset.string() + " --epochs 2 --out-dir " + dir.string()) ==
        2);
}
