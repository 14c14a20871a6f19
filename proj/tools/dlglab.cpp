// dlglab: directed line-graph Laplacians, spectral checks, and DLGNet
// training on hyperedge-classification datasets.
//
// Exit codes: 0 success / all checks pass, 1 check failure, 2 usage or parse
// error.

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "dlglab/data.hpp"
#include "dlglab/net.hpp"
#include "dlglab/spectral.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) dlglab::fail(dlglab::ErrorCode::io_error, "cannot write " + path.string());
  out << text;
  if (!out) dlglab::fail(dlglab::ErrorCode::io_error, "failed writing " + path.string());
}

void write_report(const fs::path& out_dir, const std::string& command, const json& config,
                  std::uint64_t seed, double wall_s, const std::vector<std::string>& outputs,
                  const json& payload) {
  json report;
  report["command"] = command;
  report["config"] = config;
  report["seed"] = seed;
  report["wall_time_s"] = wall_s;
  report["outputs"] = outputs;
  report["payload"] = payload;
  write_text(out_dir / "report.json", report.dump(2) + "\n");
}

std::string full_precision(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int threads_from_env(int folds) {
  int cap = 1;
  if (const char* env = std::getenv("DLGLAB_THREADS")) {
    cap = std::max(1, std::atoi(env));
  }
  return std::min(cap, folds);
}

struct TrainFlags {
  std::string dataset;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  int epochs = 300;
  double lr = 5e-3;
  double weight_decay = 5e-4;
  int conv_layers = 2;
  int filters = 64;
  int hidden = 64;
  int linear_layers = 2;
  int folds = 0;  // 0 = use folds stored in the dataset
  std::string ablation = "none";
  std::string laplacian = "laplacian";
  bool theta0_zero = false;
  bool no_residual = false;
  bool imag_features = false;
};

json train_config_json(const TrainFlags& f) {
  return json{{"dataset", f.dataset},
              {"out_dir", f.out_dir},
              {"seed", f.seed},
              {"epochs", f.epochs},
              {"lr", f.lr},
              {"weight_decay", f.weight_decay},
              {"conv_layers", f.conv_layers},
              {"filters", f.filters},
              {"hidden", f.hidden},
              {"linear_layers", f.linear_layers},
              {"folds", f.folds},
              {"ablation", f.ablation},
              {"laplacian", f.laplacian},
              {"theta0_zero", f.theta0_zero},
              {"no_residual", f.no_residual},
              {"imag_features", f.imag_features}};
}

int cmd_gen(const dlglab::SynthConfig& cfg, const std::string& out_path,
            const std::string& out_dir) {
  Stopwatch timer;
  fs::create_directories(out_dir);
  dlglab::Dataset ds = dlglab::generate_synthetic(cfg);
  dlglab::write_dataset(ds, out_path);

  std::vector<int> per_class(static_cast<std::size_t>(ds.num_classes()), 0);
  for (int label : ds.labels) per_class[static_cast<std::size_t>(label)]++;
  const json config{{"classes", cfg.classes},       {"per_class", cfg.edges_per_class},
                    {"pool", cfg.vertex_pool},      {"head_min", cfg.head_min},
                    {"head_max", cfg.head_max},     {"tail_min", cfg.tail_min},
                    {"tail_max", cfg.tail_max},     {"motif", cfg.motif_strength},
                    {"noise", cfg.feature_noise},   {"feature_dim", cfg.feature_dim},
                    {"seed", cfg.seed},             {"out", out_path}};
  const json payload{{"vertices", ds.hypergraph.vertex_count()},
                     {"hyperedges", ds.hypergraph.edge_count()},
                     {"per_class_counts", per_class}};
  write_report(out_dir, "gen", config, cfg.seed, timer.seconds(), {out_path}, payload);
  return kExitOk;
}

int cmd_verify(const std::string& dataset_path, int trials, std::uint64_t seed,
               const std::string& out_dir, const std::string& corrupt) {
  Stopwatch timer;
  fs::create_directories(out_dir);
  const dlglab::Dataset ds = dlglab::parse_dataset(dataset_path);

  dlglab::DlgMatrices dm = dlglab::directed_laplacians(ds.hypergraph);
  if (!corrupt.empty()) {
    int ci = 0, cj = 0;
    if (std::sscanf(corrupt.c_str(), "%d,%d", &ci, &cj) != 2 || ci < 0 || cj < 0 ||
        ci >= dm.laplacian.rows() || cj >= dm.laplacian.cols())
      dlglab::fail(dlglab::ErrorCode::invalid_config, "--corrupt expects 'i,j' inside the matrix");
    dm.laplacian(ci, cj) += dlglab::cxd(0.5, 0.25);  // negative control, breaks Hermitian symmetry
  }
  const dlglab::SpectrumReport report = dlglab::verify_matrices(ds.hypergraph, dm, trials, seed);

  const fs::path spectrum_path = fs::path(out_dir) / "spectrum.json";
  write_text(spectrum_path, report.to_json() + "\n");

  const json config{{"dataset", dataset_path}, {"trials", trials},
                    {"seed", seed},            {"out_dir", out_dir},
                    {"corrupt", corrupt}};
  write_report(out_dir, "verify", config, seed, timer.seconds(), {spectrum_path.string()},
               json::parse(report.to_json()));
  std::cout << (report.passed ? "verify: all checks passed\n" : "verify: CHECKS FAILED\n");
  return report.passed ? kExitOk : kExitCheckFailed;
}

int cmd_inspect(const std::string& dataset_path, const std::string& which,
                const std::string& out_dir) {
  Stopwatch timer;
  fs::create_directories(out_dir);
  const dlglab::Dataset ds = dlglab::parse_dataset(dataset_path);

  dlglab::CMat matrix;
  if (which == "adjacency") {
    matrix = dlglab::dlg_adjacency(ds.hypergraph);
  } else if (which == "laplacian") {
    matrix = dlglab::directed_laplacians(ds.hypergraph).laplacian;
  } else if (which == "signless") {
    matrix = dlglab::directed_laplacians(ds.hypergraph).signless;
  } else if (which == "undirected") {
    matrix = dlglab::undirected_laplacian(ds.hypergraph).cast<dlglab::cxd>();
  } else {
    dlglab::fail(dlglab::ErrorCode::invalid_config, "unknown matrix kind " + which);
  }

  std::string csv = "i,j,re,im\n";
  for (Eigen::Index i = 0; i < matrix.rows(); ++i)
    for (Eigen::Index j = 0; j < matrix.cols(); ++j)
      csv += std::to_string(i) + "," + std::to_string(j) + "," +
             full_precision(matrix(i, j).real()) + "," + full_precision(matrix(i, j).imag()) +
             "\n";
  const fs::path csv_path = fs::path(out_dir) / (which + ".csv");
  write_text(csv_path, csv);

  const json config{{"dataset", dataset_path}, {"matrix", which}, {"out_dir", out_dir}};
  const json payload{{"rows", matrix.rows()}, {"entries", matrix.size()}};
  write_report(out_dir, "inspect", config, 0, timer.seconds(), {csv_path.string()}, payload);
  return kExitOk;
}

std::string confusion_csv(const dlglab::Metrics& mt, const std::vector<std::string>& classes) {
  std::string csv = "true";
  for (const std::string& c : classes) csv += ",pred_" + c;
  csv += "\n";
  for (Eigen::Index r = 0; r < mt.confusion.rows(); ++r) {
    csv += classes[static_cast<std::size_t>(r)];
    for (Eigen::Index c = 0; c < mt.confusion.cols(); ++c)
      csv += "," + std::to_string(mt.confusion(r, c));
    csv += "\n";
  }
  return csv;
}

int cmd_train(const TrainFlags& flags) {
  Stopwatch timer;
  fs::create_directories(flags.out_dir);
  dlglab::Dataset ds = dlglab::parse_dataset(flags.dataset);
  if (flags.folds > 0) ds = dlglab::make_folds(std::move(ds), flags.folds, flags.seed);
  if (ds.folds.empty())
    dlglab::fail(dlglab::ErrorCode::invalid_config,
                 "dataset has no folds; pass --folds K to create them");

  json jfolds = json::array();
  for (const dlglab::FoldSplit& f : ds.folds)
    jfolds.push_back(json{{"train", f.train}, {"val", f.val}, {"test", f.test}});
  const fs::path folds_path = fs::path(flags.out_dir) / "folds.json";
  write_text(folds_path, jfolds.dump(2) + "\n");

  dlglab::TrainConfig base;
  base.epochs = flags.epochs;
  base.learning_rate = flags.lr;
  base.weight_decay = flags.weight_decay;
  base.conv_layers = flags.conv_layers;
  base.filters = flags.filters;
  base.hidden = flags.hidden;
  base.linear_layers = flags.linear_layers;
  base.residual = !flags.no_residual;
  base.theta0_zero = flags.theta0_zero;
  base.imag_features = flags.imag_features;
  base.undirected = flags.ablation == "undirected";
  base.laplacian = flags.laplacian == "signless" ? dlglab::LaplacianKind::signless
                                                 : dlglab::LaplacianKind::laplacian;
  base.validate();

  const int fold_count = static_cast<int>(ds.folds.size());
  struct FoldOutcome {
    dlglab::TrainResult result;
    dlglab::Metrics test;
  };
  std::vector<FoldOutcome> outcomes(static_cast<std::size_t>(fold_count));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(fold_count));

  const int workers = threads_from_env(fold_count);
  std::atomic<int> next{0};
  auto run_folds = [&]() {
    for (int f = next.fetch_add(1); f < fold_count; f = next.fetch_add(1)) {
      try {
        dlglab::TrainConfig cfg = base;
        cfg.seed = dlglab::derive_seed(flags.seed, "fold", static_cast<std::uint64_t>(f));
        FoldOutcome outcome{dlglab::train(ds, ds.folds[static_cast<std::size_t>(f)], cfg), {}};
        outcome.test = dlglab::evaluate(outcome.result.model, ds,
                                        ds.folds[static_cast<std::size_t>(f)].test, cfg);
        outcomes[static_cast<std::size_t>(f)] = std::move(outcome);
      } catch (...) {
        errors[static_cast<std::size_t>(f)] = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    run_folds();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(run_folds);
    for (std::thread& t : pool) t.join();
  }
  for (const std::exception_ptr& e : errors)
    if (e) std::rethrow_exception(e);

  std::vector<std::string> outputs{folds_path.string()};
  json per_fold = json::array();
  double mean = 0.0;
  for (int f = 0; f < fold_count; ++f) {
    const FoldOutcome& oc = outcomes[static_cast<std::size_t>(f)];
    const fs::path model_path = fs::path(flags.out_dir) / ("model_fold" + std::to_string(f) + ".json");
    dlglab::write_model(oc.result.model, model_path.string());
    const fs::path conf_path =
        fs::path(flags.out_dir) / ("confusion_fold" + std::to_string(f) + ".csv");
    write_text(conf_path, confusion_csv(oc.test, ds.class_names));
    outputs.push_back(model_path.string());
    outputs.push_back(conf_path.string());

    per_fold.push_back(json{{"fold", f},
                            {"best_epoch", oc.result.best_epoch},
                            {"val_macro_f1", oc.result.best_val_macro_f1},
                            {"test_macro_f1", oc.test.macro_f1},
                            {"test_loss", oc.test.loss}});
    mean += oc.test.macro_f1;
  }
  mean /= fold_count;
  double var = 0.0;
  for (const json& jf : per_fold) {
    const double d = jf["test_macro_f1"].get<double>() - mean;
    var += d * d;
  }
  const double stddev = std::sqrt(var / fold_count);

  json payload{{"per_fold", per_fold}, {"mean_test_macro_f1", mean}, {"std_test_macro_f1", stddev}};
  const fs::path metrics_path = fs::path(flags.out_dir) / "metrics.json";
  write_text(metrics_path, payload.dump(2) + "\n");
  outputs.push_back(metrics_path.string());

  write_report(flags.out_dir, "train", train_config_json(flags), flags.seed, timer.seconds(),
               outputs, payload);
  std::cout << "train: mean test macro-F1 " << mean << " +- " << stddev << " over " << fold_count
            << " folds\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"directed line-graph Laplacian lab"};
  app.require_subcommand(1);

  // gen
  dlglab::SynthConfig synth;
  std::string gen_out = "dataset.json";
  std::string gen_out_dir = ".";
  CLI::App* gen = app.add_subcommand("gen", "generate a synthetic direction-motif dataset");
  gen->add_option("--classes", synth.classes);
  gen->add_option("--per-class", synth.edges_per_class);
  gen->add_option("--pool", synth.vertex_pool);
  gen->add_option("--head-min", synth.head_min);
  gen->add_option("--head-max", synth.head_max);
  gen->add_option("--tail-min", synth.tail_min);
  gen->add_option("--tail-max", synth.tail_max);
  gen->add_option("--motif", synth.motif_strength);
  gen->add_option("--noise", synth.feature_noise);
  gen->add_option("--feature-dim", synth.feature_dim);
  gen->add_option("--seed", synth.seed);
  gen->add_option("--out", gen_out);
  gen->add_option("--out-dir", gen_out_dir);

  // verify
  std::string verify_dataset;
  std::string verify_out_dir = ".";
  std::string verify_corrupt;
  int verify_trials = 50;
  std::uint64_t verify_seed = 0;
  CLI::App* verify = app.add_subcommand("verify", "check the spectral guarantees on a dataset");
  verify->add_option("--dataset", verify_dataset)->required();
  verify->add_option("--trials", verify_trials);
  verify->add_option("--seed", verify_seed);
  verify->add_option("--out-dir", verify_out_dir);
  verify->add_option("--corrupt", verify_corrupt,
                     "perturb Laplacian entry 'i,j' first (negative control)");

  // inspect
  std::string inspect_dataset, inspect_out_dir = ".";
  std::string inspect_matrix = "laplacian";
  CLI::App* inspect = app.add_subcommand("inspect", "dump a line-graph matrix as CSV");
  inspect->add_option("--dataset", inspect_dataset)->required();
  inspect->add_option("--matrix", inspect_matrix)
      ->check(CLI::IsMember({"adjacency", "laplacian", "signless", "undirected"}));
  inspect->add_option("--out-dir", inspect_out_dir);

  // train
  TrainFlags tf;
  CLI::App* train = app.add_subcommand("train", "train and evaluate DLGNet over folds");
  train->add_option("--dataset", tf.dataset)->required();
  train->add_option("--seed", tf.seed);
  train->add_option("--epochs", tf.epochs);
  train->add_option("--lr", tf.lr);
  train->add_option("--weight-decay", tf.weight_decay);
  train->add_option("--conv-layers", tf.conv_layers);
  train->add_option("--filters", tf.filters);
  train->add_option("--hidden", tf.hidden);
  train->add_option("--linear-layers", tf.linear_layers);
  train->add_option("--folds", tf.folds);
  train->add_option("--ablation", tf.ablation)->check(CLI::IsMember({"none", "undirected"}));
  train->add_option("--laplacian", tf.laplacian)
      ->check(CLI::IsMember({"laplacian", "signless"}));
  train->add_flag("--theta0-zero", tf.theta0_zero);
  train->add_flag("--no-residual", tf.no_residual);
  train->add_flag("--imag-features", tf.imag_features);
  train->add_option("--out-dir", tf.out_dir);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (gen->parsed()) return cmd_gen(synth, gen_out, gen_out_dir);
    if (verify->parsed())
      return cmd_verify(verify_dataset, verify_trials, verify_seed, verify_out_dir, verify_corrupt);
    if (inspect->parsed()) return cmd_inspect(inspect_dataset, inspect_matrix, inspect_out_dir);
    if (train->parsed()) return cmd_train(tf);
  } catch (const dlglab::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    switch (e.code()) {
      case dlglab::ErrorCode::parse_error:
      case dlglab::ErrorCode::io_error:
      case dlglab::ErrorCode::invalid_config:
        return kExitUsage;
      default:
        return kExitCheckFailed;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCheckFailed;
  }
  return kExitUsage;
}
