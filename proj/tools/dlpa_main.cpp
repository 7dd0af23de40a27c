// Command-line harness wiring dataset generation, training, evaluation,
// sweeps, and the runtime benchmark into reproducible experiments.

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "dlpa/dataset.hpp"
#include "dlpa/errors.hpp"
#include "dlpa/experiments.hpp"
#include "dlpa/mlp.hpp"
#include "dlpa/scenario.hpp"

namespace fs = std::filesystem;
using namespace dlpa;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

LossKind parse_loss(const std::string& name) {
  if (name == "mse") return LossKind::kMse;
  if (name == "mae") return LossKind::kMae;
  throw ConfigError("loss must be 'mse' or 'mae', got '" + name + "'");
}

void report_progress(std::uint64_t done, std::uint64_t total) {
  std::cerr << "\r  labeled " << done << "/" << total << std::flush;
  if (done == total) std::cerr << "\n";
}

Dataset load_checked(const fs::path& path, const Scenario& scenario) {
  auto loaded = load_dataset(path, scenario.fingerprint());
  if (loaded.fingerprint_mismatch)
    std::cerr << "warning: " << path
              << " was generated from a different scenario; results may "
                 "not be meaningful\n";
  return std::move(loaded.dataset);
}

struct GlobalArgs {
  std::string config_path;
  std::uint64_t seed = 1;
  std::string out_dir = ".";
  int workers = 1;
};

int run_generate(const GlobalArgs& g, const fs::path& out_file,
                 std::uint64_t size, const PsoConfig& pso_cfg, bool resume,
                 bool quiet) {
  const Scenario scenario = load_scenario(g.config_path);
  const auto progress =
      quiet ? std::function<void(std::uint64_t, std::uint64_t)>{}
            : report_progress;
  const auto t0 = std::chrono::steady_clock::now();
  if (resume) {
    const std::uint64_t kept = resume_dataset_file(
        out_file, scenario, size, pso_cfg, g.seed, g.workers, progress);
    if (!quiet && kept > 0)
      std::cerr << "resumed: kept " << kept << " existing samples\n";
  } else {
    Dataset ds = generate_dataset(scenario, size, pso_cfg, g.seed,
                                  g.workers, progress);
    validate_dataset(ds);
    if (out_file.has_parent_path())
      fs::create_directories(out_file.parent_path());
    save_dataset(out_file, ds);
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  write_dataset_sidecar(out_file, scenario, pso_cfg, g.seed, elapsed);
  std::cout << "wrote " << out_file.string() << " (" << size
            << " samples)\n";
  return 0;
}

int run_train(const fs::path& dataset_path, const fs::path& model_path,
              const TrainConfig& cfg, double split_fraction,
              std::uint64_t split_seed) {
  const Dataset ds = load_dataset(dataset_path).dataset;
  validate_dataset(ds);
  const SplitIndices split =
      split_indices(ds.header.sample_count, split_fraction, split_seed);
  Eigen::MatrixXd tx, ty, vx, vy;
  dataset_matrices(ds, split.train, &tx, &ty);
  dataset_matrices(ds, split.validation, &vx, &vy);

  TrainHistory history;
  const auto t0 = std::chrono::steady_clock::now();
  const MlpModel model = train(tx, ty, vx, vy, cfg, &history);
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();

  if (model_path.has_parent_path())
    fs::create_directories(model_path.parent_path());
  save_model(model_path, model);

  std::ostringstream hist;
  hist << "# loss = " << (cfg.loss == LossKind::kMse ? "mse" : "mae") << "\n";
  hist << "# seed = " << cfg.seed << "\n";
  hist << "# split_seed = " << split_seed << "\n";
  hist << "epoch,train_loss,val_loss\n";
  for (std::size_t e = 0; e < history.train_loss.size(); ++e) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%zu,%.12g,%.12g\n", e + 1,
                  history.train_loss[e], history.val_loss[e]);
    hist << buf;
  }
  fs::path hist_path = model_path;
  hist_path.replace_extension(".history.csv");
  write_text(hist_path, hist.str());

  std::cout << "wrote " << model_path.string() << " (final train loss "
            << history.train_loss.back() << ", val loss "
            << history.val_loss.back() << ", " << elapsed << " s)\n";
  return 0;
}

int run_evaluate(const GlobalArgs& g, const fs::path& model_path,
                 const fs::path& dataset_path, const fs::path& test_path,
                 std::uint64_t split_seed) {
  const Scenario scenario = load_scenario(g.config_path);
  const Dataset train_ds = load_checked(dataset_path, scenario);
  const MlpModel model = load_model(model_path).model;

  std::optional<Dataset> test_ds;
  if (!test_path.empty()) test_ds = load_checked(test_path, scenario);

  EvaluateOptions opts;
  opts.split_seed = split_seed;
  opts.workers = g.workers;
  ExperimentReport report = evaluate_model(
      scenario, train_ds, test_ds ? &*test_ds : nullptr, model, opts);
  report.config_echo["model"] = model_path.filename().string();
  report.config_echo["dataset"] = dataset_path.filename().string();

  write_text(fs::path(g.out_dir) / "evaluate.csv", report.results_csv());
  write_text(fs::path(g.out_dir) / "evaluate_timings.csv",
             report.timings_csv());
  std::cout << report.results_csv();
  return 0;
}

int run_sweep_size(const GlobalArgs& g, std::vector<std::uint64_t> sizes,
                   fs::path master_path, fs::path test_path,
                   std::uint64_t test_size, const TrainConfig& train_cfg,
                   const PsoConfig& pso_cfg, bool quiet) {
  const Scenario scenario = load_scenario(g.config_path);
  const auto progress =
      quiet ? std::function<void(std::uint64_t, std::uint64_t)>{}
            : report_progress;

  Dataset master, test;
  if (master_path.empty()) {
    if (sizes.empty()) throw ConfigError("no sweep sizes given");
    master = generate_dataset(scenario, sizes.back(), pso_cfg, g.seed,
                              g.workers, progress);
  } else {
    master = load_checked(master_path, scenario);
  }
  if (test_path.empty()) {
    PsoConfig test_pso = pso_cfg;
    test_pso.seed = pso_cfg.seed + test_seed_offset();
    test = generate_dataset(scenario, test_size, test_pso,
                            g.seed + test_seed_offset(), g.workers,
                            progress);
  } else {
    test = load_checked(test_path, scenario);
  }

  const SizeSweepResult result = sweep_dataset_size(
      scenario, master, test, sizes, train_cfg, g.seed, g.workers);
  write_text(fs::path(g.out_dir) / "sweep_size.csv", result.csv());
  std::cout << result.csv();
  return 0;
}

int run_sweep_users(const GlobalArgs& g, const std::vector<int>& users,
                    UserSweepOptions opts) {
  const Scenario scenario = load_scenario(g.config_path);
  opts.base_seed = g.seed;
  opts.workers = g.workers;
  const UserSweepResult result = sweep_users(scenario, users, opts);
  write_text(fs::path(g.out_dir) / "sweep_users.csv", result.table_csv());
  write_text(fs::path(g.out_dir) / "sweep_users_detail.csv",
             result.detail_csv());
  std::cout << result.table_csv();
  return 0;
}

int run_bench(const GlobalArgs& g, const fs::path& model_path,
              std::uint64_t realizations, const PsoConfig& pso_cfg) {
  const Scenario scenario = load_scenario(g.config_path);
  const MlpModel model = load_model(model_path).model;
  const RuntimeBenchResult result = bench_runtime(
      scenario, model, pso_cfg, realizations, g.seed, g.workers);
  write_text(fs::path(g.out_dir) / "bench_runtime.csv", result.csv());
  std::cout << result.csv();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "dlpa: hybrid-precoded multi-user downlink power allocation lab\n"
      "(swarm-optimized labels, learned allocator, sum-rate benchmarks)"};
  app.require_subcommand(1);

  GlobalArgs g;
  PsoConfig pso_cfg;
  TrainConfig train_cfg;

  auto add_common = [&](CLI::App* cmd, bool needs_config) {
    auto* opt = cmd->add_option("--config", g.config_path,
                                "scenario configuration file");
    if (needs_config) opt->required();
    cmd->add_option("--seed", g.seed, "base seed (default 1)");
    cmd->add_option("--out", g.out_dir, "output directory (default .)");
    cmd->add_option("--workers", g.workers, "worker threads (default 1)")
        ->check(CLI::PositiveNumber);
  };
  auto add_pso = [&](CLI::App* cmd) {
    cmd->add_option("--pso-swarm", pso_cfg.swarm_size, "swarm size");
    cmd->add_option("--pso-iters", pso_cfg.max_iters, "max iterations");
    cmd->add_option("--pso-stall", pso_cfg.stall_iters, "stall patience");
    cmd->add_option("--pso-seed", pso_cfg.seed, "swarm base seed");
  };

  // generate
  auto* generate = app.add_subcommand(
      "generate", "label realizations and write a dataset file");
  std::string gen_out = "dataset.bin";
  std::uint64_t gen_size = 2000;
  bool gen_resume = false, quiet = false;
  add_common(generate, true);
  add_pso(generate);
  generate->add_option("--size", gen_size, "number of samples");
  generate->add_option("--file", gen_out,
                       "dataset file name inside --out (default "
                       "dataset.bin)");
  generate->add_flag("--resume", gen_resume,
                     "continue a partially written dataset file");
  generate->add_flag("--quiet", quiet, "suppress progress output");

  // train
  auto* train_cmd =
      app.add_subcommand("train", "train the allocator on a dataset");
  std::string train_dataset, train_model_out = "model.bin";
  std::string loss_name = "mse";
  double split_fraction = 0.8;
  std::uint64_t split_seed = 1;
  train_cmd->add_option("--dataset", train_dataset, "dataset file")
      ->required();
  train_cmd->add_option("--model", train_model_out,
                        "model file to write (default model.bin)");
  train_cmd->add_option("--loss", loss_name, "mse|mae (default mse)");
  train_cmd->add_option("--epochs", train_cfg.epochs, "epochs (default 25)");
  train_cmd->add_option("--batch", train_cfg.batch_size,
                        "batch size (default 32)");
  train_cmd->add_option("--lr", train_cfg.learning_rate,
                        "learning rate (default 1e-3)");
  train_cmd->add_option("--train-seed", train_cfg.seed,
                        "weight/shuffle seed (default 1)");
  train_cmd->add_option("--split", split_fraction,
                        "training fraction (default 0.8)");
  train_cmd->add_option("--split-seed", split_seed,
                        "split shuffle seed (default 1)");

  // evaluate
  auto* evaluate = app.add_subcommand(
      "evaluate", "mean sum-rate per method on train/validation/test");
  std::string eval_model, eval_dataset, eval_test;
  add_common(evaluate, true);
  evaluate->add_option("--model", eval_model, "model file")->required();
  evaluate->add_option("--dataset", eval_dataset, "training dataset file")
      ->required();
  evaluate->add_option("--test-dataset", eval_test,
                       "held-out dataset file (optional)");
  evaluate->add_option("--split-seed", split_seed,
                       "split shuffle seed (default 1)");

  // sweep-size
  auto* sweep_size = app.add_subcommand(
      "sweep-size", "train and evaluate across dataset sizes");
  std::vector<std::uint64_t> sizes{500, 2000, 8000};
  std::string master_path, sweep_test_path;
  std::uint64_t test_size = 500;
  add_common(sweep_size, true);
  add_pso(sweep_size);
  sweep_size->add_option("--sizes", sizes, "ascending sizes")->delimiter(',');
  sweep_size->add_option("--master", master_path,
                         "existing master dataset (generated when absent)");
  sweep_size->add_option("--test", sweep_test_path,
                         "existing test dataset (generated when absent)");
  sweep_size->add_option("--test-size", test_size,
                         "generated test dataset size (default 500)");
  sweep_size->add_option("--loss", loss_name, "mse|mae (default mse)");
  sweep_size->add_option("--train-seed", train_cfg.seed, "training seed");
  sweep_size->add_flag("--quiet", quiet, "suppress progress output");

  // sweep-users
  auto* sweep_users_cmd = app.add_subcommand(
      "sweep-users", "per-user-count generate/train/evaluate table");
  std::vector<int> users{2, 4, 6};
  UserSweepOptions user_opts;
  std::string users_loss = "mae";
  add_common(sweep_users_cmd, true);
  add_pso(sweep_users_cmd);
  sweep_users_cmd->add_option("--users", users, "user counts")
      ->delimiter(',');
  sweep_users_cmd->add_option("--size", user_opts.train_size,
                              "training dataset size per count");
  sweep_users_cmd->add_option("--test-size", user_opts.test_size,
                              "test dataset size per count");
  sweep_users_cmd->add_option("--loss", users_loss, "mse|mae (default mae)");
  sweep_users_cmd->add_option("--train-seed", user_opts.train_cfg.seed,
                              "training seed");

  // bench-runtime
  auto* bench = app.add_subcommand(
      "bench-runtime", "wall-clock comparison of the two allocators");
  std::string bench_model;
  std::uint64_t bench_n = 1000;
  add_common(bench, true);
  add_pso(bench);
  bench->add_option("--model", bench_model, "model file")->required();
  bench->add_option("--n", bench_n, "realizations (default 1000)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*generate)
      return run_generate(g, fs::path(g.out_dir) / gen_out, gen_size,
                          pso_cfg, gen_resume, quiet);
    if (*train_cmd) {
      train_cfg.loss = parse_loss(loss_name);
      return run_train(train_dataset, fs::path(g.out_dir) / train_model_out,
                       train_cfg, split_fraction, split_seed);
    }
    if (*evaluate)
      return run_evaluate(g, eval_model, eval_dataset, eval_test,
                          split_seed);
    if (*sweep_size) {
      train_cfg.loss = parse_loss(loss_name);
      return run_sweep_size(g, sizes, master_path, sweep_test_path,
                            test_size, train_cfg, pso_cfg, quiet);
    }
    if (*sweep_users_cmd) {
      user_opts.train_cfg.loss = parse_loss(users_loss);
      user_opts.pso_cfg = pso_cfg;
      return run_sweep_users(g, users, user_opts);
    }
    if (*bench) return run_bench(g, bench_model, bench_n, pso_cfg);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
