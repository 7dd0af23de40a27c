#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dlpa/dataset.hpp"
#include "dlpa/mlp.hpp"
#include "dlpa/precoding.hpp"

namespace dlpa {

/// Allocation strategies compared throughout the experiments.
enum class Method { kDlPa, kPsoPa, kEqPa };
std::string method_name(Method m);

/// Mean sum-rate of one method on one split, with the walltime spent
/// producing the allocations (timing never participates in deterministic
/// outputs).
struct MethodResult {
  Method method = Method::kEqPa;
  std::string split;
  double mean_sum_rate = 0.0;
  double runtime_seconds = 0.0;
};

struct ExperimentReport {
  std::vector<MethodResult> results;
  std::map<std::string, std::string> config_echo;  // sorted, deterministic

  /// 100 * method mean / PSO mean on the same split.
  double relative_to_pso(Method m, const std::string& split) const;
  const MethodResult& find(Method m, const std::string& split) const;

  /// Deterministic CSV (no timing columns): split,method,mean,relative%.
  std::string results_csv() const;
  /// Timing CSV, excluded from the byte-determinism guarantee.
  std::string timings_csv() const;
};

/// Per-sample evaluation context regenerated from a dataset: the
/// realization is re-drawn from its stored seed and pushed through the
/// fixed RF stage, so every method sees identical instances.
struct EvalInstance {
  Eigen::MatrixXcd effective;
  Eigen::MatrixXcd bb;
  Eigen::MatrixXd gains2;
  Eigen::VectorXd bb_power2;
};

std::vector<EvalInstance> rebuild_instances(const Scenario& scenario,
                                            const Dataset& dataset,
                                            const std::vector<std::uint64_t>&
                                                indices,
                                            int workers = 1);

/// Mean sum-rates of DL-PA (model forward + full-power scaling), PSO-PA
/// (stored labels rescaled onto the budget), and EQ-PA on the given
/// split. The model may be null, in which case only PSO/EQ rows are
/// produced. Model/dataset shape mismatches throw ValidationError.
void evaluate_split(const Scenario& scenario, const Dataset& dataset,
                    const std::vector<std::uint64_t>& indices,
                    const std::string& split_name, const MlpModel* model,
                    ExperimentReport* report, int workers = 1);

/// Trains on the dataset's seeded 80/20 split and evaluates train,
/// validation, and (when given) test datasets.
struct EvaluateOptions {
  double train_fraction = 0.8;
  std::uint64_t split_seed = 1;
  int workers = 1;
};

ExperimentReport evaluate_model(const Scenario& scenario,
                                const Dataset& train_dataset,
                                const Dataset* test_dataset,
                                const MlpModel& model,
                                const EvaluateOptions& opts);

/// Dataset-size sweep: one model per size, trained on nested subsets of
/// the master dataset (a single seeded shuffle ordering, truncated), all
/// evaluated on the same test dataset.
struct SizeSweepRow {
  std::uint64_t size = 0;
  double dl_mean = 0.0, pso_mean = 0.0, eq_mean = 0.0;
  double gap_to_pso = 0.0;  // pso_mean - dl_mean
};

struct SizeSweepResult {
  std::vector<SizeSweepRow> rows;
  std::map<std::string, std::string> config_echo;
  std::string csv() const;
};

SizeSweepResult sweep_dataset_size(const Scenario& scenario,
                                   const Dataset& master,
                                   const Dataset& test,
                                   const std::vector<std::uint64_t>& sizes,
                                   const TrainConfig& train_cfg,
                                   std::uint64_t shuffle_seed,
                                   int workers = 1);

/// User-count sweep: per K, generate, label, train, evaluate, and time
/// both allocators on the test realizations.
struct UserSweepRow {
  int num_users = 0;
  double dl_mean = 0.0, pso_mean = 0.0, eq_mean = 0.0;
  double relative_sum_rate_pct = 0.0;
  double relative_runtime_pct = 0.0;
  double pso_seconds = 0.0, dl_seconds = 0.0;
};

struct UserSweepResult {
  std::vector<UserSweepRow> rows;
  std::map<std::string, std::string> config_echo;
  /// Two-row table (relative sum-rate %, relative runtime %), one column
  /// per user count.
  std::string table_csv() const;
  std::string detail_csv() const;
};

struct UserSweepOptions {
  std::uint64_t train_size = 2000;
  std::uint64_t test_size = 500;
  TrainConfig train_cfg;       // loss defaults to MAE for this sweep
  PsoConfig pso_cfg;
  std::uint64_t base_seed = 1;
  int workers = 1;

  UserSweepOptions() { train_cfg.loss = LossKind::kMae; }
};

UserSweepResult sweep_users(const Scenario& base_scenario,
                            const std::vector<int>& user_counts,
                            const UserSweepOptions& opts);

/// Wall-clock comparison of the two allocators on identical instances.
/// The swarm side times pso_optimize per realization (including its gain
/// precomputation); the network side times feature building, one batched
/// forward pass, and the full-power scaling. A small warm-up prefix runs
/// untimed first. Single worker unless asked otherwise, so ratios stay
/// hardware-comparable.
struct RuntimeBenchResult {
  std::uint64_t realizations = 0;
  int num_users = 0;
  int workers = 1;
  double pso_total_seconds = 0.0;
  double dl_total_seconds = 0.0;
  double dl_over_pso_pct = 0.0;
  double dl_mean_sum_rate = 0.0;
  double pso_mean_sum_rate = 0.0;
  std::map<std::string, std::string> config_echo;
  std::string csv() const;
};

RuntimeBenchResult bench_runtime(const Scenario& scenario,
                                 const MlpModel& model,
                                 const PsoConfig& pso_cfg,
                                 std::uint64_t realizations,
                                 std::uint64_t base_seed, int workers = 1);

/// Derived seeds for companion datasets, kept far apart so training and
/// test draws never overlap.
std::uint64_t test_seed_offset();

}  // namespace dlpa
