#include "dlpa/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "dlpa/errors.hpp"
#include "dlpa/rng.hpp"
#include "parallel.hpp"

namespace dlpa {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v, const char* spec = "%.10g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

void echo_lines(std::ostringstream& os,
                const std::map<std::string, std::string>& echo) {
  for (const auto& [k, v] : echo) os << "# " << k << " = " << v << "\n";
}

void echo_scenario(std::map<std::string, std::string>* echo,
                   const Scenario& scenario) {
  std::istringstream is(scenario.canonical_text());
  std::string line;
  while (std::getline(is, line)) {
    const auto eq = line.find('=');
    (*echo)["scenario." + line.substr(0, eq - 1)] = line.substr(eq + 2);
  }
}

/// Allocation produced by one method for one instance, already scaled
/// onto the power budget.
Eigen::VectorXd scaled_powers(const Eigen::VectorXd& raw,
                              const Eigen::VectorXd& bb_power2,
                              double p_total) {
  const double denom = raw.dot(bb_power2);
  if (!(denom > 0.0))
    throw ValidationError("zero-consumption power direction");
  return raw * (p_total / denom);
}

double instance_sum_rate(const EvalInstance& inst,
                         const Eigen::VectorXd& powers, double sigma2) {
  return sum_rate(sinr_per_user(inst.gains2, powers, sigma2));
}

}  // namespace

std::string method_name(Method m) {
  switch (m) {
    case Method::kDlPa: return "dl-pa";
    case Method::kPsoPa: return "pso-pa";
    case Method::kEqPa: return "eq-pa";
  }
  return "?";
}

double ExperimentReport::relative_to_pso(Method m,
                                         const std::string& split) const {
  return 100.0 * find(m, split).mean_sum_rate /
         find(Method::kPsoPa, split).mean_sum_rate;
}

const MethodResult& ExperimentReport::find(Method m,
                                           const std::string& split) const {
  for (const auto& r : results)
    if (r.method == m && r.split == split) return r;
  throw ValidationError("no result for " + method_name(m) + "/" + split);
}

std::string ExperimentReport::results_csv() const {
  std::ostringstream os;
  echo_lines(os, config_echo);
  os << "split,method,mean_sum_rate_bps_hz,relative_to_pso_pct\n";
  for (const auto& r : results) {
    os << r.split << "," << method_name(r.method) << ","
       << fmt(r.mean_sum_rate) << ","
       << fmt(relative_to_pso(r.method, r.split), "%.6f") << "\n";
  }
  return os.str();
}

std::string ExperimentReport::timings_csv() const {
  std::ostringstream os;
  os << "split,method,runtime_seconds\n";
  for (const auto& r : results)
    os << r.split << "," << method_name(r.method) << ","
       << fmt(r.runtime_seconds, "%.6f") << "\n";
  return os.str();
}

std::vector<EvalInstance> rebuild_instances(
    const Scenario& scenario, const Dataset& dataset,
    const std::vector<std::uint64_t>& indices, int workers) {
  const RfDesign design = design_rf_stage(scenario);
  if (design.num_chains() != static_cast<int>(dataset.header.num_chains))
    throw ValidationError(
        "scenario RF design does not match the dataset header");

  std::vector<EvalInstance> instances(indices.size());
  detail::parallel_for_index(indices.size(), workers, [&](std::uint64_t j) {
    const LabeledSample& s = dataset.samples.at(indices[j]);
    const ChannelRealization realization =
        sample_realization(scenario, s.aux.realization_seed);
    const HybridPrecoder hp =
        complete_precoder(design, realization, scenario.link);
    EvalInstance inst;
    inst.effective = hp.effective;
    inst.bb = hp.bb;
    inst.gains2 = effective_gains(hp.effective, hp.bb);
    inst.bb_power2 = bb_column_power(hp.bb);
    instances[j] = std::move(inst);
  });
  return instances;
}

void evaluate_split(const Scenario& scenario, const Dataset& dataset,
                    const std::vector<std::uint64_t>& indices,
                    const std::string& split_name, const MlpModel* model,
                    ExperimentReport* report, int workers) {
  if (indices.empty())
    throw ValidationError("empty split '" + split_name + "'");
  if (model &&
      model->input_size() != static_cast<int>(dataset.header.feature_len))
    throw ValidationError("model input size " +
                          std::to_string(model->input_size()) +
                          " != dataset feature length " +
                          std::to_string(dataset.header.feature_len));
  if (model &&
      model->output_size() != static_cast<int>(dataset.header.num_users))
    throw ValidationError("model output size does not match dataset users");

  const double sigma2 = scenario.link.noise_power_mw;
  const double p_total = scenario.link.total_power_mw;
  const auto n = indices.size();
  const auto instances = rebuild_instances(scenario, dataset, indices,
                                           workers);

  if (model) {
    Eigen::MatrixXd features(dataset.header.feature_len, n);
    for (std::size_t j = 0; j < n; ++j)
      features.col(j) = dataset.samples.at(indices[j]).features.values;

    const auto t0 = Clock::now();
    const Eigen::MatrixXd predicted = forward_batch(*model, features);
    std::vector<Eigen::VectorXd> allocations(n);
    for (std::size_t j = 0; j < n; ++j)
      allocations[j] = scaled_powers(predicted.col(j),
                                     instances[j].bb_power2, p_total);
    const double dl_seconds = seconds_since(t0);

    double mean = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      mean += instance_sum_rate(instances[j], allocations[j], sigma2);
    report->results.push_back(
        {Method::kDlPa, split_name, mean / n, dl_seconds});
  }

  {
    const auto t0 = Clock::now();
    std::vector<Eigen::VectorXd> allocations(n);
    for (std::size_t j = 0; j < n; ++j)
      allocations[j] = scaled_powers(dataset.samples.at(indices[j]).label,
                                     instances[j].bb_power2, p_total);
    const double pso_seconds = seconds_since(t0);
    double mean = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      mean += instance_sum_rate(instances[j], allocations[j], sigma2);
    report->results.push_back(
        {Method::kPsoPa, split_name, mean / n, pso_seconds});
  }

  {
    const auto t0 = Clock::now();
    std::vector<Eigen::VectorXd> allocations(n);
    for (std::size_t j = 0; j < n; ++j)
      allocations[j] = scaled_powers(
          Eigen::VectorXd::Ones(instances[j].bb_power2.size()),
          instances[j].bb_power2, p_total);
    const double eq_seconds = seconds_since(t0);
    double mean = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      mean += instance_sum_rate(instances[j], allocations[j], sigma2);
    report->results.push_back(
        {Method::kEqPa, split_name, mean / n, eq_seconds});
  }
}

ExperimentReport evaluate_model(const Scenario& scenario,
                                const Dataset& train_dataset,
                                const Dataset* test_dataset,
                                const MlpModel& model,
                                const EvaluateOptions& opts) {
  ExperimentReport report;
  echo_scenario(&report.config_echo, scenario);
  report.config_echo["split_seed"] = std::to_string(opts.split_seed);
  report.config_echo["train_fraction"] = fmt(opts.train_fraction, "%.4f");

  const SplitIndices split = split_indices(
      train_dataset.header.sample_count, opts.train_fraction,
      opts.split_seed);
  evaluate_split(scenario, train_dataset, split.train, "train", &model,
                 &report, opts.workers);
  evaluate_split(scenario, train_dataset, split.validation, "validation",
                 &model, &report, opts.workers);
  if (test_dataset) {
    std::vector<std::uint64_t> all(test_dataset->header.sample_count);
    std::iota(all.begin(), all.end(), 0);
    evaluate_split(scenario, *test_dataset, all, "test", &model, &report,
                   opts.workers);
  }
  return report;
}

std::string SizeSweepResult::csv() const {
  std::ostringstream os;
  echo_lines(os, config_echo);
  os << "size,dl_mean_sum_rate_bps_hz,pso_mean_sum_rate_bps_hz,"
        "eq_mean_sum_rate_bps_hz,dl_gap_to_pso_bps_hz\n";
  for (const auto& r : rows)
    os << r.size << "," << fmt(r.dl_mean) << "," << fmt(r.pso_mean) << ","
       << fmt(r.eq_mean) << "," << fmt(r.gap_to_pso) << "\n";
  return os.str();
}

SizeSweepResult sweep_dataset_size(const Scenario& scenario,
                                   const Dataset& master, const Dataset& test,
                                   const std::vector<std::uint64_t>& sizes,
                                   const TrainConfig& train_cfg,
                                   std::uint64_t shuffle_seed, int workers) {
  if (sizes.empty()) throw ConfigError("no sweep sizes given");
  if (!std::is_sorted(sizes.begin(), sizes.end()))
    throw ConfigError("sweep sizes must be ascending");
  if (sizes.back() > master.header.sample_count)
    throw ConfigError("sweep size " + std::to_string(sizes.back()) +
                      " exceeds master dataset size " +
                      std::to_string(master.header.sample_count));

  // One master shuffle; every sweep size takes a prefix, so smaller
  // training sets are strict subsets of larger ones.
  std::vector<std::uint64_t> order(master.header.sample_count);
  std::iota(order.begin(), order.end(), 0);
  {
    Rng rng(shuffle_seed);
    for (std::uint64_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[rng.below(i)]);
  }

  std::vector<std::uint64_t> test_all(test.header.sample_count);
  std::iota(test_all.begin(), test_all.end(), 0);

  SizeSweepResult result;
  echo_scenario(&result.config_echo, scenario);
  result.config_echo["shuffle_seed"] = std::to_string(shuffle_seed);
  result.config_echo["train_seed"] = std::to_string(train_cfg.seed);
  result.config_echo["loss"] =
      train_cfg.loss == LossKind::kMse ? "mse" : "mae";

  for (std::uint64_t size : sizes) {
    const auto n_train = static_cast<std::uint64_t>(
        std::llround(static_cast<double>(size) * 0.8));
    std::vector<std::uint64_t> train_idx(order.begin(),
                                         order.begin() + n_train);
    std::vector<std::uint64_t> val_idx(order.begin() + n_train,
                                       order.begin() + size);

    Eigen::MatrixXd tx, ty, vx, vy;
    dataset_matrices(master, train_idx, &tx, &ty);
    dataset_matrices(master, val_idx, &vx, &vy);
    const MlpModel model = train(tx, ty, vx, vy, train_cfg);

    ExperimentReport report;
    evaluate_split(scenario, test, test_all, "test", &model, &report,
                   workers);
    SizeSweepRow row;
    row.size = size;
    row.dl_mean = report.find(Method::kDlPa, "test").mean_sum_rate;
    row.pso_mean = report.find(Method::kPsoPa, "test").mean_sum_rate;
    row.eq_mean = report.find(Method::kEqPa, "test").mean_sum_rate;
    row.gap_to_pso = row.pso_mean - row.dl_mean;
    result.rows.push_back(row);
  }
  return result;
}

namespace {

/// Times the two allocators on prebuilt instances. The swarm side runs
/// pso_optimize per instance from the (effective, bb) pair, so its gain
/// precomputation is part of the measured work; the network side builds
/// features, runs one batched forward pass, and scales the outputs.
struct MethodTimes {
  double pso_seconds = 0.0;
  double dl_seconds = 0.0;
  double pso_mean_rate = 0.0;
  double dl_mean_rate = 0.0;
};

MethodTimes time_methods(const std::vector<EvalInstance>& instances,
                         const MlpModel& model, const PsoConfig& pso_cfg,
                         double sigma2, double p_total,
                         std::size_t warmup) {
  MethodTimes out;
  const std::size_t n = instances.size();
  warmup = std::min(warmup, n);

  for (std::size_t j = 0; j < warmup; ++j) {
    PsoConfig cfg = pso_cfg;
    cfg.seed = pso_cfg.seed + 1 + j;
    (void)pso_optimize(instances[j].effective, instances[j].bb, sigma2,
                       p_total, cfg);
  }
  std::vector<Eigen::VectorXd> pso_raw(n);
  const auto t0 = Clock::now();
  for (std::size_t j = 0; j < n; ++j) {
    PsoConfig cfg = pso_cfg;
    cfg.seed = pso_cfg.seed + 1 + j;
    pso_raw[j] = pso_optimize(instances[j].effective, instances[j].bb,
                              sigma2, p_total, cfg)
                     .best_raw;
  }
  out.pso_seconds = seconds_since(t0);

  const int l0 = model.input_size();
  auto dl_pass = [&](std::size_t count, std::vector<Eigen::VectorXd>* out_p) {
    Eigen::MatrixXd features(l0, count);
    for (std::size_t j = 0; j < count; ++j)
      features.col(j) =
          build_features(instances[j].effective, instances[j].bb).values;
    const Eigen::MatrixXd predicted = forward_batch(model, features);
    if (out_p)
      for (std::size_t j = 0; j < count; ++j)
        (*out_p)[j] = scaled_powers(predicted.col(j),
                                    instances[j].bb_power2, p_total);
  };
  std::vector<Eigen::VectorXd> dl_powers(n);
  dl_pass(warmup, nullptr);
  const auto t1 = Clock::now();
  dl_pass(n, &dl_powers);
  out.dl_seconds = seconds_since(t1);

  for (std::size_t j = 0; j < n; ++j) {
    out.dl_mean_rate += instance_sum_rate(instances[j], dl_powers[j],
                                          sigma2);
    out.pso_mean_rate += instance_sum_rate(
        instances[j],
        scaled_powers(pso_raw[j], instances[j].bb_power2, p_total), sigma2);
  }
  out.dl_mean_rate /= static_cast<double>(n);
  out.pso_mean_rate /= static_cast<double>(n);
  return out;
}

}  // namespace

std::string UserSweepResult::table_csv() const {
  std::ostringstream os;
  echo_lines(os, config_echo);
  os << "metric";
  for (const auto& r : rows) os << ",k=" << r.num_users;
  os << "\nrelative_sum_rate_pct";
  for (const auto& r : rows) os << "," << fmt(r.relative_sum_rate_pct, "%.4f");
  os << "\nrelative_runtime_pct";
  for (const auto& r : rows) os << "," << fmt(r.relative_runtime_pct, "%.4f");
  os << "\n";
  return os.str();
}

std::string UserSweepResult::detail_csv() const {
  std::ostringstream os;
  echo_lines(os, config_echo);
  os << "num_users,dl_mean_sum_rate_bps_hz,pso_mean_sum_rate_bps_hz,"
        "eq_mean_sum_rate_bps_hz,relative_sum_rate_pct,pso_seconds,"
        "dl_seconds,relative_runtime_pct\n";
  for (const auto& r : rows)
    os << r.num_users << "," << fmt(r.dl_mean) << "," << fmt(r.pso_mean)
       << "," << fmt(r.eq_mean) << "," << fmt(r.relative_sum_rate_pct, "%.4f")
       << "," << fmt(r.pso_seconds, "%.6f") << "," << fmt(r.dl_seconds, "%.6f")
       << "," << fmt(r.relative_runtime_pct, "%.4f") << "\n";
  return os.str();
}

UserSweepResult sweep_users(const Scenario& base_scenario,
                            const std::vector<int>& user_counts,
                            const UserSweepOptions& opts) {
  if (user_counts.empty()) throw ConfigError("no user counts given");
  const int groups = base_scenario.num_groups();
  for (int k : user_counts)
    if (k < 1 || k % groups != 0)
      throw ConfigError("user count " + std::to_string(k) +
                        " is not divisible by " + std::to_string(groups) +
                        " groups");

  UserSweepResult result;
  echo_scenario(&result.config_echo, base_scenario);
  result.config_echo["base_seed"] = std::to_string(opts.base_seed);
  result.config_echo["train_size"] = std::to_string(opts.train_size);
  result.config_echo["test_size"] = std::to_string(opts.test_size);
  result.config_echo["loss"] =
      opts.train_cfg.loss == LossKind::kMse ? "mse" : "mae";

  for (int k : user_counts) {
    Scenario scenario = base_scenario;
    for (auto& g : scenario.groups) g.users = k / groups;
    scenario.validate();

    const Dataset train_ds =
        generate_dataset(scenario, opts.train_size, opts.pso_cfg,
                         opts.base_seed, opts.workers);
    PsoConfig test_pso = opts.pso_cfg;
    test_pso.seed = opts.pso_cfg.seed + test_seed_offset();
    const Dataset test_ds =
        generate_dataset(scenario, opts.test_size, test_pso,
                         opts.base_seed + test_seed_offset(), opts.workers);

    const SplitIndices split =
        split_indices(train_ds.header.sample_count, 0.8, opts.train_cfg.seed);
    Eigen::MatrixXd tx, ty, vx, vy;
    dataset_matrices(train_ds, split.train, &tx, &ty);
    dataset_matrices(train_ds, split.validation, &vx, &vy);
    const MlpModel model = train(tx, ty, vx, vy, opts.train_cfg);

    std::vector<std::uint64_t> test_all(test_ds.header.sample_count);
    std::iota(test_all.begin(), test_all.end(), 0);
    ExperimentReport report;
    evaluate_split(scenario, test_ds, test_all, "test", &model, &report, 1);

    const auto instances =
        rebuild_instances(scenario, test_ds, test_all, opts.workers);
    const MethodTimes times =
        time_methods(instances, model, opts.pso_cfg,
                     scenario.link.noise_power_mw,
                     scenario.link.total_power_mw, 16);

    UserSweepRow row;
    row.num_users = k;
    row.dl_mean = report.find(Method::kDlPa, "test").mean_sum_rate;
    row.pso_mean = report.find(Method::kPsoPa, "test").mean_sum_rate;
    row.eq_mean = report.find(Method::kEqPa, "test").mean_sum_rate;
    row.relative_sum_rate_pct = 100.0 * row.dl_mean / row.pso_mean;
    row.pso_seconds = times.pso_seconds;
    row.dl_seconds = times.dl_seconds;
    row.relative_runtime_pct = 100.0 * times.dl_seconds / times.pso_seconds;
    result.rows.push_back(row);
  }
  return result;
}

std::string RuntimeBenchResult::csv() const {
  std::ostringstream os;
  echo_lines(os, config_echo);
  os << "realizations,num_users,workers,pso_total_seconds,dl_total_seconds,"
        "dl_over_pso_pct,pso_ms_per_realization,dl_ms_per_realization\n";
  os << realizations << "," << num_users << "," << workers << ","
     << fmt(pso_total_seconds, "%.6f") << "," << fmt(dl_total_seconds, "%.6f")
     << "," << fmt(dl_over_pso_pct, "%.4f") << ","
     << fmt(1e3 * pso_total_seconds / realizations, "%.6f") << ","
     << fmt(1e3 * dl_total_seconds / realizations, "%.6f") << "\n";
  return os.str();
}

RuntimeBenchResult bench_runtime(const Scenario& scenario,
                                 const MlpModel& model,
                                 const PsoConfig& pso_cfg,
                                 std::uint64_t realizations,
                                 std::uint64_t base_seed, int workers) {
  if (realizations == 0) throw ConfigError("need at least one realization");
  if (model.input_size() !=
      feature_size(design_rf_stage(scenario).num_chains(),
                   scenario.num_users()))
    throw ValidationError("model does not match the scenario shape");

  const RfDesign design = design_rf_stage(scenario);
  std::vector<EvalInstance> instances(realizations);
  detail::parallel_for_index(realizations, workers, [&](std::uint64_t i) {
    const ChannelRealization realization =
        sample_realization(scenario, base_seed + 1 + i);
    const HybridPrecoder hp =
        complete_precoder(design, realization, scenario.link);
    EvalInstance inst;
    inst.effective = hp.effective;
    inst.bb = hp.bb;
    inst.gains2 = effective_gains(hp.effective, hp.bb);
    inst.bb_power2 = bb_column_power(hp.bb);
    instances[i] = std::move(inst);
  });

  const MethodTimes times =
      time_methods(instances, model, pso_cfg, scenario.link.noise_power_mw,
                   scenario.link.total_power_mw, 16);

  RuntimeBenchResult result;
  result.realizations = realizations;
  result.num_users = scenario.num_users();
  result.workers = 1;  // the timed loops are single-threaded by design
  result.pso_total_seconds = times.pso_seconds;
  result.dl_total_seconds = times.dl_seconds;
  result.dl_over_pso_pct = 100.0 * times.dl_seconds / times.pso_seconds;
  result.dl_mean_sum_rate = times.dl_mean_rate;
  result.pso_mean_sum_rate = times.pso_mean_rate;
  echo_scenario(&result.config_echo, scenario);
  result.config_echo["base_seed"] = std::to_string(base_seed);
  result.config_echo["pso_seed"] = std::to_string(pso_cfg.seed);
  return result;
}

std::uint64_t test_seed_offset() { return 10'000'000ull; }

}  // namespace dlpa
