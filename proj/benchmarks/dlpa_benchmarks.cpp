#include <benchmark/benchmark.h>

#include "dlpa/dataset.hpp"
#include "dlpa/experiments.hpp"
#include "dlpa/mlp.hpp"
#include "dlpa/precoding.hpp"
#include "dlpa/pso.hpp"
#include "dlpa/scenario.hpp"

namespace {

dlpa::Scenario desk_scenario(int users) {
  dlpa::Scenario s;
  s.array = {8, 8, 0.5};
  s.groups = {{60.0, 21.0, 15.0, 11.0, users}};
  return s;
}

void BM_SampleRealization(benchmark::State& state) {
  const dlpa::Scenario s = desk_scenario(static_cast<int>(state.range(0)));
  std::uint64_t seed = 1;
  for (auto _ : state)
    benchmark::DoNotOptimize(dlpa::sample_realization(s, ++seed));
}
BENCHMARK(BM_SampleRealization)->Arg(3)->Arg(6);

void BM_CompletePrecoder(benchmark::State& state) {
  const dlpa::Scenario s = desk_scenario(3);
  const dlpa::RfDesign design = dlpa::design_rf_stage(s);
  const auto realization = dlpa::sample_realization(s, 7);
  for (auto _ : state)
    benchmark::DoNotOptimize(
        dlpa::complete_precoder(design, realization, s.link));
}
BENCHMARK(BM_CompletePrecoder);

void BM_PsoOptimize(benchmark::State& state) {
  const dlpa::Scenario s = desk_scenario(static_cast<int>(state.range(0)));
  const dlpa::RfDesign design = dlpa::design_rf_stage(s);
  const auto realization = dlpa::sample_realization(s, 7);
  const auto hp = dlpa::complete_precoder(design, realization, s.link);
  dlpa::PsoConfig cfg;
  for (auto _ : state) {
    ++cfg.seed;
    benchmark::DoNotOptimize(dlpa::pso_optimize(
        hp.effective, hp.bb, s.link.noise_power_mw, s.link.total_power_mw,
        cfg));
  }
}
BENCHMARK(BM_PsoOptimize)->Arg(1)->Arg(3)->Arg(6);

void BM_MlpForwardBatch(benchmark::State& state) {
  const int batch = static_cast<int>(state.range(0));
  const int l0 = dlpa::feature_size(4, 3);
  const dlpa::MlpModel model =
      dlpa::init_model(l0, {1024, 512, 256}, 3, 11);
  const Eigen::MatrixXd inputs = Eigen::MatrixXd::Random(l0, batch);
  for (auto _ : state)
    benchmark::DoNotOptimize(dlpa::forward_batch(model, inputs));
  state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(BM_MlpForwardBatch)->Arg(1)->Arg(64)->Arg(1000);

void BM_TrainStep(benchmark::State& state) {
  const int l0 = dlpa::feature_size(4, 3);
  const dlpa::MlpModel model =
      dlpa::init_model(l0, {1024, 512, 256}, 3, 11);
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(l0, 32);
  const Eigen::MatrixXd y =
      (Eigen::MatrixXd::Random(3, 32).array() * 0.49 + 0.51).matrix();
  for (auto _ : state)
    benchmark::DoNotOptimize(
        dlpa::backward(model, x, y, dlpa::LossKind::kMse));
}
BENCHMARK(BM_TrainStep);

}  // namespace

BENCHMARK_MAIN();
