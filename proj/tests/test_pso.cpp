#include <doctest.h>

#include <cmath>

#include "dlpa/errors.hpp"
#include "dlpa/precoding.hpp"
#include "dlpa/pso.hpp"
#include "test_helpers.hpp"

using namespace dlpa;
using dlpa::testing::desk_scenario;
using dlpa::testing::random_complex;

namespace {

struct Instance {
  Eigen::MatrixXcd effective, bb;
  Eigen::MatrixXd gains2;
  Eigen::VectorXd bp2;
  double sigma2, p_total;
};

Instance desk_instance(int users, std::uint64_t seed) {
  const Scenario s = desk_scenario(users);
  const RfDesign design = design_rf_stage(s);
  const auto realization = sample_realization(s, seed);
  const auto hp = complete_precoder(design, realization, s.link);
  return {hp.effective, hp.bb, effective_gains(hp.effective, hp.bb),
          bb_column_power(hp.bb), s.link.noise_power_mw,
          s.link.total_power_mw};
}

double rate_of_raw(const Instance& inst, const Eigen::VectorXd& raw) {
  const PowerAllocation alloc =
      scale_to_full_power(raw, inst.bb, inst.p_total);
  return sum_rate(sinr_per_user(inst.gains2, alloc.powers_mw, inst.sigma2));
}

/// Brute-force oracle for two users: 1001 budget splits.
double grid_best(const Instance& inst) {
  double best = 0.0;
  for (int i = 0; i <= 1000; ++i) {
    Eigen::VectorXd raw(2);
    raw << i / 1000.0, 1.0 - i / 1000.0;
    if (raw.maxCoeff() <= 0.0) continue;
    best = std::max(best, rate_of_raw(inst, raw));
  }
  return best;
}

}  // namespace

TEST_CASE("single user matches the closed-form rate") {
  const Instance inst = desk_instance(1, 42);
  PsoConfig cfg;
  cfg.seed = 7;
  const PsoResult result =
      pso_optimize(inst.effective, inst.bb, inst.sigma2, inst.p_total, cfg);
  // Full power is optimal and the direction is trivial.
  const double closed = std::log2(
      1.0 + inst.p_total / inst.bp2[0] * inst.gains2(0, 0) / inst.sigma2);
  CHECK(result.best_fitness == doctest::Approx(closed).epsilon(1e-12));
}

TEST_CASE("two-user result reaches the grid oracle") {
  for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
    const Instance inst = desk_instance(2, 100 + seed);
    PsoConfig cfg;
    cfg.seed = seed;
    const PsoResult result = pso_optimize(inst.effective, inst.bb,
                                          inst.sigma2, inst.p_total, cfg);
    CHECK(result.best_fitness >= grid_best(inst) - 1e-3);
  }
}

TEST_CASE("result dominates equal allocation") {
  for (std::uint64_t seed : {11, 12, 13, 14, 15, 16, 17, 18}) {
    const Instance inst = desk_instance(3, seed);
    PsoConfig cfg;
    cfg.seed = seed;
    const PsoResult result = pso_optimize(inst.effective, inst.bb,
                                          inst.sigma2, inst.p_total, cfg);
    const double eq_rate =
        rate_of_raw(inst, Eigen::VectorXd::Ones(3));
    CHECK(result.best_fitness >= eq_rate - 1e-12);
  }
}

TEST_CASE("equal allocation baseline") {
  Rng rng(3);
  const Eigen::MatrixXcd bb = random_complex(5, 3, rng);
  const PowerAllocation alloc = equal_power_allocation(bb, 100.0);
  CHECK(alloc.powers_mw.dot(bb_column_power(bb)) ==
        doctest::Approx(100.0).epsilon(1e-10));
  // Orthonormal columns split evenly; a single user absorbs everything.
  const PowerAllocation even =
      equal_power_allocation(Eigen::MatrixXcd::Identity(4, 4), 100.0);
  for (int i = 0; i < 4; ++i)
    CHECK(even.powers_mw[i] == doctest::Approx(25.0));
  Eigen::MatrixXcd one(2, 1);
  one << std::complex<double>(1.0, 1.0), std::complex<double>(0.0, 1.0);
  const PowerAllocation single = equal_power_allocation(one, 100.0);
  CHECK(single.powers_mw[0] == doctest::Approx(100.0 / 3.0));
}

TEST_CASE("fitness trace is monotone and consistent with the result") {
  const Instance inst = desk_instance(3, 77);
  PsoConfig cfg;
  cfg.seed = 5;
  const PsoResult result =
      pso_optimize(inst.effective, inst.bb, inst.sigma2, inst.p_total, cfg);
  REQUIRE(!result.fitness_trace.empty());
  for (std::size_t i = 1; i < result.fitness_trace.size(); ++i)
    CHECK(result.fitness_trace[i] >= result.fitness_trace[i - 1]);
  CHECK(result.fitness_trace.back() == result.best_fitness);
  CHECK(static_cast<int>(result.fitness_trace.size()) ==
        result.iterations_used);
  // Re-evaluating the reported point reproduces the reported fitness.
  CHECK(rate_of_raw(inst, result.best_raw) ==
        doctest::Approx(result.best_fitness).epsilon(1e-12));
  CHECK(result.best_raw.minCoeff() >= 0.0);
  CHECK(result.best_raw.maxCoeff() <= 1.0);
}

TEST_CASE("deterministic given the seed, spread small across seeds") {
  const Instance inst = desk_instance(3, 55);
  PsoConfig cfg;
  cfg.seed = 9;
  const PsoResult a =
      pso_optimize(inst.effective, inst.bb, inst.sigma2, inst.p_total, cfg);
  const PsoResult b =
      pso_optimize(inst.effective, inst.bb, inst.sigma2, inst.p_total, cfg);
  CHECK(a.best_fitness == b.best_fitness);
  CHECK(a.best_raw.cwiseEqual(b.best_raw).all());
  CHECK(a.iterations_used == b.iterations_used);

  double lo = a.best_fitness, hi = a.best_fitness;
  for (std::uint64_t seed : {10, 11, 12, 13}) {
    PsoConfig c2 = cfg;
    c2.seed = seed;
    const double fit =
        pso_optimize(inst.effective, inst.bb, inst.sigma2, inst.p_total, c2)
            .best_fitness;
    lo = std::min(lo, fit);
    hi = std::max(hi, fit);
  }
  CHECK((hi - lo) / hi < 1e-3);  // five-seed self-consistency
}

TEST_CASE("stall cutoff ends the run early") {
  const Instance inst = desk_instance(2, 5);
  PsoConfig cfg;
  cfg.seed = 3;
  cfg.stall_iters = 10;
  const PsoResult result =
      pso_optimize(inst.effective, inst.bb, inst.sigma2, inst.p_total, cfg);
  CHECK(result.iterations_used < cfg.max_iters);
}

TEST_CASE("config validation") {
  PsoConfig cfg;
  cfg.swarm_size = 1;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.inertia_end = 0.95;  // above inertia_start
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.velocity_clamp = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
