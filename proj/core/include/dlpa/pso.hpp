#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "dlpa/metrics.hpp"

namespace dlpa {

/// Global-best particle swarm hyperparameters. The defaults are the
/// canonical choices for a constrained continuous search of this size.
struct PsoConfig {
  int swarm_size = 50;
  int max_iters = 500;
  double inertia_start = 0.9;
  double inertia_end = 0.4;
  double cognitive_c1 = 2.0;
  double social_c2 = 2.0;
  double velocity_clamp = 0.2;  // fraction of the [0,1] search range
  int stall_iters = 75;         // stop after this many non-improving iters
  std::uint64_t seed = 1;

  void validate() const;  // throws ConfigError
};

struct PsoResult {
  Eigen::VectorXd best_raw;          // in [0,1]^K, pre-normalization
  double best_fitness = 0.0;         // bps/Hz
  int iterations_used = 0;
  std::vector<double> fitness_trace; // best-so-far per iteration
};

/// Maximizes the sum-rate over per-user powers for a fixed precoder.
///
/// Particles live in [0,1]^K (floored at 1e-6 so downstream label scaling
/// stays strictly positive; the rate impact of the floor is negligible);
/// a particle's fitness is the sum-rate of its full-power scaling
/// (uniformly raising all powers raises every SINR, so the optimum spends
/// the whole budget and only the direction matters). Particle 0 starts at
/// the all-ones point, which makes the result dominate equal allocation
/// on every instance. Velocity/position updates are the standard
/// global-best rule with linearly decaying inertia; deterministic given
/// cfg.seed.
PsoResult pso_optimize(const Eigen::MatrixXcd& effective,
                       const Eigen::MatrixXcd& bb, double sigma2,
                       double p_total, const PsoConfig& cfg);

/// Same search on precomputed squared gains and column powers.
PsoResult pso_optimize(const Eigen::MatrixXd& gains2,
                       const Eigen::VectorXd& bb_power2, double sigma2,
                       double p_total, const PsoConfig& cfg);

/// Equal allocation baseline: all-ones raw vector scaled onto the full
/// power budget.
PowerAllocation equal_power_allocation(const Eigen::MatrixXcd& bb,
                                       double p_total);

}  // namespace dlpa
