#include "dlpa/pso.hpp"

#include <algorithm>
#include <cmath>

#include "dlpa/errors.hpp"
#include "dlpa/rng.hpp"

namespace dlpa {

namespace {

/// Lower clamp for particle coordinates. Muting a user is often optimal,
/// but labels and predictions must stay strictly positive; a 1e-6 power
/// share changes the achieved sum-rate by far less than any tolerance
/// used anywhere.
constexpr double kRawFloor = 1e-6;

/// Sum-rate of a raw direction after exact full-power scaling. Returns 0
/// for the degenerate all-zero direction.
double fitness_of(const Eigen::VectorXd& raw, const Eigen::MatrixXd& gains2,
                  const Eigen::VectorXd& bb_power2, double sigma2,
                  double p_total) {
  const double denom = raw.dot(bb_power2);
  if (!(denom > 0.0)) return 0.0;
  const double scale = p_total / denom;
  const int k = static_cast<int>(raw.size());
  double rate = 0.0;
  for (int i = 0; i < k; ++i) {
    double interference = sigma2;
    for (int t = 0; t < k; ++t)
      if (t != i) interference += scale * raw[t] * gains2(i, t);
    rate += std::log2(1.0 + scale * raw[i] * gains2(i, i) / interference);
  }
  return rate;
}

}  // namespace

void PsoConfig::validate() const {
  if (swarm_size < 2) throw ConfigError("swarm_size must be >= 2");
  if (max_iters < 1) throw ConfigError("max_iters must be >= 1");
  if (!(inertia_end > 0 && inertia_end <= inertia_start &&
        inertia_start < 1.5))
    throw ConfigError("need 0 < inertia_end <= inertia_start < 1.5");
  if (cognitive_c1 <= 0 || social_c2 <= 0)
    throw ConfigError("acceleration coefficients must be positive");
  if (velocity_clamp <= 0 || velocity_clamp > 1)
    throw ConfigError("velocity_clamp must lie in (0, 1]");
  if (stall_iters < 1) throw ConfigError("stall_iters must be >= 1");
}

PsoResult pso_optimize(const Eigen::MatrixXd& gains2,
                       const Eigen::VectorXd& bb_power2, double sigma2,
                       double p_total, const PsoConfig& cfg) {
  cfg.validate();
  const int k = static_cast<int>(bb_power2.size());
  if (k < 1 || gains2.rows() != k || gains2.cols() != k)
    throw ValidationError("gain matrix / precoder power shape mismatch");

  const int n = cfg.swarm_size;
  const double vmax = cfg.velocity_clamp;  // search range is [0, 1]

  Eigen::MatrixXd pos(k, n), vel(k, n), best_pos(k, n);
  Eigen::VectorXd best_fit(n);

  Rng rng(cfg.seed);
  // Particle 0 sits at the all-ones (equal allocation) point so the
  // result can never lose to the equal baseline; draw order is
  // positions (particles 1..n-1), then all velocities.
  pos.col(0).setOnes();
  for (int i = 1; i < n; ++i)
    for (int d = 0; d < k; ++d)
      pos(d, i) = std::max(rng.uniform(), kRawFloor);
  for (int i = 0; i < n; ++i)
    for (int d = 0; d < k; ++d) vel(d, i) = rng.uniform(-vmax, vmax);

  int global_best = 0;
  for (int i = 0; i < n; ++i) {
    best_pos.col(i) = pos.col(i);
    best_fit[i] = fitness_of(pos.col(i), gains2, bb_power2, sigma2, p_total);
    if (best_fit[i] > best_fit[global_best]) global_best = i;
  }

  PsoResult result;
  result.fitness_trace.reserve(cfg.max_iters);
  double gbest_fit = best_fit[global_best];
  Eigen::VectorXd gbest = best_pos.col(global_best);

  int since_improvement = 0;
  int iter = 0;
  Eigen::VectorXd candidate(k);
  for (; iter < cfg.max_iters; ++iter) {
    const double w =
        cfg.max_iters > 1
            ? cfg.inertia_start - (cfg.inertia_start - cfg.inertia_end) *
                                      iter / (cfg.max_iters - 1)
            : cfg.inertia_end;
    bool improved = false;
    for (int i = 0; i < n; ++i) {
      for (int d = 0; d < k; ++d) {
        const double r1 = rng.uniform();
        const double r2 = rng.uniform();
        double v = w * vel(d, i) +
                   cfg.cognitive_c1 * r1 * (best_pos(d, i) - pos(d, i)) +
                   cfg.social_c2 * r2 * (gbest[d] - pos(d, i));
        v = std::clamp(v, -vmax, vmax);
        vel(d, i) = v;
        pos(d, i) = std::clamp(pos(d, i) + v, kRawFloor, 1.0);
      }
      candidate = pos.col(i);
      const double fit =
          fitness_of(candidate, gains2, bb_power2, sigma2, p_total);
      if (fit > best_fit[i]) {
        best_fit[i] = fit;
        best_pos.col(i) = candidate;
        if (fit > gbest_fit + 1e-9) improved = true;
        if (fit > gbest_fit) {
          gbest_fit = fit;
          gbest = candidate;
        }
      }
    }
    result.fitness_trace.push_back(gbest_fit);
    since_improvement = improved ? 0 : since_improvement + 1;
    if (since_improvement >= cfg.stall_iters) {
      ++iter;
      break;
    }
  }

  result.best_raw = gbest;
  result.best_fitness = gbest_fit;
  result.iterations_used = iter;
  return result;
}

PsoResult pso_optimize(const Eigen::MatrixXcd& effective,
                       const Eigen::MatrixXcd& bb, double sigma2,
                       double p_total, const PsoConfig& cfg) {
  return pso_optimize(effective_gains(effective, bb), bb_column_power(bb),
                      sigma2, p_total, cfg);
}

PowerAllocation equal_power_allocation(const Eigen::MatrixXcd& bb,
                                       double p_total) {
  return scale_to_full_power(Eigen::VectorXd::Ones(bb.cols()), bb, p_total);
}

}  // namespace dlpa
