#pragma once

#include <Eigen/Dense>

namespace dlpa {

/// Per-user downlink powers in milliwatts, plus the raw (pre-scaling)
/// values they were derived from.
struct PowerAllocation {
  Eigen::VectorXd powers_mw;
  Eigen::VectorXd raw;
};

/// |h_k^T F b_t|^2 for all (k, t); the only channel statistic the power
/// allocation stage needs.
Eigen::MatrixXd effective_gains(const Eigen::MatrixXcd& effective,
                                const Eigen::MatrixXcd& bb);

/// Squared column norms b_t^H b_t of the baseband precoder.
Eigen::VectorXd bb_column_power(const Eigen::MatrixXcd& bb);

/// SINR_k = p_k g_kk / (sum_{t != k} p_t g_kt + sigma2) on precomputed
/// squared gains.
Eigen::VectorXd sinr_per_user(const Eigen::MatrixXd& gains2,
                              const Eigen::VectorXd& powers_mw,
                              double sigma2);

/// Convenience overload on the raw ingredients.
Eigen::VectorXd sinr_per_user(const Eigen::MatrixXcd& channels,
                              const Eigen::MatrixXcd& rf,
                              const Eigen::MatrixXcd& bb,
                              const PowerAllocation& alloc, double sigma2);

/// sum_k log2(1 + SINR_k), in bps/Hz.
double sum_rate(const Eigen::VectorXd& sinrs);

/// Scales nonnegative raw values onto the full power budget:
///   p_k = raw_k * p_total / sum_t raw_t b_t^H b_t,
/// so consumption equals p_total exactly. Invariant under positive
/// scaling of raw. Throws ValidationError when the denominator vanishes.
PowerAllocation scale_to_full_power(const Eigen::VectorXd& raw,
                                    const Eigen::MatrixXcd& bb,
                                    double p_total);

struct PowerConstraintReport {
  double consumed_mw = 0.0;          // sum_k p_k b_k^H F^H F b_k
  double consumed_mw_unitary = 0.0;  // sum_k p_k b_k^H b_k
  bool feasible = false;
};

/// Evaluates the total-power constraint both through the full quadratic
/// form and through the unitary-RF shortcut; the two agree whenever F^H F
/// is the identity. Feasible means consumed <= p_total * (1 + 1e-9).
PowerConstraintReport check_power_constraint(const PowerAllocation& alloc,
                                             const Eigen::MatrixXcd& bb,
                                             const Eigen::MatrixXcd& rf,
                                             double p_total);

}  // namespace dlpa
