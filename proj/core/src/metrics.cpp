#include "dlpa/metrics.hpp"

#include <cmath>

#include "dlpa/errors.hpp"

namespace dlpa {

Eigen::MatrixXd effective_gains(const Eigen::MatrixXcd& effective,
                                const Eigen::MatrixXcd& bb) {
  if (effective.cols() != bb.rows())
    throw ValidationError("effective channel / precoder dimension mismatch");
  return (effective * bb).cwiseAbs2();
}

Eigen::VectorXd bb_column_power(const Eigen::MatrixXcd& bb) {
  return bb.colwise().squaredNorm().real().transpose();
}

Eigen::VectorXd sinr_per_user(const Eigen::MatrixXd& gains2,
                              const Eigen::VectorXd& powers_mw,
                              double sigma2) {
  const int k = static_cast<int>(gains2.rows());
  Eigen::VectorXd sinr(k);
  for (int i = 0; i < k; ++i) {
    double interference = sigma2;
    for (int t = 0; t < k; ++t)
      if (t != i) interference += powers_mw[t] * gains2(i, t);
    sinr[i] = powers_mw[i] * gains2(i, i) / interference;
  }
  return sinr;
}

Eigen::VectorXd sinr_per_user(const Eigen::MatrixXcd& channels,
                              const Eigen::MatrixXcd& rf,
                              const Eigen::MatrixXcd& bb,
                              const PowerAllocation& alloc, double sigma2) {
  return sinr_per_user(effective_gains(channels * rf, bb), alloc.powers_mw,
                       sigma2);
}

double sum_rate(const Eigen::VectorXd& sinrs) {
  double rate = 0.0;
  for (int i = 0; i < sinrs.size(); ++i) rate += std::log2(1.0 + sinrs[i]);
  return rate;
}

PowerAllocation scale_to_full_power(const Eigen::VectorXd& raw,
                                    const Eigen::MatrixXcd& bb,
                                    double p_total) {
  const Eigen::VectorXd col_power = bb_column_power(bb);
  if (raw.size() != col_power.size())
    throw ValidationError("raw power vector length mismatch");
  const double denom = raw.dot(col_power);
  if (!(denom > 0.0))
    throw ValidationError("cannot scale powers: zero consumption direction");
  PowerAllocation alloc;
  alloc.raw = raw;
  alloc.powers_mw = raw * (p_total / denom);
  return alloc;
}

PowerConstraintReport check_power_constraint(const PowerAllocation& alloc,
                                             const Eigen::MatrixXcd& bb,
                                             const Eigen::MatrixXcd& rf,
                                             double p_total) {
  PowerConstraintReport report;
  const Eigen::MatrixXcd fb = rf * bb;  // M x K
  for (int k = 0; k < bb.cols(); ++k) {
    report.consumed_mw += alloc.powers_mw[k] * fb.col(k).squaredNorm();
    report.consumed_mw_unitary +=
        alloc.powers_mw[k] * bb.col(k).squaredNorm();
  }
  report.feasible = report.consumed_mw <= p_total * (1.0 + 1e-9);
  return report;
}

}  // namespace dlpa
