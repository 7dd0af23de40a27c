#include "dlpa/features.hpp"

#include <algorithm>
#include <cmath>

#include "dlpa/errors.hpp"

namespace dlpa {

int feature_size(int num_chains, int num_users) {
  return (4 * num_chains + 2) * num_users;
}

FeatureVector build_features(const Eigen::MatrixXcd& effective,
                             const Eigen::MatrixXcd& bb) {
  const int k = static_cast<int>(effective.rows());
  const int n = static_cast<int>(effective.cols());
  if (bb.rows() != n || bb.cols() != k)
    throw ValidationError("effective channel / precoder dimension mismatch");

  const double h_max = std::max(effective.real().cwiseAbs().maxCoeff(),
                                effective.imag().cwiseAbs().maxCoeff());
  const double b_max = std::max(bb.real().cwiseAbs().maxCoeff(),
                                bb.imag().cwiseAbs().maxCoeff());
  const Eigen::VectorXd gains = bb.colwise().squaredNorm().real().transpose();
  if (!(h_max > 0.0) || !(b_max > 0.0) || !(gains.maxCoeff() > 0.0))
    throw ValidationError("degenerate feature scaling: all-zero input");

  FeatureVector fv;
  fv.scaling.alpha1 = 1.0 / h_max;
  fv.scaling.alpha2 = 1.0 / b_max;
  fv.scaling.alpha3 = 1.0 / gains.maxCoeff();
  fv.scaling.alpha4 = gains.minCoeff();

  fv.values.resize(feature_size(n, k));
  int at = 0;
  for (int u = 0; u < k; ++u) {
    fv.values.segment(at, n) = fv.scaling.alpha1 * effective.row(u).real();
    fv.values.segment(at + n, n) =
        fv.scaling.alpha1 * effective.row(u).imag();
    at += 2 * n;
  }
  for (int u = 0; u < k; ++u) {
    fv.values.segment(at, n) = fv.scaling.alpha2 * bb.col(u).real();
    fv.values.segment(at + n, n) = fv.scaling.alpha2 * bb.col(u).imag();
    at += 2 * n;
  }
  fv.values.segment(at, k) = fv.scaling.alpha3 * gains;
  at += k;
  fv.values.segment(at, k) = fv.scaling.alpha4 * gains.cwiseInverse();
  return fv;
}

Eigen::VectorXd scale_labels(const Eigen::VectorXd& p_opt) {
  if (p_opt.size() == 0) throw ValidationError("empty power vector");
  const double top = p_opt.maxCoeff();
  if (!(top > 0.0))
    throw ValidationError("label scaling needs a positive maximum power");
  return p_opt / top;
}

}  // namespace dlpa
