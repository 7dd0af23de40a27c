#pragma once

#include <Eigen/Dense>

namespace dlpa {

/// Max-abs scaling coefficients of one feature vector.
struct FeatureScaling {
  double alpha1 = 0.0;  // 1 / max |Re,Im| over the effective channel rows
  double alpha2 = 0.0;  // 1 / max |Re,Im| over the precoder columns
  double alpha3 = 0.0;  // 1 / max_k b_k^H b_k
  double alpha4 = 0.0;  //     min_k b_k^H b_k
};

/// Network input of length (4 N_RF + 2) K: K blocks of scaled effective
/// channel real/imag parts, K blocks of scaled precoder real/imag parts,
/// the K scaled precoder gains, and the K scaled inverse gains. Every
/// entry lies in [-1, 1] and both max-abs blocks attain magnitude 1.
struct FeatureVector {
  Eigen::VectorXd values;
  FeatureScaling scaling;
};

int feature_size(int num_chains, int num_users);

/// Assembles and scales the feature vector for one realization.
/// Throws ValidationError on all-zero inputs (degenerate scaling).
FeatureVector build_features(const Eigen::MatrixXcd& effective,
                             const Eigen::MatrixXcd& bb);

/// Max-abs label scaling: p_bar_k = p_k / max_t p_t, so labels lie in
/// (0, 1] with the maximum exactly 1 and the argmax preserved.
/// Throws ValidationError unless the maximum is strictly positive.
Eigen::VectorXd scale_labels(const Eigen::VectorXd& p_opt);

}  // namespace dlpa
