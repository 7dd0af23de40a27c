#pragma once

#include <Eigen/Dense>
#include <vector>

#include "dlpa/channel.hpp"
#include "dlpa/scenario.hpp"

namespace dlpa {

/// The orthogonal quantized angle grid: lambda_x[u] = -1 + (2u-1)/mx for
/// u = 1..mx, likewise lambda_y. With half-wavelength spacing the steering
/// vectors of distinct grid pairs are exactly orthogonal.
struct QuantizedAngleGrid {
  std::vector<double> lambda_x;
  std::vector<double> lambda_y;
};

QuantizedAngleGrid quantized_grid(const ArrayGeometry& geom);

/// One selected grid pair; u/c are 0-based indices into the grid axes.
struct AnglePair {
  double lambda_x = 0.0;
  double lambda_y = 0.0;
  int u = 0;
  int c = 0;
};

/// Direction-cosine bounding box of a group's angular support, computed
/// from a dense sample of the (elevation, azimuth) rectangle (at least
/// 64 points per axis plus the interior extrema of sin/cos, so the box
/// is exact for every support orientation). Elevation is clamped to
/// [1, 179] degrees first.
struct SupportBox {
  double x_lo, x_hi, y_lo, y_hi;
  double center_x, center_y;  // image of the mean angles
};

SupportBox support_box(const GroupAngularSupport& support);

/// Grid pairs covering one group's support: every pair whose lambda_x
/// falls in the support's x interval and lambda_y in its y interval,
/// each interval widened by `margin` on both sides. Deterministic,
/// ordered by (u, c).
///
/// Throws ConfigError (naming the group, when group_index >= 0) if the
/// selection is empty.
std::vector<AnglePair> select_group_pairs(const QuantizedAngleGrid& grid,
                                          const GroupAngularSupport& support,
                                          const ArrayGeometry& geom,
                                          double margin = 0.0,
                                          int group_index = -1);

/// Per-group selections with overlap resolution: a pair claimed by more
/// than one group goes to the group whose support center is nearest in
/// the direction-cosine plane (ties to the lower group index).
std::vector<std::vector<AnglePair>> select_pairs_per_group(
    const QuantizedAngleGrid& grid,
    const std::vector<GroupAngularSupport>& groups, const ArrayGeometry& geom,
    double margin = 0.0);

/// Column range of one group inside the RF beamformer.
struct GroupBlock {
  int start = 0;
  int count = 0;
};

/// RF beamformer built from per-group pair selections: the column for
/// pair (lx, ly) is conj(phase_response(lx, ly)) / sqrt(M), columns laid
/// out contiguously per group. Every entry has modulus 1/sqrt(M) and the
/// matrix is unitary on its columns.
///
/// Throws ConfigError if the total column count is below the user count
/// (fewer RF chains than users).
Eigen::MatrixXcd build_rf_beamformer(
    const std::vector<std::vector<AnglePair>>& selections,
    const ArrayGeometry& geom, int num_users,
    std::vector<GroupBlock>* blocks = nullptr);

/// Effective channel seen by the baseband stage: H * F.
Eigen::MatrixXcd effective_channel(const Eigen::MatrixXcd& channels,
                                   const Eigen::MatrixXcd& rf);

/// Regularized zero-forcing baseband precoder,
///   B = (H~^H H~ + K sigma2/p_total I)^-1 H~^H,
/// evaluated through the algebraically identical K-by-K system
///   B = H~^H (H~ H~^H + K sigma2/p_total I)^-1,
/// which stays well conditioned when the RF stage has more chains than
/// there are users. Throws ValidationError if the system is singular
/// (possible only with zero regularization).
Eigen::MatrixXcd rzf_precoder(const Eigen::MatrixXcd& effective,
                              int num_users, double sigma2, double p_total);

/// The scenario-level RF stage: fixed across realizations as long as the
/// group supports are fixed.
struct RfDesign {
  Eigen::MatrixXcd rf;                  // M x N_RF
  std::vector<GroupBlock> group_blocks; // one per group
  int num_chains() const { return static_cast<int>(rf.cols()); }
};

RfDesign design_rf_stage(const Scenario& scenario, double margin = 0.0);

/// Full two-stage precoder for one realization.
struct HybridPrecoder {
  Eigen::MatrixXcd rf;         // M x N_RF
  Eigen::MatrixXcd bb;         // N_RF x K
  Eigen::MatrixXcd effective;  // K x N_RF
  std::vector<GroupBlock> group_blocks;
};

HybridPrecoder complete_precoder(const RfDesign& design,
                                 const ChannelRealization& realization,
                                 const LinkBudget& link);

}  // namespace dlpa
