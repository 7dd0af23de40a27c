#include "dlpa/precoding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "dlpa/errors.hpp"

namespace dlpa {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr int kSupportSamplesPerAxis = 96;

}  // namespace

QuantizedAngleGrid quantized_grid(const ArrayGeometry& geom) {
  if (!geom.valid()) throw ConfigError("invalid array geometry");
  QuantizedAngleGrid grid;
  grid.lambda_x.resize(geom.mx);
  grid.lambda_y.resize(geom.my);
  for (int u = 1; u <= geom.mx; ++u)
    grid.lambda_x[u - 1] = -1.0 + (2.0 * u - 1.0) / geom.mx;
  for (int c = 1; c <= geom.my; ++c)
    grid.lambda_y[c - 1] = -1.0 + (2.0 * c - 1.0) / geom.my;
  return grid;
}

SupportBox support_box(const GroupAngularSupport& support) {
  const double elo = std::max(support.mean_eaod_deg - support.eaod_spread_deg,
                              1.0);
  const double ehi = std::min(support.mean_eaod_deg + support.eaod_spread_deg,
                              179.0);
  const double alo = support.mean_aaod_deg - support.aaod_spread_deg;
  const double ahi = support.mean_aaod_deg + support.aaod_spread_deg;

  // Lattice over the angle rectangle plus the axis values where the
  // direction cosines reach interior extrema (elevation 90, azimuth
  // multiples of 90), so the box is exact and not merely sampled.
  std::vector<double> elev, azim;
  elev.reserve(kSupportSamplesPerAxis + 1);
  azim.reserve(kSupportSamplesPerAxis + 9);
  for (int i = 0; i < kSupportSamplesPerAxis; ++i) {
    const double t = static_cast<double>(i) / (kSupportSamplesPerAxis - 1);
    elev.push_back(elo + (ehi - elo) * t);
    azim.push_back(alo + (ahi - alo) * t);
  }
  if (elo <= 90.0 && 90.0 <= ehi) elev.push_back(90.0);
  const double first_quarter = std::ceil(alo / 90.0) * 90.0;
  for (double a = first_quarter; a <= ahi; a += 90.0) azim.push_back(a);

  SupportBox box;
  box.x_lo = box.y_lo = std::numeric_limits<double>::infinity();
  box.x_hi = box.y_hi = -std::numeric_limits<double>::infinity();
  for (double e : elev) {
    const double se = std::sin(e * kDegToRad);
    for (double a : azim) {
      const double x = se * std::cos(a * kDegToRad);
      const double y = se * std::sin(a * kDegToRad);
      box.x_lo = std::min(box.x_lo, x);
      box.x_hi = std::max(box.x_hi, x);
      box.y_lo = std::min(box.y_lo, y);
      box.y_hi = std::max(box.y_hi, y);
    }
  }

  const double se =
      std::sin(std::clamp(support.mean_eaod_deg, 1.0, 179.0) * kDegToRad);
  box.center_x = se * std::cos(support.mean_aaod_deg * kDegToRad);
  box.center_y = se * std::sin(support.mean_aaod_deg * kDegToRad);
  return box;
}

std::vector<AnglePair> select_group_pairs(const QuantizedAngleGrid& grid,
                                          const GroupAngularSupport& support,
                                          const ArrayGeometry& geom,
                                          double margin, int group_index) {
  (void)geom;
  if (margin < 0) throw ConfigError("selection margin must be >= 0");
  const SupportBox box = support_box(support);

  std::vector<AnglePair> pairs;
  for (int u = 0; u < static_cast<int>(grid.lambda_x.size()); ++u) {
    const double lx = grid.lambda_x[u];
    if (lx < box.x_lo - margin || lx > box.x_hi + margin) continue;
    for (int c = 0; c < static_cast<int>(grid.lambda_y.size()); ++c) {
      const double ly = grid.lambda_y[c];
      if (ly < box.y_lo - margin || ly > box.y_hi + margin) continue;
      pairs.push_back({lx, ly, u, c});
    }
  }
  if (pairs.empty()) {
    const std::string which =
        group_index >= 0 ? "group " + std::to_string(group_index + 1)
                         : "group";
    throw ConfigError("no quantized angle pairs cover the support of " +
                      which + "; widen the spreads or the margin");
  }
  return pairs;
}

std::vector<std::vector<AnglePair>> select_pairs_per_group(
    const QuantizedAngleGrid& grid,
    const std::vector<GroupAngularSupport>& groups, const ArrayGeometry& geom,
    double margin) {
  const int num_groups = static_cast<int>(groups.size());
  std::vector<std::vector<AnglePair>> selections(num_groups);
  std::vector<SupportBox> boxes(num_groups);
  for (int g = 0; g < num_groups; ++g) {
    selections[g] = select_group_pairs(grid, groups[g], geom, margin, g);
    boxes[g] = support_box(groups[g]);
  }

  // A pair claimed by several groups belongs to the one whose support
  // center is nearest; ties go to the lower group index.
  std::vector<std::vector<int>> owner(
      grid.lambda_x.size(), std::vector<int>(grid.lambda_y.size(), -1));
  for (int g = 0; g < num_groups; ++g) {
    for (const AnglePair& p : selections[g]) {
      int& cur = owner[p.u][p.c];
      if (cur < 0) {
        cur = g;
        continue;
      }
      const auto dist2 = [&](int gg) {
        const double dx = p.lambda_x - boxes[gg].center_x;
        const double dy = p.lambda_y - boxes[gg].center_y;
        return dx * dx + dy * dy;
      };
      if (dist2(g) < dist2(cur)) cur = g;
    }
  }
  for (int g = 0; g < num_groups; ++g) {
    std::erase_if(selections[g],
                  [&](const AnglePair& p) { return owner[p.u][p.c] != g; });
    if (selections[g].empty())
      throw ConfigError("group " + std::to_string(g + 1) +
                        " lost all its angle pairs to overlapping groups");
  }
  return selections;
}

Eigen::MatrixXcd build_rf_beamformer(
    const std::vector<std::vector<AnglePair>>& selections,
    const ArrayGeometry& geom, int num_users,
    std::vector<GroupBlock>* blocks) {
  int total = 0;
  for (const auto& sel : selections) {
    if (sel.empty()) throw ConfigError("empty angle-pair selection");
    total += static_cast<int>(sel.size());
  }
  if (total > geom.size())
    throw ConfigError("more angle pairs selected than antennas");
  if (total < num_users)
    throw ConfigError("infeasible precoder: " + std::to_string(total) +
                      " RF chains for " + std::to_string(num_users) +
                      " users");

  const double scale = 1.0 / std::sqrt(static_cast<double>(geom.size()));
  Eigen::MatrixXcd rf(geom.size(), total);
  if (blocks) blocks->clear();
  int col = 0;
  for (const auto& sel : selections) {
    if (blocks) blocks->push_back({col, static_cast<int>(sel.size())});
    for (const AnglePair& p : sel) {
      rf.col(col++) =
          scale *
          phase_response(p.lambda_x, p.lambda_y, geom).conjugate();
    }
  }
  return rf;
}

Eigen::MatrixXcd effective_channel(const Eigen::MatrixXcd& channels,
                                   const Eigen::MatrixXcd& rf) {
  if (channels.cols() != rf.rows())
    throw ValidationError("channel/beamformer dimension mismatch");
  return channels * rf;
}

Eigen::MatrixXcd rzf_precoder(const Eigen::MatrixXcd& effective,
                              int num_users, double sigma2, double p_total) {
  if (effective.rows() != num_users)
    throw ValidationError("effective channel has wrong user count");
  if (!effective.allFinite())
    throw ValidationError("effective channel contains non-finite entries");
  if (num_users < 1) throw ValidationError("need at least one user");
  if (p_total <= 0) throw ValidationError("total power must be positive");

  const double reg = num_users * sigma2 / p_total;
  // (A^H A + reg I)^-1 A^H == A^H (A A^H + reg I)^-1; the right-hand form
  // is K x K and keeps full rank for any user count below the chain count.
  Eigen::MatrixXcd gram =
      effective * effective.adjoint() +
      reg * Eigen::MatrixXcd::Identity(num_users, num_users);
  Eigen::LDLT<Eigen::MatrixXcd> ldlt(gram);
  const Eigen::VectorXd pivots = ldlt.vectorD().real();
  // Eigen's LDLT quietly zeroes degenerate pivots instead of failing, so
  // rank deficiency has to be detected explicitly.
  if (ldlt.info() != Eigen::Success || pivots.minCoeff() <= 0.0 ||
      pivots.minCoeff() < 1e-14 * pivots.maxCoeff())
    throw ValidationError("singular regularized Gram matrix");
  // Solve gram X = effective, then B = X^H = effective^H gram^-1.
  Eigen::MatrixXcd solved = ldlt.solve(effective);
  if (!solved.allFinite())
    throw ValidationError("singular regularized Gram matrix");
  return solved.adjoint();
}

RfDesign design_rf_stage(const Scenario& scenario, double margin) {
  scenario.validate();
  const QuantizedAngleGrid grid = quantized_grid(scenario.array);
  const auto selections =
      select_pairs_per_group(grid, scenario.groups, scenario.array, margin);
  RfDesign design;
  design.rf = build_rf_beamformer(selections, scenario.array,
                                  scenario.num_users(), &design.group_blocks);
  return design;
}

HybridPrecoder complete_precoder(const RfDesign& design,
                                 const ChannelRealization& realization,
                                 const LinkBudget& link) {
  HybridPrecoder hp;
  hp.rf = design.rf;
  hp.group_blocks = design.group_blocks;
  hp.effective = effective_channel(realization.channels, design.rf);
  hp.bb = rzf_precoder(hp.effective, realization.num_users(),
                       link.noise_power_mw, link.total_power_mw);
  return hp;
}

}  // namespace dlpa
