#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <vector>

namespace dlpa {

/// Uniform rectangular array at the base station: mx-by-my elements,
/// spacing in wavelengths.
struct ArrayGeometry {
  int mx = 1;
  int my = 1;
  double spacing_d = 0.5;

  int size() const { return mx * my; }
  bool valid() const { return mx >= 1 && my >= 1 && spacing_d > 0.0; }
};

/// Angular footprint of one user group: mean elevation/azimuth departure
/// angles and their spreads, all in degrees.
struct GroupAngularSupport {
  double mean_eaod_deg = 60.0;
  double mean_aaod_deg = 21.0;
  double eaod_spread_deg = 15.0;
  double aaod_spread_deg = 11.0;
  int users = 1;
};

/// Large-scale link parameters. Powers are in milliwatts internally;
/// dBm conversion happens at the configuration boundary.
struct LinkBudget {
  double pathloss_exponent = 3.76;
  double noise_power_mw = 3.9810717055349694e-14;  // -174 dBm/Hz over 10 kHz
  double total_power_mw = 100.0;                   // 20 dBm
  int num_paths = 20;
};

/// One propagation path: shared user distance, complex gain, and the
/// direction cosines (sin th cos psi, sin th sin psi) of its departure angle.
struct PathComponent {
  double distance_m = 0.0;
  std::complex<double> gain;
  double gamma_x = 0.0;
  double gamma_y = 0.0;
};

/// One network draw: per-user channel rows plus the path-level records
/// they were accumulated from.
struct ChannelRealization {
  /// K x M; row k holds the (untransposed) channel vector of user k, so
  /// effective channels are plain products with the RF beamformer.
  Eigen::MatrixXcd channels;
  /// per_path[k] has exactly num_paths entries for user k.
  std::vector<std::vector<PathComponent>> per_path;
  std::vector<int> group_of_user;

  int num_users() const { return static_cast<int>(channels.rows()); }
};

/// Array phase response for direction cosines (gamma_x, gamma_y): the
/// x-axis response Kronecker the y-axis response, entry (u, c) at index
/// u*my + c equal to exp(-j 2 pi d (u gamma_x + c gamma_y)). Every entry
/// has unit modulus.
Eigen::VectorXcd phase_response(double gamma_x, double gamma_y,
                                const ArrayGeometry& geom);

/// Accumulates a channel vector from path records:
///   h = sum_l tau_l^(-eta) z_l phi(gamma_x_l, gamma_y_l).
Eigen::VectorXcd channel_from_paths(const std::vector<PathComponent>& paths,
                                    const ArrayGeometry& geom,
                                    double pathloss_exponent);

struct Scenario;  // scenario.hpp

/// Draws a full network realization. Deterministic given the seed.
///
/// Per user, in order: horizontal distance U[10, 90) m, terminal height
/// U[1.5, 2.5) m (base height fixed at 10 m, all paths share the
/// resulting 3D distance), then per path elevation U[mean-spread,
/// mean+spread) clamped to [1, 179] degrees, azimuth U[mean-spread,
/// mean+spread), and a circular Gaussian gain with variance 1/num_paths.
///
/// Throws ConfigError if the scenario is inconsistent.
ChannelRealization sample_realization(const Scenario& scenario,
                                      std::uint64_t seed);

}  // namespace dlpa
