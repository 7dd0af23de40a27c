#include "dlpa/channel.hpp"

#include <cmath>
#include <numbers>

#include "dlpa/errors.hpp"
#include "dlpa/rng.hpp"
#include "dlpa/scenario.hpp"

namespace dlpa {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kBsHeightM = 10.0;
constexpr double kMinElevationDeg = 1.0;
constexpr double kMaxElevationDeg = 179.0;

}  // namespace

Eigen::VectorXcd phase_response(double gamma_x, double gamma_y,
                                const ArrayGeometry& geom) {
  Eigen::VectorXcd phi(geom.size());
  const double scale = -2.0 * std::numbers::pi * geom.spacing_d;
  for (int u = 0; u < geom.mx; ++u) {
    const double px = scale * u * gamma_x;
    for (int c = 0; c < geom.my; ++c) {
      phi[u * geom.my + c] = std::polar(1.0, px + scale * c * gamma_y);
    }
  }
  return phi;
}

Eigen::VectorXcd channel_from_paths(const std::vector<PathComponent>& paths,
                                    const ArrayGeometry& geom,
                                    double pathloss_exponent) {
  Eigen::VectorXcd h = Eigen::VectorXcd::Zero(geom.size());
  for (const PathComponent& p : paths) {
    const double attenuation = std::pow(p.distance_m, -pathloss_exponent);
    h += attenuation * p.gain * phase_response(p.gamma_x, p.gamma_y, geom);
  }
  return h;
}

ChannelRealization sample_realization(const Scenario& scenario,
                                      std::uint64_t seed) {
  scenario.validate();

  const ArrayGeometry& geom = scenario.array;
  const int num_paths = scenario.link.num_paths;
  const int total_users = scenario.num_users();

  ChannelRealization out;
  out.channels.resize(total_users, geom.size());
  out.per_path.resize(total_users);
  out.group_of_user.resize(total_users);

  Rng rng(seed);
  const double gain_var = 1.0 / num_paths;

  int k = 0;
  for (int g = 0; g < scenario.num_groups(); ++g) {
    const GroupAngularSupport& grp = scenario.groups[g];
    for (int j = 0; j < grp.users; ++j, ++k) {
      const double horizontal_m = rng.uniform(10.0, 90.0);
      const double terminal_height_m = rng.uniform(1.5, 2.5);
      const double distance_m =
          std::hypot(horizontal_m, kBsHeightM - terminal_height_m);

      std::vector<PathComponent>& paths = out.per_path[k];
      paths.resize(num_paths);
      for (int l = 0; l < num_paths; ++l) {
        double eaod = rng.uniform(grp.mean_eaod_deg - grp.eaod_spread_deg,
                                  grp.mean_eaod_deg + grp.eaod_spread_deg);
        eaod = std::clamp(eaod, kMinElevationDeg, kMaxElevationDeg);
        const double aaod =
            rng.uniform(grp.mean_aaod_deg - grp.aaod_spread_deg,
                        grp.mean_aaod_deg + grp.aaod_spread_deg);
        const std::complex<double> gain = rng.circular_gaussian(gain_var);

        const double sin_e = std::sin(eaod * kDegToRad);
        paths[l] = {distance_m, gain, sin_e * std::cos(aaod * kDegToRad),
                    sin_e * std::sin(aaod * kDegToRad)};
      }
      out.channels.row(k) =
          channel_from_paths(paths, geom, scenario.link.pathloss_exponent)
              .transpose();
      out.group_of_user[k] = g;
    }
  }
  return out;
}

}  // namespace dlpa
