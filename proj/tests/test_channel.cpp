#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "dlpa/channel.hpp"
#include "dlpa/errors.hpp"
#include "test_helpers.hpp"

using namespace dlpa;
using dlpa::testing::desk_scenario;

TEST_CASE("phase response at broadside is all ones") {
  const ArrayGeometry geom{5, 3, 0.5};
  const Eigen::VectorXcd phi = phase_response(0.0, 0.0, geom);
  REQUIRE(phi.size() == 15);
  for (int i = 0; i < phi.size(); ++i)
    CHECK(std::abs(phi[i] - 1.0) < 1e-15);
}

TEST_CASE("phase response entries have unit modulus") {
  const ArrayGeometry geom{4, 4, 0.5};
  const Eigen::VectorXcd phi = phase_response(0.37, -0.81, geom);
  for (int i = 0; i < phi.size(); ++i)
    CHECK(std::abs(std::abs(phi[i]) - 1.0) < 1e-14);
}

TEST_CASE("2x2 closed form: gamma_x = 1 alternates along x") {
  const ArrayGeometry geom{2, 2, 0.5};
  const Eigen::VectorXcd phi = phase_response(1.0, 0.0, geom);
  // Layout is x Kronecker y: (u=0,c=0), (0,1), (1,0), (1,1).
  CHECK(std::abs(phi[0] - 1.0) < 1e-14);
  CHECK(std::abs(phi[1] - 1.0) < 1e-14);
  CHECK(std::abs(phi[2] + 1.0) < 1e-14);
  CHECK(std::abs(phi[3] + 1.0) < 1e-14);
}

TEST_CASE("single unit path reproduces the phase response exactly") {
  const ArrayGeometry geom{4, 2, 0.5};
  const std::vector<PathComponent> paths = {{1.0, {1.0, 0.0}, 0.3, -0.2}};
  const Eigen::VectorXcd h = channel_from_paths(paths, geom, 3.76);
  const Eigen::VectorXcd phi = phase_response(0.3, -0.2, geom);
  CHECK((h - phi).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("doubling all distances scales the channel by 2^-eta") {
  const ArrayGeometry geom{4, 4, 0.5};
  const double eta = 3.76;
  Rng rng(1);
  std::vector<PathComponent> paths, far_paths;
  for (int l = 0; l < 6; ++l) {
    PathComponent p{rng.uniform(10.0, 90.0), rng.circular_gaussian(0.2),
                    rng.uniform(-0.7, 0.7), rng.uniform(-0.7, 0.7)};
    paths.push_back(p);
    p.distance_m *= 2.0;
    far_paths.push_back(p);
  }
  const Eigen::VectorXcd near = channel_from_paths(paths, geom, eta);
  const Eigen::VectorXcd far = channel_from_paths(far_paths, geom, eta);
  const double scale = std::pow(2.0, -eta);
  CHECK((far - scale * near).cwiseAbs().maxCoeff() <
        1e-12 * near.cwiseAbs().maxCoeff());
}

TEST_CASE("sampling is deterministic given the seed") {
  const Scenario s = desk_scenario(4, 2);
  const ChannelRealization a = sample_realization(s, 99);
  const ChannelRealization b = sample_realization(s, 99);
  const ChannelRealization c = sample_realization(s, 100);
  CHECK(a.channels.cwiseEqual(b.channels).all());
  CHECK_FALSE(a.channels.cwiseEqual(c.channels).all());
  for (int k = 0; k < a.num_users(); ++k)
    for (int l = 0; l < s.link.num_paths; ++l) {
      CHECK(a.per_path[k][l].gain == b.per_path[k][l].gain);
      CHECK(a.per_path[k][l].distance_m == b.per_path[k][l].distance_m);
    }
}

TEST_CASE("stored paths reconstruct the stored channel") {
  const Scenario s = desk_scenario(3);
  const ChannelRealization r = sample_realization(s, 5);
  for (int k = 0; k < r.num_users(); ++k) {
    const Eigen::VectorXcd rebuilt =
        channel_from_paths(r.per_path[k], s.array, s.link.pathloss_exponent);
    const double rel = (rebuilt.transpose() - r.channels.row(k))
                           .cwiseAbs()
                           .maxCoeff() /
                       r.channels.row(k).cwiseAbs().maxCoeff();
    CHECK(rel < 1e-10);
  }
}

TEST_CASE("path geometry stays inside the clamped group support") {
  Scenario s = desk_scenario(2);
  s.groups[0] = {88.0, 40.0, 20.0, 30.0, 2};  // elevation reaches the clamp
  const ChannelRealization r = sample_realization(s, 17);
  for (const auto& user : r.per_path)
    for (const PathComponent& p : user) {
      const double radius = std::hypot(p.gamma_x, p.gamma_y);
      CHECK(radius <= 1.0 + 1e-12);
      const double elev =
          std::asin(std::min(radius, 1.0)) * 180.0 / std::numbers::pi;
      // sin is symmetric around 90; either preimage must lie in the
      // clamped support [68, 108].
      const bool in_support = (elev >= 68.0 - 1e-9 && elev <= 108.0) ||
                              (180.0 - elev >= 68.0 - 1e-9 &&
                               180.0 - elev <= 108.0);
      CHECK(in_support);
      const double azim =
          std::atan2(p.gamma_y, p.gamma_x) * 180.0 / std::numbers::pi;
      CHECK(azim >= 10.0 - 1e-9);
      CHECK(azim <= 70.0 + 1e-9);
    }
}

TEST_CASE("distances respect the placement geometry") {
  const Scenario s = desk_scenario(8);
  const ChannelRealization r = sample_realization(s, 23);
  for (const auto& user : r.per_path) {
    // All paths of a user share one 3D base-terminal distance.
    for (const PathComponent& p : user)
      CHECK(p.distance_m == user.front().distance_m);
    const double d = user.front().distance_m;
    // Horizontal 10-90 m, height offset 7.5-8.5 m.
    CHECK(d >= std::hypot(10.0, 7.5) - 1e-12);
    CHECK(d <= std::hypot(90.0, 8.5) + 1e-12);
  }
}

TEST_CASE("per-path gain statistics match the 1/Q variance") {
  Scenario s = desk_scenario(1);
  s.link.num_paths = 20;
  const int draws = 10000;
  double sum_total = 0.0;   // sum over paths of |z|^2, per realization
  double sum_each = 0.0;    // per-path |z|^2
  std::uint64_t n_paths = 0;
  for (int i = 0; i < draws; ++i) {
    const ChannelRealization r = sample_realization(s, 1000 + i);
    double total = 0.0;
    for (const PathComponent& p : r.per_path[0]) {
      total += std::norm(p.gain);
      sum_each += std::norm(p.gain);
      ++n_paths;
    }
    sum_total += total;
  }
  // Unit average total path power, within 5 percent.
  CHECK(std::abs(sum_total / draws - 1.0) < 0.05);
  // Per-path variance 1/Q within 3 sigma of the estimator.
  const double q_inv = 1.0 / s.link.num_paths;
  CHECK(std::abs(sum_each / n_paths - q_inv) <
        3.0 * q_inv / std::sqrt(static_cast<double>(n_paths)));
}

TEST_CASE("inconsistent scenarios are rejected") {
  Scenario s = desk_scenario(3);
  s.groups[0].users = 0;
  CHECK_THROWS_AS((void)sample_realization(s, 1), ConfigError);
  Scenario bad_spread = desk_scenario(3);
  bad_spread.groups[0].eaod_spread_deg = -1.0;
  CHECK_THROWS_AS((void)sample_realization(bad_spread, 1), ConfigError);
}
