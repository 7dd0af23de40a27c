#pragma once

#include <Eigen/Dense>
#include <complex>

#include "dlpa/rng.hpp"
#include "dlpa/scenario.hpp"

namespace dlpa::testing {

/// Scaled desk geometry used throughout the tests: 8x8 array, one group
/// on the Table-1 angles.
inline Scenario desk_scenario(int users, int groups = 1) {
  Scenario s;
  s.array = {8, 8, 0.5};
  for (int g = 0; g < groups; ++g)
    s.groups.push_back({60.0, 21.0 + 180.0 * g, 15.0, 11.0, users / groups});
  return s;
}

/// Full Table-1 geometry (16x16).
inline Scenario table1_scenario(int users, int groups = 1) {
  Scenario s = desk_scenario(users, groups);
  s.array = {16, 16, 0.5};
  return s;
}

inline Eigen::MatrixXcd random_complex(int rows, int cols, Rng& rng,
                                       double scale = 1.0) {
  Eigen::MatrixXcd m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      m(r, c) = scale * std::complex<double>(rng.uniform(-1.0, 1.0),
                                             rng.uniform(-1.0, 1.0));
  return m;
}

}  // namespace dlpa::testing
