#include <doctest.h>

#include "dlpa/rng.hpp"

using dlpa::Rng;

TEST_CASE("same seed reproduces the stream exactly") {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) {
    CHECK(a.uniform() == b.uniform());
    CHECK(a.normal() == b.normal());
  }
}

TEST_CASE("uniform stays in [0, 1) and fills the range") {
  Rng rng(7);
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  CHECK(lo < 1e-3);
  CHECK(hi > 1.0 - 1e-3);
}

TEST_CASE("normal moments") {
  Rng rng(3);
  const int n = 200000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    sum += x;
    sum2 += x * x;
  }
  // 3 sigma bounds for the sample mean and variance estimators.
  CHECK(std::abs(sum / n) < 3.0 / std::sqrt(static_cast<double>(n)));
  CHECK(std::abs(sum2 / n - 1.0) <
        3.0 * std::sqrt(2.0 / static_cast<double>(n)));
}

TEST_CASE("circular gaussian has the requested power") {
  Rng rng(5);
  const int n = 100000;
  const double var = 0.05;  // 1/Q at Q = 20
  double power = 0.0;
  for (int i = 0; i < n; ++i) power += std::norm(rng.circular_gaussian(var));
  // |z|^2 is exponential with mean var and std var.
  CHECK(std::abs(power / n - var) < 3.0 * var / std::sqrt(n));
}

TEST_CASE("below(n) is unbiased over small ranges") {
  Rng rng(11);
  int counts[7] = {};
  const int n = 70000;
  for (int i = 0; i < n; ++i) ++counts[rng.below(7)];
  for (int c : counts) CHECK(std::abs(c - n / 7) < 5 * std::sqrt(n / 7.0));
}
