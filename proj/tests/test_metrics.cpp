#include <doctest.h>

#include <cmath>
#include <complex>

#include "dlpa/errors.hpp"
#include "dlpa/metrics.hpp"
#include "test_helpers.hpp"

using namespace dlpa;
using dlpa::testing::random_complex;

TEST_CASE("single user has no interference term") {
  Eigen::MatrixXd gains2(1, 1);
  gains2 << 4.0;
  Eigen::VectorXd p(1);
  p << 2.5;
  const Eigen::VectorXd sinr = sinr_per_user(gains2, p, 0.5);
  CHECK(sinr[0] == doctest::Approx(2.5 * 4.0 / 0.5));
}

TEST_CASE("two-user direct substitution") {
  Eigen::MatrixXd gains2(2, 2);
  gains2 << 1.0, 0.1, 0.1, 1.0;
  Eigen::VectorXd p = Eigen::VectorXd::Ones(2);
  const Eigen::VectorXd sinr = sinr_per_user(gains2, p, 0.1);
  CHECK(sinr[0] == doctest::Approx(1.0 / (0.1 + 0.1)));  // = 5
  CHECK(sinr[1] == doctest::Approx(5.0));
}

TEST_CASE("matrix path agrees with a scalar-loop oracle") {
  Rng rng(21);
  const int k = 4, m = 16, n = 6;
  const Eigen::MatrixXcd h = random_complex(k, m, rng);
  const Eigen::MatrixXcd f = random_complex(m, n, rng);
  const Eigen::MatrixXcd b = random_complex(n, k, rng);
  PowerAllocation alloc;
  alloc.powers_mw = Eigen::VectorXd::NullaryExpr(
      k, [&](Eigen::Index) { return rng.uniform(0.1, 2.0); });
  const double sigma2 = 0.37;
  const Eigen::VectorXd fast = sinr_per_user(h, f, b, alloc, sigma2);

  for (int i = 0; i < k; ++i) {
    // Naive per-term accumulation of |h_i^T F b_t|^2.
    std::vector<double> g(k, 0.0);
    for (int t = 0; t < k; ++t) {
      std::complex<double> dot = 0.0;
      for (int c = 0; c < n; ++c) {
        std::complex<double> hf = 0.0;
        for (int r = 0; r < m; ++r) hf += h(i, r) * f(r, c);
        dot += hf * b(c, t);
      }
      g[t] = std::norm(dot);
    }
    double interference = sigma2;
    for (int t = 0; t < k; ++t)
      if (t != i) interference += alloc.powers_mw[t] * g[t];
    const double want = alloc.powers_mw[i] * g[i] / interference;
    CHECK(fast[i] == doctest::Approx(want).epsilon(1e-10));
  }
}

TEST_CASE("sum rate closed forms") {
  Eigen::VectorXd zero = Eigen::VectorXd::Zero(5);
  CHECK(sum_rate(zero) == 0.0);
  Eigen::VectorXd s(2);
  s << 1.0, 3.0;
  CHECK(sum_rate(s) == doctest::Approx(3.0));
}

TEST_CASE("sum rate is permutation invariant") {
  Rng rng(2);
  Eigen::VectorXd s(6);
  for (int i = 0; i < 6; ++i) s[i] = rng.uniform(0.0, 100.0);
  Eigen::VectorXd perm(6);
  perm << s[3], s[5], s[0], s[1], s[4], s[2];
  CHECK(sum_rate(s) == doctest::Approx(sum_rate(perm)).epsilon(1e-14));
}

TEST_CASE("sinr is invariant to a common phase rotation of a column") {
  Rng rng(33);
  const Eigen::MatrixXcd heff = random_complex(3, 5, rng);
  Eigen::MatrixXcd bb = random_complex(5, 3, rng);
  PowerAllocation alloc;
  alloc.powers_mw = Eigen::VectorXd::Constant(3, 0.7);
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(5, 5);
  const Eigen::VectorXd before =
      sinr_per_user(heff, id, bb, alloc, 0.01);
  bb.col(1) *= std::polar(1.0, 1.234);
  const Eigen::VectorXd after = sinr_per_user(heff, id, bb, alloc, 0.01);
  CHECK((before - after).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("uniform power scaling raises every sinr") {
  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const int k = 2 + static_cast<int>(rng.below(4));
    Eigen::MatrixXd gains2(k, k);
    for (int r = 0; r < k; ++r)
      for (int c = 0; c < k; ++c) gains2(r, c) = rng.uniform(0.01, 1.0);
    Eigen::VectorXd p(k);
    for (int i = 0; i < k; ++i) p[i] = rng.uniform(0.1, 1.0);
    const Eigen::VectorXd base = sinr_per_user(gains2, p, 0.05);
    const Eigen::VectorXd up = sinr_per_user(gains2, 1.7 * p, 0.05);
    for (int i = 0; i < k; ++i) CHECK(up[i] > base[i]);
  }
}

TEST_CASE("full-power scaling meets the budget exactly") {
  Rng rng(8);
  const Eigen::MatrixXcd bb = random_complex(6, 4, rng);
  Eigen::VectorXd raw(4);
  for (int i = 0; i < 4; ++i) raw[i] = rng.uniform(0.05, 1.0);
  const double p_total = 100.0;
  const PowerAllocation alloc = scale_to_full_power(raw, bb, p_total);
  const Eigen::VectorXd cp = bb_column_power(bb);
  CHECK(alloc.powers_mw.dot(cp) == doctest::Approx(p_total).epsilon(1e-12));
  // Invariant under positive rescaling of the direction.
  const PowerAllocation alloc2 = scale_to_full_power(3.7 * raw, bb, p_total);
  CHECK((alloc.powers_mw - alloc2.powers_mw).cwiseAbs().maxCoeff() < 1e-10);
  CHECK_THROWS_AS(
      (void)scale_to_full_power(Eigen::VectorXd::Zero(4), bb, p_total),
      ValidationError);
}

TEST_CASE("power constraint report cross-checks both forms") {
  Rng rng(30);
  // A properly unitary reduced beamformer: QR of a random tall matrix.
  const Eigen::MatrixXcd raw_f = random_complex(16, 5, rng);
  const Eigen::MatrixXcd f =
      Eigen::HouseholderQR<Eigen::MatrixXcd>(raw_f)
          .householderQ() *
      Eigen::MatrixXcd::Identity(16, 5);
  const Eigen::MatrixXcd bb = random_complex(5, 3, rng);
  Eigen::VectorXd raw(3);
  raw << 0.2, 0.9, 0.4;
  const PowerAllocation alloc = scale_to_full_power(raw, bb, 100.0);
  const PowerConstraintReport report =
      check_power_constraint(alloc, bb, f, 100.0);
  CHECK(report.feasible);
  CHECK(report.consumed_mw ==
        doctest::Approx(report.consumed_mw_unitary).epsilon(1e-10));
  CHECK(report.consumed_mw == doctest::Approx(100.0).epsilon(1e-9));

  PowerAllocation zero;
  zero.powers_mw = Eigen::VectorXd::Zero(3);
  const PowerConstraintReport empty =
      check_power_constraint(zero, bb, f, 100.0);
  CHECK(empty.consumed_mw == 0.0);
  CHECK(empty.feasible);
}

TEST_CASE("orthonormal columns with equal raw split the budget evenly") {
  const Eigen::MatrixXcd bb = Eigen::MatrixXcd::Identity(4, 4);
  const PowerAllocation alloc =
      scale_to_full_power(Eigen::VectorXd::Ones(4), bb, 100.0);
  for (int i = 0; i < 4; ++i)
    CHECK(alloc.powers_mw[i] == doctest::Approx(25.0));
}
