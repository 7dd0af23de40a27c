#include <doctest.h>

#include <cmath>
#include <complex>

#include "dlpa/errors.hpp"
#include "dlpa/precoding.hpp"
#include "test_helpers.hpp"

using namespace dlpa;
using dlpa::testing::desk_scenario;
using dlpa::testing::random_complex;
using dlpa::testing::table1_scenario;

TEST_CASE("quantized grid closed forms") {
  const QuantizedAngleGrid g4 = quantized_grid({4, 1, 0.5});
  REQUIRE(g4.lambda_x.size() == 4);
  CHECK(g4.lambda_x[0] == doctest::Approx(-0.75));
  CHECK(g4.lambda_x[1] == doctest::Approx(-0.25));
  CHECK(g4.lambda_x[2] == doctest::Approx(0.25));
  CHECK(g4.lambda_x[3] == doctest::Approx(0.75));

  const QuantizedAngleGrid g1 = quantized_grid({1, 1, 0.5});
  CHECK(g1.lambda_x.size() == 1);
  CHECK(g1.lambda_x[0] == doctest::Approx(0.0));
}

TEST_CASE("grid steering vectors form an orthonormal basis") {
  // Independent Gram computation over all 256 pairs of the full array.
  const ArrayGeometry geom{16, 16, 0.5};
  const QuantizedAngleGrid grid = quantized_grid(geom);
  Eigen::MatrixXcd f(geom.size(), geom.size());
  int col = 0;
  const double scale = 1.0 / std::sqrt(static_cast<double>(geom.size()));
  for (double lx : grid.lambda_x)
    for (double ly : grid.lambda_y)
      f.col(col++) = scale * phase_response(lx, ly, geom).conjugate();
  const Eigen::MatrixXcd gram = f.adjoint() * f;
  const double dev =
      (gram - Eigen::MatrixXcd::Identity(256, 256)).cwiseAbs().maxCoeff();
  CHECK(dev < 1e-9);
}

TEST_CASE("full-span support selects every grid pair") {
  const ArrayGeometry geom{4, 4, 0.5};
  const GroupAngularSupport support{90.0, 0.0, 90.0, 180.0, 1};
  const auto pairs =
      select_group_pairs(quantized_grid(geom), support, geom, 0.0);
  CHECK(pairs.size() == 16);
}

TEST_CASE("reference geometry selects the recorded chain count") {
  // Reference value for this selection rule on the full 16x16 geometry;
  // the acceptance suite pins the same number.
  const Scenario s = table1_scenario(3);
  const auto pairs = select_group_pairs(quantized_grid(s.array),
                                        s.groups[0], s.array, 0.0);
  CHECK(pairs.size() == 9);
  for (const AnglePair& p : pairs) {
    CHECK(p.lambda_x >= 0.68);
    CHECK(p.lambda_x <= 0.94);
    CHECK(p.lambda_y >= 0.18);
    CHECK(p.lambda_y <= 0.44);
  }
}

TEST_CASE("margin widens the selection monotonically") {
  const Scenario s = table1_scenario(3);
  const auto grid = quantized_grid(s.array);
  std::size_t prev = 0;
  for (double margin : {0.0, 0.0625, 0.125, 0.25}) {
    const auto pairs =
        select_group_pairs(grid, s.groups[0], s.array, margin);
    CHECK(pairs.size() >= prev);
    prev = pairs.size();
  }
}

TEST_CASE("disjoint supports produce disjoint selections") {
  const Scenario s = table1_scenario(6, 2);
  const auto selections = select_pairs_per_group(
      quantized_grid(s.array), s.groups, s.array, 0.0);
  REQUIRE(selections.size() == 2);
  for (const AnglePair& a : selections[0])
    for (const AnglePair& b : selections[1])
      CHECK((a.u != b.u || a.c != b.c));
  // Opposite azimuths mirror the selection.
  CHECK(selections[0].size() == selections[1].size());
}

TEST_CASE("overlapping supports split pairs by nearest center") {
  Scenario s = desk_scenario(2, 1);
  s.groups.push_back(s.groups[0]);
  s.groups[1].mean_aaod_deg += 20.0;  // heavy overlap
  const auto selections = select_pairs_per_group(
      quantized_grid(s.array), s.groups, s.array, 0.0);
  const SupportBox box0 = support_box(s.groups[0]);
  const SupportBox box1 = support_box(s.groups[1]);
  for (const AnglePair& p : selections[0]) {
    const double d0 = std::hypot(p.lambda_x - box0.center_x,
                                 p.lambda_y - box0.center_y);
    const double d1 = std::hypot(p.lambda_x - box1.center_x,
                                 p.lambda_y - box1.center_y);
    CHECK(d0 <= d1 + 1e-12);
  }
}

TEST_CASE("empty selection names the offending group") {
  // A support squeezed between grid columns of a coarse 4x4 array.
  const ArrayGeometry geom{4, 4, 0.5};
  const GroupAngularSupport support{30.0, 45.0, 0.5, 0.5, 1};
  CHECK_THROWS_WITH_AS(
      (void)select_group_pairs(quantized_grid(geom), support, geom, 0.0, 2),
      doctest::Contains("group 3"), ConfigError);
}

TEST_CASE("beamformer columns are hand-verified steering vectors") {
  // 2x2 array, pairs (-0.5, -0.5) and (0.5, 0.5): phases are quarter
  // turns, conjugated and scaled by 1/sqrt(M) = 1/2.
  const ArrayGeometry geom{2, 2, 0.5};
  std::vector<std::vector<AnglePair>> sel = {
      {{-0.5, -0.5, 0, 0}, {0.5, 0.5, 1, 1}}};
  std::vector<GroupBlock> blocks;
  const Eigen::MatrixXcd f = build_rf_beamformer(sel, geom, 2, &blocks);
  REQUIRE(f.rows() == 4);
  REQUIRE(f.cols() == 2);
  const std::complex<double> j(0.0, 1.0);
  // phi(-0.5,-0.5) = (1, j, j, -1) so the column is (1, -j, -j, -1)/2.
  CHECK(std::abs(f(0, 0) - 0.5) < 1e-14);
  CHECK(std::abs(f(1, 0) + 0.5 * j) < 1e-14);
  CHECK(std::abs(f(2, 0) + 0.5 * j) < 1e-14);
  CHECK(std::abs(f(3, 0) + 0.5) < 1e-14);
  CHECK(std::abs(f(0, 1) - 0.5) < 1e-14);
  CHECK(std::abs(f(1, 1) - 0.5 * j) < 1e-14);
  CHECK(std::abs(f(2, 1) - 0.5 * j) < 1e-14);
  CHECK(std::abs(f(3, 1) + 0.5) < 1e-14);
  CHECK(std::abs((f.adjoint() * f)(0, 1)) < 1e-14);
  REQUIRE(blocks.size() == 1);
  CHECK(blocks[0].start == 0);
  CHECK(blocks[0].count == 2);
}

TEST_CASE("constant modulus and unitarity on the scaled scenario") {
  for (int users : {3, 6}) {
    const Scenario s = desk_scenario(users, users % 2 == 0 ? 2 : 1);
    const RfDesign design = design_rf_stage(s);
    const double want = 1.0 / std::sqrt(static_cast<double>(s.array.size()));
    for (int r = 0; r < design.rf.rows(); ++r)
      for (int c = 0; c < design.rf.cols(); ++c)
        CHECK(std::abs(std::abs(design.rf(r, c)) - want) < 1e-12);
    const Eigen::MatrixXcd gram = design.rf.adjoint() * design.rf;
    CHECK((gram - Eigen::MatrixXcd::Identity(gram.rows(), gram.cols()))
              .cwiseAbs()
              .maxCoeff() < 1e-9);
    int total = 0;
    for (const GroupBlock& b : design.group_blocks) total += b.count;
    CHECK(total == design.num_chains());
  }
}

TEST_CASE("too few chains for the users is an error") {
  const ArrayGeometry geom{4, 4, 0.5};
  std::vector<std::vector<AnglePair>> sel = {{{0.25, 0.25, 2, 2}}};
  CHECK_THROWS_AS((void)build_rf_beamformer(sel, geom, 2, nullptr),
                  ConfigError);
}

TEST_CASE("effective channel equals the naive triple-loop product") {
  Rng rng(4);
  const Eigen::MatrixXcd h = random_complex(3, 8, rng);
  const Eigen::MatrixXcd f = random_complex(8, 4, rng);
  const Eigen::MatrixXcd fast = effective_channel(h, f);
  Eigen::MatrixXcd naive = Eigen::MatrixXcd::Zero(3, 4);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 4; ++c)
      for (int m = 0; m < 8; ++m) naive(r, c) += h(r, m) * f(m, c);
  CHECK((fast - naive).cwiseAbs().maxCoeff() < 1e-12);

  // Identity selection and 1x1 degenerate cases.
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(8, 2);
  CHECK((effective_channel(h, id) - h.leftCols(2)).cwiseAbs().maxCoeff() <
        1e-15);
  CHECK_THROWS_AS((void)effective_channel(h, random_complex(7, 2, rng)),
                  ValidationError);
}

TEST_CASE("rzf diagonal closed form") {
  Eigen::MatrixXcd heff = Eigen::MatrixXcd::Zero(2, 2);
  heff(0, 0) = 1.0;
  heff(1, 1) = 2.0;
  // K sigma2 / p_total = 1.
  const Eigen::MatrixXcd bb = rzf_precoder(heff, 2, 0.5, 1.0);
  CHECK(std::abs(bb(0, 0) - 0.5) < 1e-12);
  CHECK(std::abs(bb(1, 1) - 0.4) < 1e-12);
  CHECK(std::abs(bb(0, 1)) < 1e-12);
  CHECK(std::abs(bb(1, 0)) < 1e-12);
}

TEST_CASE("rzf approaches zero forcing as the regularizer vanishes") {
  Rng rng(9);
  const Eigen::MatrixXcd heff = random_complex(3, 3, rng);
  const Eigen::MatrixXcd bb = rzf_precoder(heff, 3, 1e-14, 1.0);
  const Eigen::MatrixXcd prod = heff * bb;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c)
      CHECK(std::abs(prod(r, c) - (r == c ? 1.0 : 0.0)) < 1e-6);
}

TEST_CASE("rzf matches the ridge normal-equations oracle") {
  Rng rng(12);
  const Eigen::MatrixXcd heff = random_complex(3, 6, rng);
  const double sigma2 = 0.01, p_total = 1.0;
  const Eigen::MatrixXcd bb = rzf_precoder(heff, 3, sigma2, p_total);
  // Oracle: direct evaluation of the defining formula with an explicit
  // inverse of the chain-side Gram matrix.
  const Eigen::MatrixXcd gram =
      heff.adjoint() * heff +
      3.0 * (sigma2 / p_total) * Eigen::MatrixXcd::Identity(6, 6);
  const Eigen::MatrixXcd oracle = gram.inverse() * heff.adjoint();
  CHECK((bb - oracle).cwiseAbs().maxCoeff() /
            oracle.cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("rzf shrinks as the regularizer grows") {
  Rng rng(15);
  const Eigen::MatrixXcd heff = random_complex(3, 5, rng);
  double prev = std::numeric_limits<double>::infinity();
  for (double reg : {1e-4, 1e-2, 1.0, 1e2, 1e4}) {
    const double norm = rzf_precoder(heff, 3, reg, 3.0).norm();
    CHECK(norm < prev);
    prev = norm;
  }
}

TEST_CASE("rzf rejects a singular unregularized system") {
  Eigen::MatrixXcd heff(2, 3);
  heff.row(0) = Eigen::RowVector3cd(1.0, 2.0, 3.0);
  heff.row(1) = heff.row(0);  // rank deficient
  CHECK_THROWS_AS((void)rzf_precoder(heff, 2, 0.0, 1.0), ValidationError);
}

TEST_CASE("interference between disjoint groups is suppressed") {
  // Soft regression guard: energy a group's beamformer leaks into the
  // other group's channels, relative to its own, averaged over
  // realizations of the full two-group geometry.
  const Scenario s = table1_scenario(4, 2);
  const RfDesign design = design_rf_stage(s);
  REQUIRE(design.group_blocks.size() == 2);
  double ratio_sum = 0.0;
  const int trials = 100;
  for (int i = 0; i < trials; ++i) {
    const ChannelRealization r = sample_realization(s, 500 + i);
    const auto& b0 = design.group_blocks[0];
    const Eigen::MatrixXcd f0 = design.rf.middleCols(b0.start, b0.count);
    const Eigen::MatrixXcd own = r.channels.topRows(2) * f0;
    const Eigen::MatrixXcd other = r.channels.bottomRows(2) * f0;
    ratio_sum += other.norm() / own.norm();
  }
  CHECK(ratio_sum / trials < 0.2);
}
