#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "identify.hpp"
#include "scaler.hpp"
#include "test_util.hpp"

#include <chrono>
#include <stdexcept>

using namespace kdmhe;

TEST_CASE("scaler round trips and maps the training hull to [0,1]") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> gauss;
  Eigen::MatrixXd S(200, 3);
  for (int r = 0; r < S.rows(); ++r)
    for (int c = 0; c < S.cols(); ++c) S(r, c) = 10.0 * gauss(rng) + c;
  Scaler sc = Scaler::fit(S);
  Eigen::MatrixXd Ss = sc.apply_rows(S);
  CHECK(Ss.minCoeff() == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(Ss.maxCoeff() == doctest::Approx(1.0).epsilon(1e-14));
  for (int r = 0; r < 20; ++r) {
    Eigen::VectorXd x = S.row(r).transpose();
    CHECK((sc.unscale(sc.apply(x)) - x).cwiseAbs().maxCoeff() < 1e-12);
  }
  Scaler sub = sc.subset({2, 0});
  CHECK(sub.lo(0) == sc.lo(2));
  CHECK(sub.hi(1) == sc.hi(0));
}

TEST_CASE("scaler rejects constant variables") {
  Eigen::MatrixXd S(10, 2);
  S.col(0).setLinSpaced(10, 0.0, 1.0);
  S.col(1).setConstant(4.2);
  CHECK_THROWS_WITH_AS(Scaler::fit(S),
                       "degenerate variable 1: constant over the training data",
                       std::invalid_argument);
}

TEST_CASE("snapshots align states, shifts and inputs per subsystem") {
  testutil::LinearSystem s = testutil::make_linear_system(11);
  auto [X, U] = testutil::rollout(s, 30, 11);
  SnapshotSet snaps = build_snapshots(X, U, s.topo);
  REQUIRE((int)snaps.X.size() == s.topo.m);
  CHECK(snaps.columns == 29);
  for (int i = 0; i < s.topo.m; ++i) {
    CHECK(snaps.X[i].rows() == s.topo.nz[i]);
    CHECK(snaps.X[i].cols() == 29);
    // shift-by-one consistency
    CHECK((snaps.Xbar[i].leftCols(28) - snaps.X[i].rightCols(28))
              .cwiseAbs().maxCoeff() == 0.0);
    CHECK((snaps.X[i].col(0) -
           X.row(0).segment(s.topo.z_off[i], s.topo.nz[i]).transpose())
              .cwiseAbs().maxCoeff() == 0.0);
    CHECK((snaps.U[i].col(3) -
           U.row(3).segment(s.topo.u_off[i], s.topo.nu[i]).transpose())
              .cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("identification recovers an exact linear interconnection") {
  // Acceptance criterion: data generated by known block-sparse (A, B, C)
  // must be recovered to 1e-8 in well under a second.
  testutil::LinearSystem s = testutil::make_linear_system(3);
  auto [X, U] = testutil::rollout(s, 120, 3);
  SnapshotSet snaps = build_snapshots(X, U, s.topo);
  auto t0 = std::chrono::steady_clock::now();
  IdentifyDiagnostics diag;
  std::vector<KoopmanSubsystemModel> models =
      identify_all(snaps, s.topo, s.state_dicts, s.input_dicts, 1e-10, 1, &diag);
  double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                  .count();
  CHECK(dt < 1.0);
  REQUIRE((int)models.size() == s.topo.m);
  for (int i = 0; i < s.topo.m; ++i) {
    CHECK(testutil::frob_diff(models[i].A_ii, testutil::A_block(s, i, i)) < 1e-8);
    for (int j : s.topo.neighbors[i])
      CHECK(testutil::frob_diff(models[i].A_ij.at(j), testutil::A_block(s, i, j)) <
            1e-8);
    CHECK(testutil::frob_diff(models[i].B, testutil::B_block(s, i)) < 1e-8);
    CHECK(diag.residual[i] < 1e-10);
  }
}

TEST_CASE("parallel identification is bitwise identical to sequential") {
  testutil::LinearSystem s = testutil::make_linear_system(17);
  auto [X, U] = testutil::rollout(s, 80, 17);
  SnapshotSet snaps = build_snapshots(X, U, s.topo);
  auto seq = identify_all(snaps, s.topo, s.state_dicts, s.input_dicts, 1e-10, 1);
  auto par = identify_all(snaps, s.topo, s.state_dicts, s.input_dicts, 1e-10, 4);
  REQUIRE(seq.size() == par.size());
  for (size_t i = 0; i < seq.size(); ++i) {
    CHECK(testutil::frob_diff(seq[i].A_ii, par[i].A_ii) == 0.0);
    CHECK(testutil::frob_diff(seq[i].B, par[i].B) == 0.0);
    for (auto& [j, blk] : seq[i].A_ij)
      CHECK(testutil::frob_diff(blk, par[i].A_ij.at(j)) == 0.0);
  }
}

TEST_CASE("rank truncation drops directions below rtol") {
  // Rank-deficient regressor: duplicate a state coordinate so one singular
  // value collapses; a loose rtol must truncate it without blowing up K.
  testutil::LinearSystem s = testutil::make_linear_system(23);
  auto [X, U] = testutil::rollout(s, 60, 23);
  X.col(1) = X.col(0);  // exact collinearity inside subsystem 0
  SnapshotSet snaps = build_snapshots(X, U, s.topo);
  IdentifyDiagnostics diag;
  auto models = identify_all(snaps, s.topo, s.state_dicts, s.input_dicts, 1e-8,
                             1, &diag);
  CHECK(diag.truncated[0] >= 1);
  CHECK(models[0].A_ii.allFinite());
}

TEST_CASE("output matrix selects measured lifted coordinates") {
  testutil::LinearSystem s = testutil::make_linear_system(29);
  for (int i = 0; i < s.topo.m; ++i) {
    Eigen::MatrixXd C = output_matrix(s.topo, i);
    REQUIRE(C.rows() == s.topo.ny[i]);
    REQUIRE(C.cols() == s.topo.nz[i]);
    Eigen::VectorXd z = Eigen::VectorXd::LinSpaced(s.topo.nz[i], 1.0, 2.0);
    Eigen::VectorXd y = C * z;
    for (int r = 0; r < y.size(); ++r)
      CHECK(y(r) == z(s.topo.sensor_map[i][r]));
  }
}

TEST_CASE("regress_output solves the least-squares map") {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> gauss;
  Eigen::MatrixXd Phi(4, 50), M(2, 4);
  for (int r = 0; r < Phi.rows(); ++r)
    for (int c = 0; c < Phi.cols(); ++c) Phi(r, c) = gauss(rng);
  for (int r = 0; r < M.rows(); ++r)
    for (int c = 0; c < M.cols(); ++c) M(r, c) = gauss(rng);
  Eigen::MatrixXd Y = M * Phi;
  CHECK((regress_output(Y, Phi, 1e-12) - M).cwiseAbs().maxCoeff() < 1e-10);
}
