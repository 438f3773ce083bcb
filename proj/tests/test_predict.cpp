#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "predict.hpp"
#include "test_util.hpp"

#include <random>
#include <stdexcept>

using namespace kdmhe;

TEST_CASE("assemble_global places blocks and zeros elsewhere") {
  SubsystemTopology t;
  t.m = 3;
  t.nx = {2, 1, 2};
  t.nz = {2, 1, 2};
  t.nu = {1, 0, 2};
  t.ny = {1, 1, 1};
  t.neighbors = {{1}, {2}, {0}};
  t.sensor_map = {{0}, {0}, {1}};
  t.build_offsets();

  std::vector<KoopmanSubsystemModel> models(3);
  for (int i = 0; i < 3; ++i) {
    models[i].A_ii = Eigen::MatrixXd::Constant(t.nz[i], t.nz[i], 1.0 + i);
    for (int j : t.neighbors[i])
      models[i].A_ij[j] = Eigen::MatrixXd::Constant(t.nz[i], t.nz[j], 10.0 + i);
    models[i].B = Eigen::MatrixXd::Constant(t.nz[i], t.nu[i], 20.0 + i);
    models[i].C = output_matrix(t, i);
  }
  GlobalModel gm = assemble_global(models, t);
  REQUIRE(gm.A.rows() == 5);
  REQUIRE(gm.B.cols() == 3);
  REQUIRE(gm.C.rows() == 3);
  CHECK(gm.A.block(0, 0, 2, 2).isConstant(1.0));
  CHECK(gm.A.block(2, 2, 1, 1).isConstant(2.0));
  CHECK(gm.A.block(0, 2, 2, 1).isConstant(10.0));   // 0 <- neighbor 1
  CHECK(gm.A.block(2, 3, 1, 2).isConstant(11.0));   // 1 <- neighbor 2
  CHECK(gm.A.block(3, 0, 2, 2).isConstant(12.0));   // 2 <- neighbor 0
  CHECK(gm.A.block(3, 2, 2, 1).isZero());           // 2 </- 1: no edge
  CHECK(gm.B.block(0, 0, 2, 1).isConstant(20.0));
  CHECK(gm.B.block(3, 1, 2, 2).isConstant(22.0));
  CHECK(gm.B.block(2, 0, 1, 3).isZero());           // subsystem 1 has no input
  CHECK(gm.C(0, 0) == 1.0);
  CHECK(gm.C(2, 4) == 1.0);
  CHECK(gm.C.sum() == 3.0);
}

TEST_CASE("stacked batch form matches step-by-step recursion") {
  // Acceptance criterion: for random (A, B, C) and random z0, U, W the
  // stacked prediction agrees with the recursion to 1e-12 for N = 1..6.
  std::mt19937_64 rng(77);
  std::normal_distribution<double> dist;
  const int nz = 5, nu = 2, ny = 3;
  GlobalModel gm;
  gm.A.resize(nz, nz);
  gm.B.resize(nz, nu);
  gm.C.resize(ny, nz);
  for (auto* M : {&gm.A}) {
    for (int r = 0; r < M->rows(); ++r)
      for (int c = 0; c < M->cols(); ++c) (*M)(r, c) = 0.4 * dist(rng);
  }
  for (int r = 0; r < nz; ++r)
    for (int c = 0; c < nu; ++c) gm.B(r, c) = dist(rng);
  for (int r = 0; r < ny; ++r)
    for (int c = 0; c < nz; ++c) gm.C(r, c) = dist(rng);

  for (int N = 1; N <= 6; ++N) {
    StackedMatrices st = build_stacked(gm, N);
    Eigen::VectorXd z0(nz), u(N * nu), w(N * nz);
    for (int c = 0; c < nz; ++c) z0(c) = dist(rng);
    for (int c = 0; c < u.size(); ++c) u(c) = dist(rng);
    for (int c = 0; c < w.size(); ++c) w(c) = dist(rng);

    Eigen::VectorXd Zbatch = st.G * z0 + st.H * u + st.J * w;
    Eigen::VectorXd Ybatch = st.O * z0 + st.Lam * u + st.Gam * w;

    Eigen::VectorXd z = z0;
    for (int k = 0; k <= N; ++k) {
      CHECK((Zbatch.segment(k * nz, nz) - z).cwiseAbs().maxCoeff() < 1e-12);
      CHECK((Ybatch.segment(k * ny, ny) - gm.C * z).cwiseAbs().maxCoeff() < 1e-12);
      if (k < N)
        z = gm.A * z + gm.B * u.segment(k * nu, nu) + w.segment(k * nz, nz);
    }
  }
}

TEST_CASE("build_stacked rejects empty horizons") {
  GlobalModel gm{Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Zero(2, 1),
                 Eigen::MatrixXd::Identity(2, 2)};
  CHECK_THROWS_AS(build_stacked(gm, 0), std::invalid_argument);
}

TEST_CASE("global lifting concatenates per-subsystem dictionaries") {
  SubsystemTopology t;
  t.m = 2;
  t.nx = {2, 1};
  t.nz = {4, 3};
  t.nu = {2, 0};
  t.ny = {1, 1};
  t.neighbors = {{1}, {0}};
  t.sensor_map = {{0}, {0}};
  t.build_offsets();
  std::vector<LiftingDictionary> sd = {
      LiftingDictionary::elementwise(2, {"identity", "square"}),
      LiftingDictionary::elementwise(1, {"identity", "square", "exp"})};
  Eigen::VectorXd x(3);
  x << 0.2, 0.5, 0.8;
  Eigen::VectorXd z = lift_global(t, sd, x);
  REQUIRE(z.size() == 7);
  CHECK(z(0) == 0.2);
  CHECK(z(2) == doctest::Approx(0.04));
  CHECK(z(4) == 0.8);
  CHECK(z(6) == doctest::Approx(std::exp(0.8)));
  CHECK((reconstruct_state(t, z) - x).cwiseAbs().maxCoeff() == 0.0);

  std::vector<LiftingDictionary> ud(2);
  ud[0] = LiftingDictionary::elementwise(1, {"identity", "square"});
  Eigen::VectorXd u(1);
  u << 0.3;
  Eigen::VectorXd ul = lift_global_input(t, ud, u);
  REQUIRE(ul.size() == 2);
  CHECK(ul(0) == 0.3);
  CHECK(ul(1) == doctest::Approx(0.09));
}

TEST_CASE("column partition of the global state reproduces A z") {
  testutil::LinearSystem s = testutil::make_linear_system(13, {3, 2, 4}, {1, 2, 1});
  Eigen::VectorXd z(s.topo.nz_total());
  std::mt19937_64 rng(14);
  std::normal_distribution<double> dist;
  for (int c = 0; c < z.size(); ++c) z(c) = dist(rng);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(z.size());
  for (int i = 0; i < s.topo.m; ++i)
    sum += s.gm.A.middleCols(s.topo.z_off[i], s.topo.nz[i]) *
           z.segment(s.topo.z_off[i], s.topo.nz[i]);
  CHECK((sum - s.gm.A * z).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("open-loop prediction clips the start and flags divergence") {
  testutil::LinearSystem s = testutil::make_linear_system(19);
  const int nxt = s.topo.nx_total();
  Eigen::VectorXd x0 = Eigen::VectorXd::Constant(nxt, 1.7);
  Eigen::MatrixXd U = Eigen::MatrixXd::Zero(10, s.topo.nu_total());
  Eigen::MatrixXd X = open_loop_predict(s.gm, s.topo, s.state_dicts, x0, U, 10);
  REQUIRE(X.rows() == 11);
  CHECK(X.row(0).maxCoeff() == 1.0);  // clipped to the scaled hull

  // An unstable model must throw a numerical failure, not emit NaNs.
  GlobalModel bad = s.gm;
  bad.A *= 1e6;
  bad.B.setConstant(1e9);
  Eigen::MatrixXd Ubig = Eigen::MatrixXd::Constant(400, s.topo.nu_total(), 1e30);
  CHECK_THROWS_AS(
      open_loop_predict(bad, s.topo, s.state_dicts, Eigen::VectorXd::Constant(nxt, 0.5),
                        Ubig, 400),
      std::runtime_error);
  CHECK_THROWS_AS(
      open_loop_predict(s.gm, s.topo, s.state_dicts, Eigen::VectorXd::Zero(nxt),
                        Eigen::MatrixXd::Zero(3, s.topo.nu_total()), 10),
      std::invalid_argument);
}
