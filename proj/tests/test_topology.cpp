#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "topology.hpp"

using namespace kdmhe;

namespace {

SubsystemTopology cstr_topology() {
  SubsystemTopology t;
  t.m = 4;
  t.nx = {2, 2, 2, 2};
  t.nz = {6, 6, 6, 6};
  t.nu = {2, 2, 2, 2};
  t.ny = {1, 1, 1, 1};
  t.neighbors = {{1, 3}, {0}, {1}, {2}};
  t.sensor_map = {{0}, {0}, {0}, {0}};
  t.build_offsets();
  return t;
}

}  // namespace

TEST_CASE("single subsystem with no neighbors is valid") {
  SubsystemTopology t;
  t.m = 1;
  t.nx = {3};
  t.nz = {3};
  t.nu = {1};
  t.ny = {1};
  t.neighbors = {{}};
  t.sensor_map = {{0}};
  t.build_offsets();
  CHECK(t.validate().empty());
  CHECK(t.nx_total() == 3);
}

TEST_CASE("reactor-network topology validates") {
  SubsystemTopology t = cstr_topology();
  CHECK(t.validate().empty());
  CHECK(t.nz_total() == 24);
  CHECK(t.nu_total() == 8);
  CHECK(t.ny_total() == 4);
  CHECK(t.z_off == std::vector<int>{0, 6, 12, 18, 24});
}

TEST_CASE("self-coupling is rejected") {
  SubsystemTopology t = cstr_topology();
  t.neighbors[1] = {1};
  CHECK(!t.validate().empty());
}

TEST_CASE("dimension mismatches are rejected") {
  SubsystemTopology t = cstr_topology();
  t.nz = {6, 6, 6};
  CHECK(!t.validate().empty());
  t = cstr_topology();
  t.neighbors[0] = {1, 4};  // out of range
  CHECK(!t.validate().empty());
  t = cstr_topology();
  t.nz[2] = 1;  // lifted dim below original dim
  CHECK(!t.validate().empty());
  t = cstr_topology();
  t.sensor_map[3] = {2};  // selects a state outside the subsystem
  CHECK(!t.validate().empty());
}

TEST_CASE("neighbor sets are sorted at construction") {
  SubsystemTopology t = cstr_topology();
  t.neighbors[0] = {3, 1};
  t.build_offsets();
  CHECK(t.neighbors[0] == std::vector<int>{1, 3});
}

TEST_CASE("column selection picks the block of one subsystem") {
  SubsystemTopology t;
  t.m = 2;
  t.nx = {2, 3};
  t.nz = {2, 3};
  t.nu = {0, 0};
  t.ny = {1, 1};
  t.neighbors = {{}, {}};
  t.sensor_map = {{0}, {0}};
  t.build_offsets();
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(4, 5);
  M.block(0, 0, 2, 2) = Eigen::MatrixXd::Constant(2, 2, 1.0);  // A_11
  M.block(2, 2, 2, 3) = Eigen::MatrixXd::Constant(2, 3, 2.0);  // A_22
  Eigen::MatrixXd M2 = select_columns_z(M, t, 1);
  CHECK(M2.rows() == 4);
  CHECK(M2.cols() == 3);
  CHECK(M2.topRows(2).isZero(0));
  CHECK(M2.bottomRows(2).isApprox(Eigen::MatrixXd::Constant(2, 3, 2.0)));
}

TEST_CASE("windowed column selection is disjoint and covers the stack") {
  SubsystemTopology t;
  t.m = 3;
  t.nx = {2, 1, 3};
  t.nz = {2, 1, 3};
  t.nu = {0, 0, 0};
  t.ny = {1, 1, 1};
  t.neighbors = {{1}, {0, 2}, {1}};
  t.sensor_map = {{0}, {0}, {0}};
  t.build_offsets();
  const int N = 4, tot = t.nz_total();
  Eigen::MatrixXd M = Eigen::MatrixXd::Random(7, N * tot);
  // Reassembling the per-subsystem selections recovers every column once.
  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(7, N * tot);
  for (int i = 0; i < t.m; ++i) {
    Eigen::MatrixXd Mi = select_columns_z_windows(M, t, i, N);
    CHECK(Mi.cols() == N * t.nz[i]);
    for (int w = 0; w < N; ++w)
      R.middleCols(w * tot + t.z_off[i], t.nz[i]) =
          Mi.middleCols(w * t.nz[i], t.nz[i]);
  }
  CHECK((R - M).norm() == 0.0);
}

TEST_CASE("column selection rejects mismatched widths") {
  SubsystemTopology t = cstr_topology();
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(3, 23);
  CHECK_THROWS(select_columns_z(M, t, 0));
}
