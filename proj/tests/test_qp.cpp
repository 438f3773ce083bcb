#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "qp.hpp"

#include <cmath>
#include <limits>
#include <random>

using namespace kdmhe;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

QuadraticProgram random_qp(std::mt19937_64& rng, int n, int nc) {
  std::normal_distribution<double> dist;
  std::uniform_real_distribution<double> uni(0.2, 1.2);
  QuadraticProgram qp;
  Eigen::MatrixXd L(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) L(r, c) = dist(rng);
  qp.H = L * L.transpose() + 0.2 * Eigen::MatrixXd::Identity(n, n);
  qp.g.resize(n);
  for (int c = 0; c < n; ++c) qp.g(c) = dist(rng);
  qp.E.resize(nc, n);
  for (int r = 0; r < nc; ++r)
    for (int c = 0; c < n; ++c) qp.E(r, c) = dist(rng);
  qp.f.resize(nc);
  qp.lb.resize(nc);
  qp.ub.resize(nc);
  for (int r = 0; r < nc; ++r) qp.f(r) = 0.3 * dist(rng);
  // Center each box on a common interior point so the QP is always feasible.
  Eigen::VectorXd th0(n);
  for (int c = 0; c < n; ++c) th0(c) = dist(rng);
  Eigen::VectorXd mid = qp.E * th0 + qp.f;
  for (int r = 0; r < nc; ++r) {
    qp.lb(r) = mid(r) - uni(rng);
    qp.ub(r) = mid(r) + uni(rng);
  }
  return qp;
}

double objective(const QuadraticProgram& qp, const Eigen::VectorXd& th) {
  return 0.5 * th.dot(qp.H * th) + qp.g.dot(th);
}

// Brute-force oracle: enumerate every lower/free/upper pattern over the
// constraint rows and keep the best feasible KKT-consistent candidate.
Eigen::VectorXd enumerate_qp(const QuadraticProgram& qp) {
  const int nc = (int)qp.E.rows();
  Eigen::VectorXd best;
  double best_val = kInf;
  const long patterns = (long)std::pow(3.0, nc);
  for (long p = 0; p < patterns; ++p) {
    long rem = p;
    std::vector<int> side(nc);
    for (int r = 0; r < nc; ++r) {
      side[r] = (int)(rem % 3) - 1;  // -1 lower, 0 free, +1 upper
      rem /= 3;
    }
    int na = 0;
    for (int r = 0; r < nc; ++r)
      if (side[r] != 0) ++na;
    const int n = (int)qp.H.rows();
    Eigen::MatrixXd K(n + na, n + na);
    Eigen::VectorXd rhs(n + na);
    K.setZero();
    K.topLeftCorner(n, n) = qp.H;
    rhs.head(n) = -qp.g;
    int row = 0;
    for (int r = 0; r < nc; ++r) {
      if (side[r] == 0) continue;
      K.block(n + row, 0, 1, n) = qp.E.row(r);
      K.block(0, n + row, n, 1) = qp.E.row(r).transpose();
      rhs(n + row) = (side[r] > 0 ? qp.ub(r) : qp.lb(r)) - qp.f(r);
      ++row;
    }
    Eigen::VectorXd sol = K.fullPivLu().solve(rhs);
    Eigen::VectorXd th = sol.head(n);
    if (!th.allFinite()) continue;
    if (constraint_violation(qp, th) > 1e-9) continue;
    double val = objective(qp, th);
    if (val < best_val) {
      best_val = val;
      best = th;
    }
  }
  return best;
}

}  // namespace

TEST_CASE("unconstrained QP returns the Newton step") {
  std::mt19937_64 rng(1);
  QuadraticProgram qp = random_qp(rng, 4, 2);
  qp.lb.setConstant(-kInf);
  qp.ub.setConstant(kInf);
  QpSolution sol = solve_qp(qp);
  CHECK(sol.active.empty());
  Eigen::VectorXd exact = qp.H.ldlt().solve(-qp.g);
  CHECK((sol.theta - exact).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("scalar QP clips onto the active bound") {
  // min (th - 2)^2 s.t. th <= 0.5  ->  th* = 0.5.
  QuadraticProgram qp;
  qp.H = Eigen::MatrixXd::Constant(1, 1, 2.0);
  qp.g = Eigen::VectorXd::Constant(1, -4.0);
  qp.E = Eigen::MatrixXd::Identity(1, 1);
  qp.f = Eigen::VectorXd::Zero(1);
  qp.lb = Eigen::VectorXd::Constant(1, -kInf);
  qp.ub = Eigen::VectorXd::Constant(1, 0.5);
  QpSolution sol = solve_qp(qp);
  CHECK(sol.theta(0) == doctest::Approx(0.5).epsilon(1e-12));
  REQUIRE(sol.active.size() == 1);
  CHECK(sol.active[0].first == 0);
  CHECK(sol.active[0].second == 1);
}

TEST_CASE("active-set solution matches exhaustive enumeration on 100 QPs") {
  // Acceptance criterion: random strictly convex QPs with box rows, checked
  // against the 3^nc enumeration oracle to 1e-8.
  std::mt19937_64 rng(2024);
  int solved = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + (int)(trial % 4);
    const int nc = 1 + (int)(trial % 5);
    QuadraticProgram qp = random_qp(rng, n, nc);
    Eigen::VectorXd oracle = enumerate_qp(qp);
    REQUIRE(oracle.size() == n);
    QpSolution sol = solve_qp(qp);
    CHECK((sol.theta - oracle).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(constraint_violation(qp, sol.theta) <= 1e-9);
    CHECK(kkt_residual(qp, sol) < 1e-7);
    ++solved;
  }
  CHECK(solved == 100);
}

TEST_CASE("infinite rows never enter the working set") {
  std::mt19937_64 rng(9);
  QuadraticProgram qp = random_qp(rng, 3, 4);
  qp.lb(1) = -kInf;
  qp.ub(1) = kInf;
  QpSolution sol = solve_qp(qp);
  for (auto& [row, side] : sol.active) CHECK(row != 1);
  CHECK(constraint_violation(qp, sol.theta) <= 1e-9);
}

TEST_CASE("warm start reuses the optimal active set in fewer iterations") {
  std::mt19937_64 rng(33);
  QuadraticProgram qp = random_qp(rng, 5, 4);
  // Tighten around the box centers so several rows are active.
  Eigen::VectorXd mid = 0.5 * (qp.lb + qp.ub);
  qp.lb = mid.array() - 0.05;
  qp.ub = mid.array() + 0.05;
  QpSolution cold = solve_qp(qp);
  QpSolution warm = solve_qp(qp, &cold.active);
  CHECK((warm.theta - cold.theta).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(warm.iterations <= cold.iterations);
  // Stale rows beyond the constraint count are discarded, not fatal.
  ActiveSet stale = cold.active;
  stale.emplace_back(99, 1);
  QpSolution pruned = solve_qp(qp, &stale);
  CHECK((pruned.theta - cold.theta).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("solution is invariant to constraint row scaling") {
  std::mt19937_64 rng(50);
  QuadraticProgram qp = random_qp(rng, 4, 3);
  QpSolution a = solve_qp(qp);
  QuadraticProgram scaled = qp;
  scaled.E.row(1) *= 40.0;
  scaled.f(1) *= 40.0;
  scaled.lb(1) *= 40.0;
  scaled.ub(1) *= 40.0;
  QpSolution b = solve_qp(scaled);
  CHECK((a.theta - b.theta).cwiseAbs().maxCoeff() < 1e-8);
}
