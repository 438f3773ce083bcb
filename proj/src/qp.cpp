#include "qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace kdmhe {

namespace {

// Solve the equality-constrained problem for the current working set,
// dropping the most negative multiplier until all are nonnegative.
Eigen::VectorXd solve_with_set(const QuadraticProgram& qp, ActiveSet& W,
                               double tol) {
  const int d = static_cast<int>(qp.H.rows());
  while (true) {
    const int na = static_cast<int>(W.size());
    if (na == 0) {
      Eigen::VectorXd th = qp.H.ldlt().solve(-qp.g);
      if (!th.allFinite()) throw std::runtime_error("qp: singular Hessian");
      return th;
    }
    Eigen::MatrixXd KKT = Eigen::MatrixXd::Zero(d + na, d + na);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(d + na);
    KKT.topLeftCorner(d, d) = qp.H;
    rhs.head(d) = -qp.g;
    for (int a = 0; a < na; ++a) {
      const auto [c, s] = W[a];
      KKT.block(0, d + a, d, 1) = s * qp.E.row(c).transpose();
      KKT.block(d + a, 0, 1, d) = s * qp.E.row(c);
      rhs(d + a) = s * ((s > 0 ? qp.ub(c) : qp.lb(c)) - qp.f(c));
    }
    Eigen::VectorXd sol = KKT.partialPivLu().solve(rhs);
    if (!sol.allFinite()) throw std::runtime_error("qp: singular KKT system");
    // Stationarity is H th + g + sum_a s_a E_a' lam_a = 0 with the KKT
    // blocks as written, so the multipliers come out with their own sign.
    Eigen::VectorXd lam = sol.tail(na);
    int drop = -1;
    double worst = -tol;
    for (int a = 0; a < na; ++a)
      if (lam(a) < worst) {
        worst = lam(a);
        drop = a;
      }
    if (drop < 0) return sol.head(d);
    W.erase(W.begin() + drop);
  }
}

}  // namespace

QpSolution solve_qp(const QuadraticProgram& qp, const ActiveSet* warm,
                    double tol, int max_iter) {
  const int nc = static_cast<int>(qp.E.rows());
  QpSolution sol;
  sol.active = warm ? *warm : ActiveSet{};
  // A stale warm-start row can exceed the current constraint count.
  sol.active.erase(
      std::remove_if(sol.active.begin(), sol.active.end(),
                     [nc](const auto& e) { return e.first >= nc; }),
      sol.active.end());
  sol.theta = solve_with_set(qp, sol.active, tol);
  for (int it = 0; it < max_iter; ++it) {
    sol.iterations = it + 1;
    int best_row = -1, best_side = 0;
    double best_viol = tol;
    if (nc > 0) {
      Eigen::VectorXd r = qp.E * sol.theta + qp.f;
      for (int c = 0; c < nc; ++c) {
        const bool lo_active =
            std::find(sol.active.begin(), sol.active.end(),
                      std::make_pair(c, -1)) != sol.active.end();
        const bool hi_active =
            std::find(sol.active.begin(), sol.active.end(),
                      std::make_pair(c, +1)) != sol.active.end();
        if (std::isfinite(qp.lb(c)) && !lo_active && qp.lb(c) - r(c) > best_viol) {
          best_viol = qp.lb(c) - r(c);
          best_row = c;
          best_side = -1;
        }
        if (std::isfinite(qp.ub(c)) && !hi_active && r(c) - qp.ub(c) > best_viol) {
          best_viol = r(c) - qp.ub(c);
          best_row = c;
          best_side = +1;
        }
      }
    }
    if (best_row < 0) return sol;
    sol.active.emplace_back(best_row, best_side);
    sol.theta = solve_with_set(qp, sol.active, tol);
  }
  throw std::runtime_error("qp: iteration limit reached");
}

double constraint_violation(const QuadraticProgram& qp,
                            const Eigen::VectorXd& theta) {
  if (qp.E.rows() == 0) return 0.0;
  Eigen::VectorXd r = qp.E * theta + qp.f;
  double v = 0.0;
  for (int c = 0; c < r.size(); ++c) {
    if (std::isfinite(qp.lb(c))) v = std::max(v, qp.lb(c) - r(c));
    if (std::isfinite(qp.ub(c))) v = std::max(v, r(c) - qp.ub(c));
  }
  return v;
}

double kkt_residual(const QuadraticProgram& qp, const QpSolution& sol) {
  const int d = static_cast<int>(qp.H.rows());
  const int na = static_cast<int>(sol.active.size());
  Eigen::VectorXd grad = qp.H * sol.theta + qp.g;
  if (na == 0) return grad.lpNorm<Eigen::Infinity>();
  Eigen::MatrixXd At(d, na);
  for (int a = 0; a < na; ++a)
    At.col(a) = sol.active[a].second * qp.E.row(sol.active[a].first).transpose();
  Eigen::VectorXd nu = At.colPivHouseholderQr().solve(-grad);
  return (grad + At * nu).lpNorm<Eigen::Infinity>();
}

}  // namespace kdmhe
