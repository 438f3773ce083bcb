#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

namespace kdmhe {

// min 0.5 th' H th + g' th  s.t.  lb <= E th + f <= ub.
// Rows of lb/ub equal to +/-infinity are unconstrained on that side.
struct QuadraticProgram {
  Eigen::MatrixXd H;
  Eigen::VectorXd g;
  Eigen::MatrixXd E;
  Eigen::VectorXd f;
  Eigen::VectorXd lb;
  Eigen::VectorXd ub;
};

// Working-set entry: constraint row index and active side (+1 upper, -1 lower).
using ActiveSet = std::vector<std::pair<int, int>>;

struct QpSolution {
  Eigen::VectorXd theta;
  ActiveSet active;
  int iterations = 0;
};

// Primal active-set method: start from the unconstrained minimizer, add the
// most violated bound, drop constraints with negative multipliers.
// warm: optional initial working set. Throws on singular KKT / iteration cap.
QpSolution solve_qp(const QuadraticProgram& qp, const ActiveSet* warm = nullptr,
                    double tol = 1e-9, int max_iter = 200);

// Max constraint violation of theta (0 when feasible).
double constraint_violation(const QuadraticProgram& qp,
                            const Eigen::VectorXd& theta);

// Max KKT stationarity residual given the solution's active set.
double kkt_residual(const QuadraticProgram& qp, const QpSolution& sol);

}  // namespace kdmhe
