#include "cstr.hpp"

#include <cmath>
#include <stdexcept>

namespace kdmhe {

namespace {
// total consumption rate sum_r k0_r exp(-E_r/RT) * C and the matching
// heat release divided by rho*cp
inline void reaction_terms(const CstrConfig& c, double T, double C,
                           double& rate, double& heat) {
  rate = 0.0;
  heat = 0.0;
  for (int r = 0; r < 3; ++r) {
    const double kr = c.k0[r] * std::exp(-c.EoR[r] / T);
    rate += kr * C;
    heat += c.dH[r] / c.rhocp * kr * C;
  }
}
}  // namespace

Eigen::VectorXd cstr_rhs(const CstrConfig& c, const Eigen::VectorXd& x,
                         const Eigen::Vector4d& Q) {
  const double T1 = x[0], C1 = x[1], T2 = x[2], C2 = x[3];
  const double T3 = x[4], C3 = x[5], T4 = x[6], C4 = x[7];
  double r1, h1, r2, h2, r3, h3, r4, h4;
  reaction_terms(c, T1, C1, r1, h1);
  reaction_terms(c, T2, C2, r2, h2);
  reaction_terms(c, T3, C3, r3, h3);
  reaction_terms(c, T4, C4, r4, h4);

  Eigen::VectorXd f(8);
  f[0] = c.F01 / c.V[0] * (c.T0[0] - T1) + c.Fr1 / c.V[0] * (T2 - T1) +
         c.Fr2 / c.V[0] * (T4 - T1) - h1 + Q[0] / (c.rhocp * c.V[0]);
  f[1] = c.F01 / c.V[0] * (c.CA0[0] - C1) + c.Fr1 / c.V[0] * (C2 - C1) +
         c.Fr2 / c.V[0] * (C4 - C1) - r1;
  f[2] = c.F1() / c.V[1] * (T1 - T2) + c.F02 / c.V[1] * (c.T0[1] - T2) - h2 +
         Q[1] / (c.rhocp * c.V[1]);
  f[3] = c.F1() / c.V[1] * (C1 - C2) + c.F02 / c.V[1] * (c.CA0[1] - C2) - r2;
  f[4] = (c.F2() - c.Fr1) / c.V[2] * (T2 - T3) +
         c.F03 / c.V[2] * (c.T0[2] - T3) - h3 + Q[2] / (c.rhocp * c.V[2]);
  f[5] = (c.F2() - c.Fr1) / c.V[2] * (C2 - C3) +
         c.F03 / c.V[2] * (c.CA0[2] - C3) - r3;
  f[6] = c.F3() / c.V[3] * (T3 - T4) + c.F04 / c.V[3] * (c.T0[3] - T4) - h4 +
         Q[3] / (c.rhocp * c.V[3]);
  f[7] = c.F3() / c.V[3] * (C3 - C4) + c.F04 / c.V[3] * (c.CA0[3] - C4) - r4;
  return f;
}

Eigen::VectorXd step_cstr(const CstrConfig& c, const Eigen::VectorXd& x,
                          const Eigen::Vector4d& Q) {
  const double h = c.dt_h / c.rk4_substeps;
  Eigen::VectorXd s = x;
  for (int k = 0; k < c.rk4_substeps; ++k) {
    const Eigen::VectorXd k1 = cstr_rhs(c, s, Q);
    const Eigen::VectorXd k2 = cstr_rhs(c, s + 0.5 * h * k1, Q);
    const Eigen::VectorXd k3 = cstr_rhs(c, s + 0.5 * h * k2, Q);
    const Eigen::VectorXd k4 = cstr_rhs(c, s + h * k3, Q);
    s += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  if (!s.allFinite())
    throw std::runtime_error("step_cstr: integration produced non-finite state");
  return s;
}

}  // namespace kdmhe
