#include "predict.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace kdmhe {

GlobalModel assemble_global(const std::vector<KoopmanSubsystemModel>& models,
                            const SubsystemTopology& topo) {
  const int nzt = topo.z_off[topo.m];
  const int nut = topo.u_off[topo.m];
  const int nyt = topo.y_off[topo.m];
  GlobalModel gm;
  gm.A = Eigen::MatrixXd::Zero(nzt, nzt);
  gm.B = Eigen::MatrixXd::Zero(nzt, nut);
  gm.C = Eigen::MatrixXd::Zero(nyt, nzt);
  for (int i = 0; i < topo.m; ++i) {
    const auto& mi = models[i];
    gm.A.block(topo.z_off[i], topo.z_off[i], topo.nz[i], topo.nz[i]) = mi.A_ii;
    for (const auto& [j, Aij] : mi.A_ij)
      gm.A.block(topo.z_off[i], topo.z_off[j], topo.nz[i], topo.nz[j]) = Aij;
    if (topo.nu[i] > 0)
      gm.B.block(topo.z_off[i], topo.u_off[i], topo.nz[i], topo.nu[i]) = mi.B;
    gm.C.block(topo.y_off[i], topo.z_off[i], topo.ny[i], topo.nz[i]) = mi.C;
  }
  return gm;
}

StackedMatrices build_stacked(const GlobalModel& gm, int N) {
  if (N < 1) throw std::invalid_argument("build_stacked: N must be >= 1");
  const int nz = static_cast<int>(gm.A.rows());
  const int nu = static_cast<int>(gm.B.cols());
  const int ny = static_cast<int>(gm.C.rows());
  StackedMatrices st;
  st.N = N;
  st.G = Eigen::MatrixXd::Zero((N + 1) * nz, nz);
  st.H = Eigen::MatrixXd::Zero((N + 1) * nz, N * nu);
  st.J = Eigen::MatrixXd::Zero((N + 1) * nz, N * nz);
  // Powers of A: G row-block r = A^r.
  Eigen::MatrixXd Ar = Eigen::MatrixXd::Identity(nz, nz);
  st.G.block(0, 0, nz, nz) = Ar;
  for (int r = 1; r <= N; ++r) {
    Ar = gm.A * Ar;
    st.G.block(r * nz, 0, nz, nz) = Ar;
  }
  // Row-block r, column-block c (c < r): A^{r-1-c} B and A^{r-1-c}.
  for (int r = 1; r <= N; ++r) {
    for (int c = 0; c < r; ++c) {
      const Eigen::MatrixXd& Ap = st.G.block((r - 1 - c) * nz, 0, nz, nz);
      st.H.block(r * nz, c * nu, nz, nu) = Ap * gm.B;
      st.J.block(r * nz, c * nz, nz, nz) = Ap;
    }
  }
  st.O = Eigen::MatrixXd::Zero((N + 1) * ny, nz);
  st.Lam = Eigen::MatrixXd::Zero((N + 1) * ny, N * nu);
  st.Gam = Eigen::MatrixXd::Zero((N + 1) * ny, N * nz);
  for (int r = 0; r <= N; ++r) {
    st.O.block(r * ny, 0, ny, nz) = gm.C * st.G.block(r * nz, 0, nz, nz);
    if (r > 0) {
      st.Lam.block(r * ny, 0, ny, N * nu) = gm.C * st.H.block(r * nz, 0, nz, N * nu);
      st.Gam.block(r * ny, 0, ny, N * nz) = gm.C * st.J.block(r * nz, 0, nz, N * nz);
    }
  }
  return st;
}

Eigen::VectorXd lift_global(const SubsystemTopology& topo,
                            const std::vector<LiftingDictionary>& state_dicts,
                            const Eigen::VectorXd& x_scaled) {
  Eigen::VectorXd z(topo.z_off[topo.m]);
  for (int i = 0; i < topo.m; ++i) {
    Eigen::VectorXd xi = x_scaled.segment(topo.x_off[i], topo.nx[i]);
    z.segment(topo.z_off[i], topo.nz[i]) = state_dicts[i].lift(xi);
  }
  return z;
}

Eigen::VectorXd lift_global_input(const SubsystemTopology& topo,
                                  const std::vector<LiftingDictionary>& input_dicts,
                                  const Eigen::VectorXd& u_scaled) {
  Eigen::VectorXd ul(topo.u_off[topo.m]);
  int raw = 0;
  for (int i = 0; i < topo.m; ++i) {
    const int nraw = input_dicts[i].input_dim;
    if (topo.nu[i] == 0) {
      raw += nraw;
      continue;
    }
    Eigen::VectorXd ui = u_scaled.segment(raw, nraw);
    ul.segment(topo.u_off[i], topo.nu[i]) = input_dicts[i].lift(ui);
    raw += nraw;
  }
  return ul;
}

Eigen::VectorXd reconstruct_state(const SubsystemTopology& topo,
                                  const Eigen::VectorXd& z) {
  Eigen::VectorXd x(topo.x_off[topo.m]);
  for (int i = 0; i < topo.m; ++i)
    x.segment(topo.x_off[i], topo.nx[i]) = z.segment(topo.z_off[i], topo.nx[i]);
  return x;
}

Eigen::MatrixXd open_loop_predict(const GlobalModel& gm,
                                  const SubsystemTopology& topo,
                                  const std::vector<LiftingDictionary>& state_dicts,
                                  const Eigen::VectorXd& x0_scaled,
                                  const Eigen::MatrixXd& U_lifted, int horizon) {
  if (U_lifted.rows() < horizon)
    throw std::invalid_argument("open_loop_predict: not enough input rows");
  const int nxt = topo.x_off[topo.m];
  Eigen::VectorXd x0 = x0_scaled.cwiseMax(0.0).cwiseMin(1.0);
  Eigen::VectorXd z = lift_global(topo, state_dicts, x0);
  Eigen::MatrixXd X(horizon + 1, nxt);
  X.row(0) = reconstruct_state(topo, z).transpose();
  for (int k = 0; k < horizon; ++k) {
    z = gm.A * z + gm.B * U_lifted.row(k).transpose();
    if (!z.allFinite())
      throw std::runtime_error("open_loop_predict: non-finite state at step " +
                               std::to_string(k + 1));
    X.row(k + 1) = reconstruct_state(topo, z).transpose();
  }
  return X;
}

}  // namespace kdmhe
