#include "identify.hpp"

#include <stdexcept>
#include <thread>

namespace kdmhe {

SnapshotSet build_snapshots(const Eigen::MatrixXd& X_scaled,
                            const Eigen::MatrixXd& U_scaled,
                            const SubsystemTopology& topo) {
  const int T = (int)X_scaled.rows();
  if (T < 2) throw std::invalid_argument("build_snapshots: need at least 2 samples");
  SnapshotSet s;
  s.columns = T - 1;
  s.X.resize(topo.m);
  s.Xbar.resize(topo.m);
  s.U.resize(topo.m);
  int ucol = 0;
  for (int i = 0; i < topo.m; ++i) {
    s.X[i] = X_scaled.block(0, topo.x_off[i], T - 1, topo.nx[i]).transpose();
    s.Xbar[i] = X_scaled.block(1, topo.x_off[i], T - 1, topo.nx[i]).transpose();
    // original (unlifted) input columns per subsystem, in subsystem order
    const int nu_raw = topo.nu[i] > 0 ? 1 : 0;  // both case studies: scalar raw inputs
    if (nu_raw > 0) {
      s.U[i] = U_scaled.block(0, ucol, T - 1, 1).transpose();
      ucol += 1;
    } else {
      s.U[i].resize(0, T - 1);
    }
  }
  return s;
}

namespace {
Eigen::MatrixXd lift_columns(const LiftingDictionary& dict,
                             const Eigen::MatrixXd& cols) {
  Eigen::MatrixXd out(dict.lifted_dim(), cols.cols());
  for (int k = 0; k < cols.cols(); ++k) out.col(k) = dict.lift(cols.col(k));
  return out;
}

// K = Z * pinv(Psi), SVD pseudoinverse with relative truncation
Eigen::MatrixXd pinv_regress(const Eigen::MatrixXd& Z, const Eigen::MatrixXd& Psi,
                             double rtol, int* rank_out, int* trunc_out) {
  Eigen::BDCSVD<Eigen::MatrixXd> svd(Psi, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double cut = rtol * sv[0];
  int rank = 0;
  for (int k = 0; k < sv.size(); ++k)
    if (sv[k] > cut) ++rank;
  if (rank_out) *rank_out = rank;
  if (trunc_out) *trunc_out = (int)sv.size() - rank;
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(sv.size());
  for (int k = 0; k < rank; ++k) inv[k] = 1.0 / sv[k];
  // pinv(Psi) = V diag(inv) U^T
  return Z * svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}
}  // namespace

KoopmanSubsystemModel identify_subsystem(
    const SnapshotSet& snaps, const SubsystemTopology& topo,
    const std::vector<LiftingDictionary>& state_dicts,
    const std::vector<LiftingDictionary>& input_dicts, int i, double rtol,
    IdentifyDiagnostics* diag) {
  const int N = snaps.columns;
  Eigen::MatrixXd Zi = lift_columns(state_dicts[i], snaps.X[i]);
  Eigen::MatrixXd Zn = lift_columns(state_dicts[i], snaps.Xbar[i]);
  int rows = (int)Zi.rows();
  for (int j : topo.neighbors[i]) rows += state_dicts[j].lifted_dim();
  const int nui = topo.nu[i] > 0 ? input_dicts[i].lifted_dim() : 0;
  rows += nui;

  Eigen::MatrixXd Psi(rows, N);
  int r = 0;
  Psi.middleRows(r, Zi.rows()) = Zi;
  r += (int)Zi.rows();
  for (int j : topo.neighbors[i]) {
    Psi.middleRows(r, state_dicts[j].lifted_dim()) =
        lift_columns(state_dicts[j], snaps.X[j]);
    r += state_dicts[j].lifted_dim();
  }
  if (nui > 0) {
    Psi.middleRows(r, nui) = lift_columns(input_dicts[i], snaps.U[i]);
    r += nui;
  }

  int rank = 0, trunc = 0;
  Eigen::MatrixXd Kb = pinv_regress(Zn, Psi, rtol, &rank, &trunc);

  KoopmanSubsystemModel mdl;
  int c = 0;
  mdl.A_ii = Kb.middleCols(c, topo.nz[i]);
  c += topo.nz[i];
  for (int j : topo.neighbors[i]) {
    mdl.A_ij[j] = Kb.middleCols(c, topo.nz[j]);
    c += topo.nz[j];
  }
  mdl.B = Kb.middleCols(c, nui);
  mdl.C = output_matrix(topo, i);
  if (diag) {
    diag->rank[i] = rank;
    diag->truncated[i] = trunc;
    diag->residual[i] = (Zn - Kb * Psi).norm() / std::max(Zn.norm(), 1e-300);
  }
  return mdl;
}

std::vector<KoopmanSubsystemModel> identify_all(
    const SnapshotSet& snaps, const SubsystemTopology& topo,
    const std::vector<LiftingDictionary>& state_dicts,
    const std::vector<LiftingDictionary>& input_dicts, double rtol,
    int threads, IdentifyDiagnostics* diag) {
  if (diag) {
    diag->rank.assign(topo.m, 0);
    diag->truncated.assign(topo.m, 0);
    diag->residual.assign(topo.m, 0.0);
  }
  std::vector<KoopmanSubsystemModel> models(topo.m);
  if (threads <= 1) {
    for (int i = 0; i < topo.m; ++i)
      models[i] = identify_subsystem(snaps, topo, state_dicts, input_dicts, i,
                                     rtol, diag);
    return models;
  }
  std::vector<std::thread> pool;
  std::atomic<int> next{0};
  for (int w = 0; w < threads; ++w)
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < topo.m; i = next.fetch_add(1))
        models[i] = identify_subsystem(snaps, topo, state_dicts, input_dicts, i,
                                       rtol, diag);
    });
  for (auto& t : pool) t.join();
  return models;
}

Eigen::MatrixXd output_matrix(const SubsystemTopology& topo, int i) {
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(topo.ny[i], topo.nz[i]);
  for (int s = 0; s < topo.ny[i]; ++s) C(s, topo.sensor_map[i][s]) = 1.0;
  return C;
}

Eigen::MatrixXd regress_output(const Eigen::MatrixXd& Y,
                               const Eigen::MatrixXd& Phi, double rtol) {
  int rank = 0, trunc = 0;
  return pinv_regress(Y, Phi, rtol, &rank, &trunc);
}

}  // namespace kdmhe
