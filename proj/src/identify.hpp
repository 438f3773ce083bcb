#pragma once

#include <Eigen/Dense>
#include <map>
#include <vector>

#include "lifting.hpp"
#include "scaler.hpp"
#include "topology.hpp"

namespace kdmhe {

// Snapshot matrices per subsystem, assembled from SCALED samples.
// X[i] has N columns x_i(1..N), Xbar[i] the one-step shift, U[i] the
// (unlifted) scaled inputs aligned with X.
struct SnapshotSet {
  std::vector<Eigen::MatrixXd> X, Xbar, U;
  int columns = 0;
};

struct KoopmanSubsystemModel {
  Eigen::MatrixXd A_ii;
  std::map<int, Eigen::MatrixXd> A_ij;  // keyed by neighbor index
  Eigen::MatrixXd B;                    // nz x n_u_lifted (may be 0 cols)
  Eigen::MatrixXd C;                    // ny x nz
  // D = [I 0] is implicit: x = first nx lifted coordinates.
};

struct IdentifyDiagnostics {
  std::vector<int> rank;           // numerical rank of each regressor
  std::vector<int> truncated;      // singular values dropped by rtol
  std::vector<double> residual;    // ||Znext - K Psi||_F / ||Znext||_F
};

SnapshotSet build_snapshots(const Eigen::MatrixXd& X_scaled,
                            const Eigen::MatrixXd& U_scaled,
                            const SubsystemTopology& topo);

// EDMD least squares for one subsystem: K = phi(Xbar) * pinv(Psi) with the
// pseudoinverse via SVD, truncating singular values below rtol * sigma_max.
KoopmanSubsystemModel identify_subsystem(
    const SnapshotSet& snaps, const SubsystemTopology& topo,
    const std::vector<LiftingDictionary>& state_dicts,
    const std::vector<LiftingDictionary>& input_dicts, int i, double rtol,
    IdentifyDiagnostics* diag = nullptr);

// All subsystems; fits run on `threads` workers (1 = sequential) and are
// bitwise identical either way.
std::vector<KoopmanSubsystemModel> identify_all(
    const SnapshotSet& snaps, const SubsystemTopology& topo,
    const std::vector<LiftingDictionary>& state_dicts,
    const std::vector<LiftingDictionary>& input_dicts, double rtol,
    int threads = 1, IdentifyDiagnostics* diag = nullptr);

// C_i = [H_i | 0] for linear sensor maps (both case studies).
Eigen::MatrixXd output_matrix(const SubsystemTopology& topo, int i);

// Least-squares pseudoinverse regression Y = M * Phi for the general
// output path: returns M = Y * pinv(Phi).
Eigen::MatrixXd regress_output(const Eigen::MatrixXd& Y,
                               const Eigen::MatrixXd& Phi, double rtol);

}  // namespace kdmhe
