#pragma once

#include <Eigen/Dense>
#include <vector>

#include "identify.hpp"
#include "lifting.hpp"
#include "topology.hpp"

namespace kdmhe {

struct GlobalModel {
  Eigen::MatrixXd A;  // nz_total x nz_total
  Eigen::MatrixXd B;  // nz_total x nu_total (lifted inputs)
  Eigen::MatrixXd C;  // ny_total x nz_total
};

GlobalModel assemble_global(const std::vector<KoopmanSubsystemModel>& models,
                            const SubsystemTopology& topo);

// Horizon stacks for window length N over the aggregated model.
struct StackedMatrices {
  int N = 0;
  Eigen::MatrixXd O;    // (N+1)ny x nz      : observability stack
  Eigen::MatrixXd Lam;  // (N+1)ny x N nu    : input-to-output
  Eigen::MatrixXd Gam;  // (N+1)ny x N nz    : disturbance-to-output
  Eigen::MatrixXd G;    // (N+1)nz x nz      : state-transition stack
  Eigen::MatrixXd H;    // (N+1)nz x N nu    : input-to-state
  Eigen::MatrixXd J;    // (N+1)nz x N nz    : disturbance-to-state
};

StackedMatrices build_stacked(const GlobalModel& gm, int N);

// Lift and concatenate the aggregated scaled state.
Eigen::VectorXd lift_global(const SubsystemTopology& topo,
                            const std::vector<LiftingDictionary>& state_dicts,
                            const Eigen::VectorXd& x_scaled);

// Lift and concatenate the aggregated scaled raw input row.
Eigen::VectorXd lift_global_input(const SubsystemTopology& topo,
                                  const std::vector<LiftingDictionary>& input_dicts,
                                  const Eigen::VectorXd& u_scaled);

// Open-loop rollout: z(0) = lift(x0_scaled), z(k+1) = A z + B u_lifted(k);
// returns the reconstructed scaled states (rows = steps).
Eigen::MatrixXd open_loop_predict(const GlobalModel& gm,
                                  const SubsystemTopology& topo,
                                  const std::vector<LiftingDictionary>& state_dicts,
                                  const Eigen::VectorXd& x0_scaled,
                                  const Eigen::MatrixXd& U_lifted, int horizon);

// x = D z: first nx coordinates of each subsystem block.
Eigen::VectorXd reconstruct_state(const SubsystemTopology& topo,
                                  const Eigen::VectorXd& z);

}  // namespace kdmhe
