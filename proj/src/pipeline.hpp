#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "config.hpp"
#include "dmhe.hpp"
#include "io.hpp"
#include "simulate.hpp"

namespace kdmhe {

// Simulated trajectory plus the scaled views used by identification and
// estimation, and the row windows the downstream stages operate on.
struct PreparedData {
  SubsystemTopology topo;
  Trajectory traj;
  Scaler state_scaler;
  Scaler input_scaler;
  Eigen::MatrixXd Xs;  // scaled states, all samples
  Eigen::MatrixXd Us;  // scaled raw inputs
  Eigen::MatrixXd Ys;  // measurements scaled with the measured-state scalers
  int train_count = 0;
  int val_start = 0, val_count = 0;
  int est_start = 0, est_count = 0;
};

// Simulate the configured process and fit scalers on the training split.
PreparedData prepare_data(const RunConfig& cfg, std::uint64_t seed);

// Wrap an externally loaded training trajectory: scalers fit on all rows,
// which are the training window (CLI identify path).
PreparedData wrap_training(const RunConfig& cfg, Trajectory traj);

// Scale an externally loaded trajectory with an existing model's scalers;
// all rows form both the validation and estimation windows (CLI path).
PreparedData rescale_with(const ModelContainer& mc, Trajectory traj);

ModelContainer identify_model(const RunConfig& cfg, const PreparedData& d,
                              int threads, double rtol_override = -1.0);

// Lift the scaled raw input rows into the aggregated lifted-input matrix.
Eigen::MatrixXd lift_input_rows(const SubsystemTopology& topo,
                                const std::vector<LiftingDictionary>& input_dicts,
                                const Eigen::MatrixXd& Us);

// Open-loop rollout over the validation window; returns per-state scaled RMSE.
Eigen::VectorXd validation_rmse(const PreparedData& d,
                                const ModelContainer& mc,
                                Eigen::MatrixXd* prediction = nullptr);

EstimatorConfig build_estimator_config(const RunConfig& cfg,
                                       const SubsystemTopology& model_topo,
                                       const Scaler& state_scaler);

struct EstimateMetrics {
  EstimateResult result;
  Eigen::MatrixXd Xhat_scaled;  // estimation-window estimates, scaled
  Eigen::MatrixXd Xhat;         // physical units
  double scaled_rmse = 0.0;     // excludes the N+1 warm-up instants
  Eigen::VectorXd error_norm;   // per-instant scaled error norms
};

// DMHE on the estimation window with the identified lifted models.
EstimateMetrics estimate_koopman(const RunConfig& cfg, const PreparedData& d,
                                 const ModelContainer& mc, int threads);

// DMHE on the estimation window with the Taylor-linearization models
// (reactor network only).
EstimateMetrics estimate_baseline(const RunConfig& cfg, const PreparedData& d,
                                  int threads);

}  // namespace kdmhe
