#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "cstr.hpp"
#include "richards.hpp"
#include "topology.hpp"

namespace kdmhe {

struct NoiseSpec {
  Eigen::VectorXd sigma_w;  // per state
  Eigen::VectorXd sigma_v;  // per measurement channel
  double truncation = 5.0;  // +/- truncation multiple of sigma
  std::uint64_t seed = 0;
};

struct Trajectory {
  Eigen::VectorXd t;  // timestamps (h for CSTR, min for agro)
  Eigen::MatrixXd X;  // true states, rows = samples
  Eigen::MatrixXd U;  // known inputs (original units, pre-lifting)
  Eigen::MatrixXd Y;  // noisy measurements
  std::uint64_t seed = 0;
};

// Piecewise-constant input levels, i.i.d. uniform within [lo, hi], each
// level held for hold_samples.
Eigen::MatrixXd generate_inputs(const Eigen::VectorXd& lo,
                                const Eigen::VectorXd& hi, int horizon,
                                int hold_samples, std::uint64_t seed);

// Global measurement H x for the given topology/sensor maps.
Eigen::VectorXd measure(const SubsystemTopology& topo, const Eigen::VectorXd& x);

// CSTR trajectory: nsteps+1 samples; process noise added after each
// integration step and fed back, measurement noise on the recorded outputs.
Trajectory simulate_cstr(const CstrConfig& config, const SubsystemTopology& topo,
                         const Eigen::VectorXd& x0, int nsteps,
                         const NoiseSpec& noise);

// Agro trajectory; heads are clipped to (lo_clip, hi_clip) after noise to
// keep the profile unsaturated. A settle period without noise precedes
// data collection.
Trajectory simulate_agro(const SoilConfig& config, const SubsystemTopology& topo,
                         const Eigen::VectorXd& h0, int settle_steps, int nsteps,
                         const NoiseSpec& noise, double lo_clip = -1.0,
                         double hi_clip = -1e-6);

}  // namespace kdmhe
