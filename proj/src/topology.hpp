#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace kdmhe {

// Decomposition of the global process into m interacting subsystems.
// All stacked/aggregated matrices in the pipeline follow the subsystem
// ordering fixed here; neighbor sets are kept sorted ascending.
struct SubsystemTopology {
  int m = 0;
  std::vector<int> nx;   // original state dim per subsystem
  std::vector<int> nz;   // lifted state dim per subsystem
  std::vector<int> nu;   // lifted input dim per subsystem (0 allowed)
  std::vector<int> ny;   // measurement dim per subsystem
  std::vector<std::vector<int>> neighbors;  // I_i, 0-based, sorted
  std::vector<std::vector<int>> sensor_map; // measured local original-state indices

  // prefix offsets into the aggregated vectors
  std::vector<int> x_off, z_off, u_off, y_off;

  int nx_total() const { return x_off.empty() ? 0 : x_off.back(); }
  int nz_total() const { return z_off.empty() ? 0 : z_off.back(); }
  int nu_total() const { return u_off.empty() ? 0 : u_off.back(); }
  int ny_total() const { return y_off.empty() ? 0 : y_off.back(); }

  void build_offsets();
  // Returns empty string when valid, else a description of the first
  // violated invariant.
  std::string validate() const;
};

// Columns of a stacked matrix M that belong to subsystem i's z-variables.
// M's columns are one aggregated z vector (blocks = single window slot).
Eigen::MatrixXd select_columns_z(const Eigen::MatrixXd& M,
                                 const SubsystemTopology& topo, int i);

// Columns for subsystem i across `windows` repeated aggregated blocks
// (used for the disturbance stacks whose columns are N aggregated w's).
Eigen::MatrixXd select_columns_z_windows(const Eigen::MatrixXd& M,
                                         const SubsystemTopology& topo, int i,
                                         int windows);

}  // namespace kdmhe
