#pragma once

#include <Eigen/Dense>
#include <vector>

namespace kdmhe {

// Per-variable min-max scaler: scaled = (x - min) / (max - min).
struct Scaler {
  Eigen::VectorXd lo, hi;

  int dim() const { return (int)lo.size(); }
  Eigen::VectorXd range() const { return hi - lo; }

  // Fit from samples (rows = samples). Throws on a degenerate (constant)
  // variable, naming its index.
  static Scaler fit(const Eigen::MatrixXd& samples);

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd apply_rows(const Eigen::MatrixXd& X) const;
  Eigen::VectorXd unscale(const Eigen::VectorXd& s) const;

  // Sub-scaler over a coordinate subset (e.g. the measured coordinates).
  Scaler subset(const std::vector<int>& idx) const;
};

}  // namespace kdmhe
