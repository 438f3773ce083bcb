#include "scaler.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace kdmhe {

Scaler Scaler::fit(const Eigen::MatrixXd& samples) {
  if (samples.rows() == 0) throw std::invalid_argument("Scaler::fit: no samples");
  Scaler s;
  s.lo = samples.colwise().minCoeff();
  s.hi = samples.colwise().maxCoeff();
  for (int c = 0; c < s.dim(); ++c)
    if (s.hi[c] <= s.lo[c])
      throw std::invalid_argument("degenerate variable " + std::to_string(c) +
                                  ": constant over the training data");
  return s;
}

Eigen::VectorXd Scaler::apply(const Eigen::VectorXd& x) const {
  return (x - lo).cwiseQuotient(hi - lo);
}

Eigen::MatrixXd Scaler::apply_rows(const Eigen::MatrixXd& X) const {
  return (X.rowwise() - lo.transpose()).array().rowwise() /
         (hi - lo).transpose().array();
}

Eigen::VectorXd Scaler::unscale(const Eigen::VectorXd& s) const {
  return lo + s.cwiseProduct(hi - lo);
}

Scaler Scaler::subset(const std::vector<int>& idx) const {
  Scaler s;
  s.lo.resize(idx.size());
  s.hi.resize(idx.size());
  for (size_t k = 0; k < idx.size(); ++k) {
    s.lo[k] = lo[idx[k]];
    s.hi[k] = hi[idx[k]];
  }
  return s;
}

}  // namespace kdmhe
