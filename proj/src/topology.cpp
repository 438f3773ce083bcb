#include "topology.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace kdmhe {

void SubsystemTopology::build_offsets() {
  auto prefix = [](const std::vector<int>& v) {
    std::vector<int> off(v.size() + 1, 0);
    std::partial_sum(v.begin(), v.end(), off.begin() + 1);
    return off;
  };
  x_off = prefix(nx);
  z_off = prefix(nz);
  u_off = prefix(nu);
  y_off = prefix(ny);
  for (auto& nb : neighbors) std::sort(nb.begin(), nb.end());
}

std::string SubsystemTopology::validate() const {
  std::ostringstream err;
  if (m <= 0) return "subsystem count must be positive";
  auto sized = [&](const auto& v, const char* name) {
    if ((int)v.size() != m) {
      err << name << " has " << v.size() << " entries, expected " << m;
      return false;
    }
    return true;
  };
  if (!sized(nx, "nx") || !sized(nz, "nz") || !sized(nu, "nu") ||
      !sized(ny, "ny") || !sized(neighbors, "neighbors") ||
      !sized(sensor_map, "sensor_map"))
    return err.str();
  for (int i = 0; i < m; ++i) {
    if (nx[i] <= 0) { err << "nx[" << i << "] must be positive"; return err.str(); }
    if (nz[i] < nx[i]) {
      err << "nz[" << i << "]=" << nz[i] << " smaller than nx[" << i << "]=" << nx[i];
      return err.str();
    }
    if (nu[i] < 0 || ny[i] < 0) { err << "negative dimension at subsystem " << i; return err.str(); }
    for (int j : neighbors[i]) {
      if (j == i) { err << "subsystem " << i << " lists itself as neighbor"; return err.str(); }
      if (j < 0 || j >= m) {
        err << "neighbors[" << i << "] contains out-of-range index " << j;
        return err.str();
      }
    }
    if ((int)sensor_map[i].size() != ny[i]) {
      err << "sensor_map[" << i << "] size " << sensor_map[i].size()
          << " does not match ny[" << i << "]=" << ny[i];
      return err.str();
    }
    for (int s : sensor_map[i]) {
      if (s < 0 || s >= nx[i]) {
        err << "sensor_map[" << i << "] selects out-of-range state " << s;
        return err.str();
      }
    }
  }
  return "";
}

Eigen::MatrixXd select_columns_z(const Eigen::MatrixXd& M,
                                 const SubsystemTopology& topo, int i) {
  if (M.cols() != topo.nz_total())
    throw std::invalid_argument("select_columns_z: column count mismatch");
  return M.middleCols(topo.z_off[i], topo.nz[i]);
}

Eigen::MatrixXd select_columns_z_windows(const Eigen::MatrixXd& M,
                                         const SubsystemTopology& topo, int i,
                                         int windows) {
  const int tot = topo.nz_total();
  if (M.cols() != (Eigen::Index)windows * tot)
    throw std::invalid_argument("select_columns_z_windows: column count mismatch");
  Eigen::MatrixXd out(M.rows(), (Eigen::Index)windows * topo.nz[i]);
  for (int w = 0; w < windows; ++w)
    out.middleCols((Eigen::Index)w * topo.nz[i], topo.nz[i]) =
        M.middleCols((Eigen::Index)w * tot + topo.z_off[i], topo.nz[i]);
  return out;
}

}  // namespace kdmhe
