#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace kdmhe {

// A lifting dictionary is an ordered list of scalar basis functions, each
// applied to one source coordinate. The first nx entries are the identity
// on each original coordinate.
enum class Basis { Identity, Square, CubeRoot, Exp };

Basis basis_from_name(const std::string& name);
std::string basis_name(Basis b);

struct LiftingDictionary {
  struct Entry {
    Basis fn;
    int coord;  // source coordinate index
  };
  std::vector<Entry> entries;
  int input_dim = 0;  // dimension of the source vector

  int lifted_dim() const { return (int)entries.size(); }
  Eigen::VectorXd lift(const Eigen::VectorXd& x) const;

  // identity block on all nx coords, then each named basis elementwise
  static LiftingDictionary elementwise(int nx, const std::vector<std::string>& names);
  static LiftingDictionary identity(int nx);
};

// Concatenation of the neighbor liftings phi^j(x_j), j in I_i ascending.
struct SubsystemTopology;  // fwd

}  // namespace kdmhe
