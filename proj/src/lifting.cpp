#include "lifting.hpp"

#include <cmath>
#include <stdexcept>

namespace kdmhe {

Basis basis_from_name(const std::string& name) {
  if (name == "identity") return Basis::Identity;
  if (name == "square") return Basis::Square;
  if (name == "cube_root") return Basis::CubeRoot;
  if (name == "exp") return Basis::Exp;
  throw std::invalid_argument("unknown basis function: " + name);
}

std::string basis_name(Basis b) {
  switch (b) {
    case Basis::Identity: return "identity";
    case Basis::Square: return "square";
    case Basis::CubeRoot: return "cube_root";
    case Basis::Exp: return "exp";
  }
  return "";
}

static double eval_basis(Basis b, double v) {
  switch (b) {
    case Basis::Identity: return v;
    case Basis::Square: return v * v;
    case Basis::CubeRoot: return std::cbrt(v);
    case Basis::Exp: return std::exp(v);
  }
  return 0.0;
}

Eigen::VectorXd LiftingDictionary::lift(const Eigen::VectorXd& x) const {
  if (x.size() != input_dim)
    throw std::invalid_argument("lift: expected dimension " +
                                std::to_string(input_dim) + ", got " +
                                std::to_string(x.size()));
  Eigen::VectorXd z(lifted_dim());
  for (int p = 0; p < lifted_dim(); ++p)
    z[p] = eval_basis(entries[p].fn, x[entries[p].coord]);
  return z;
}

LiftingDictionary LiftingDictionary::elementwise(
    int nx, const std::vector<std::string>& names) {
  LiftingDictionary d;
  d.input_dim = nx;
  if (names.empty() || names.front() != "identity")
    throw std::invalid_argument("dictionary must start with identity");
  for (const auto& name : names) {
    Basis b = basis_from_name(name);
    for (int c = 0; c < nx; ++c) d.entries.push_back({b, c});
  }
  return d;
}

LiftingDictionary LiftingDictionary::identity(int nx) {
  return elementwise(nx, {"identity"});
}

}  // namespace kdmhe
