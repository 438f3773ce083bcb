#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "lifting.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

using namespace kdmhe;

TEST_CASE("basis names round trip") {
  const std::vector<Basis> all = {Basis::Identity, Basis::Square,
                                  Basis::CubeRoot, Basis::Exp};
  for (Basis b : all) CHECK(basis_from_name(basis_name(b)) == b);
  CHECK_THROWS_AS(basis_from_name("sigmoid"), std::invalid_argument);
}

TEST_CASE("identity dictionary is a no-op") {
  LiftingDictionary d = LiftingDictionary::identity(4);
  CHECK(d.input_dim == 4);
  CHECK(d.lifted_dim() == 4);
  Eigen::VectorXd x(4);
  x << 0.3, -1.2, 0.0, 7.5;
  CHECK((d.lift(x) - x).norm() == 0.0);
}

TEST_CASE("elementwise dictionary matches scalar functions") {
  LiftingDictionary d =
      LiftingDictionary::elementwise(2, {"identity", "cube_root", "exp"});
  CHECK(d.lifted_dim() == 6);
  CHECK(d.input_dim == 2);
  Eigen::VectorXd x(2);
  x << 0.37, 0.82;
  Eigen::VectorXd z = d.lift(x);
  REQUIRE(z.size() == 6);
  CHECK(z(0) == x(0));
  CHECK(z(1) == x(1));
  CHECK(z(2) == doctest::Approx(std::cbrt(x(0))).epsilon(1e-15));
  CHECK(z(3) == doctest::Approx(std::cbrt(x(1))).epsilon(1e-15));
  CHECK(z(4) == doctest::Approx(std::exp(x(0))).epsilon(1e-15));
  CHECK(z(5) == doctest::Approx(std::exp(x(1))).epsilon(1e-15));
}

TEST_CASE("square basis variant") {
  LiftingDictionary d = LiftingDictionary::elementwise(3, {"identity", "square"});
  Eigen::VectorXd x(3);
  x << 0.1, 0.5, 0.9;
  Eigen::VectorXd z = d.lift(x);
  REQUIRE(z.size() == 6);
  for (int c = 0; c < 3; ++c) {
    CHECK(z(c) == x(c));
    CHECK(z(3 + c) == doctest::Approx(x(c) * x(c)).epsilon(1e-15));
  }
}

TEST_CASE("lifted dimension is state_dim times basis count") {
  for (int nx = 1; nx <= 5; ++nx) {
    LiftingDictionary d =
        LiftingDictionary::elementwise(nx, {"identity", "square", "exp"});
    CHECK(d.lifted_dim() == 3 * nx);
  }
}

TEST_CASE("lift rejects wrong input dimension") {
  LiftingDictionary d = LiftingDictionary::elementwise(2, {"identity", "exp"});
  Eigen::VectorXd x(3);
  x.setZero();
  CHECK_THROWS_AS(d.lift(x), std::invalid_argument);
}

TEST_CASE("first basis must be identity so the state is recoverable") {
  CHECK_THROWS_AS(LiftingDictionary::elementwise(2, {"exp", "identity"}),
                  std::invalid_argument);
  CHECK_THROWS_AS(LiftingDictionary::elementwise(2, {}), std::invalid_argument);
}
