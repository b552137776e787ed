#include <catch2/catch_amalgamated.hpp>

#include "crweyl/jet.hpp"

using crweyl::Jet;

namespace {

Eigen::VectorXd pt2(double x, double y) {
  Eigen::VectorXd p(2);
  p << x, y;
  return p;
}

}  // namespace

TEST_CASE("jet arithmetic propagates derivatives of x^2*y exactly") {
  auto p = pt2(3.0, -2.0);
  Jet x = Jet::coordinate(p(0), 0, 2, 3);
  Jet y = Jet::coordinate(p(1), 1, 2, 3);
  Jet f = x * x * y;

  CHECK(f.value() == 9.0 * -2.0);
  CHECK(f.grad()(0) == Catch::Approx(2 * 3 * -2).epsilon(1e-15));
  CHECK(f.grad()(1) == Catch::Approx(9.0).epsilon(1e-15));
  CHECK(f.hess()(0, 0) == Catch::Approx(2 * -2.0).epsilon(1e-15));
  CHECK(f.hess()(0, 1) == Catch::Approx(2 * 3.0).epsilon(1e-15));
  CHECK(f.hess()(1, 1) == 0.0);
  // d^3/dx^2 dy = 2
  CHECK(f.third(1)(0, 0) == Catch::Approx(2.0).epsilon(1e-15));
  CHECK(f.third(0)(0, 1) == Catch::Approx(2.0).epsilon(1e-15));
  CHECK(f.third(0)(0, 0) == 0.0);
}

TEST_CASE("jet chain rule through exp and division") {
  auto p = pt2(0.5, 1.5);
  Jet x = Jet::coordinate(p(0), 0, 2, 3);
  Jet y = Jet::coordinate(p(1), 1, 2, 3);
  Jet f = crweyl::jet_exp(x * y) / y;

  auto ref = [&](double a, double b) { return std::exp(a * b) / b; };
  double h = 1e-5;
  double fx = (ref(p(0) + h, p(1)) - ref(p(0) - h, p(1))) / (2 * h);
  double fy = (ref(p(0), p(1) + h) - ref(p(0), p(1) - h)) / (2 * h);
  CHECK(f.grad()(0) == Catch::Approx(fx).epsilon(1e-8));
  CHECK(f.grad()(1) == Catch::Approx(fy).epsilon(1e-8));

  // analytic third derivative in x: d^3/dx^3 exp(xy)/y = y^2 exp(xy)
  CHECK(f.third(0)(0, 0) ==
        Catch::Approx(p(1) * p(1) * std::exp(p(0) * p(1))).epsilon(1e-12));
}

TEST_CASE("derivative extraction lowers the order") {
  auto p = pt2(1.2, 0.7);
  Jet x = Jet::coordinate(p(0), 0, 2, 3);
  Jet y = Jet::coordinate(p(1), 1, 2, 3);
  Jet f = crweyl::jet_sin(x) * y;

  Jet fx = f.derivative(0);  // cos(x) y
  CHECK(fx.order() == 2);
  CHECK(fx.value() == Catch::Approx(std::cos(p(0)) * p(1)).epsilon(1e-15));
  CHECK(fx.grad()(0) == Catch::Approx(-std::sin(p(0)) * p(1)).epsilon(1e-15));
  CHECK(fx.grad()(1) == Catch::Approx(std::cos(p(0))).epsilon(1e-15));
  CHECK(fx.hess()(0, 0) == Catch::Approx(-std::cos(p(0)) * p(1)).epsilon(1e-15));
  CHECK(fx.hess()(0, 1) == Catch::Approx(-std::sin(p(0))).epsilon(1e-15));
}

TEST_CASE("atan2 jets agree across branches") {
  // compare both branch formulas near |x| == |y|
  for (double s : {1.05, 0.95}) {
    Eigen::VectorXd p = pt2(1.0, s);
    Jet x = Jet::coordinate(p(0), 0, 2, 2);
    Jet y = Jet::coordinate(p(1), 1, 2, 2);
    Jet a = crweyl::jet_atan2(y, x);
    double r2 = p(0) * p(0) + p(1) * p(1);
    CHECK(a.value() == Catch::Approx(std::atan2(p(1), p(0))).epsilon(1e-15));
    CHECK(a.grad()(0) == Catch::Approx(-p(1) / r2).epsilon(1e-12));
    CHECK(a.grad()(1) == Catch::Approx(p(0) / r2).epsilon(1e-12));
  }
}

TEST_CASE("integer powers handle zero and negative bases") {
  Jet x = Jet::coordinate(-2.0, 0, 1, 3);
  Jet f = crweyl::jet_pow_int(x, 3);
  CHECK(f.value() == -8.0);
  CHECK(f.grad()(0) == 12.0);
  CHECK(f.hess()(0, 0) == -12.0);
  CHECK(f.third(0)(0, 0) == 6.0);

  Jet z = Jet::coordinate(0.0, 0, 1, 3);
  CHECK(crweyl::jet_pow_int(z, 2).value() == 0.0);
  CHECK(crweyl::jet_pow_int(z, 2).hess()(0, 0) == 2.0);
  CHECK_THROWS_AS(crweyl::jet_pow_int(z, -1), crweyl::EvalError);
  CHECK_THROWS_AS(crweyl::jet_pow_real(x, 0.5), crweyl::EvalError);
}

TEST_CASE("domain errors surface as EvalError") {
  Jet x = Jet::coordinate(-1.0, 0, 1, 2);
  CHECK_THROWS_AS(crweyl::jet_log(x), crweyl::EvalError);
  CHECK_THROWS_AS(crweyl::jet_sqrt(x), crweyl::EvalError);
  Jet z = Jet::coordinate(0.0, 0, 1, 2);
  CHECK_THROWS_AS(Jet::constant(1.0, 1, 2) / z, crweyl::EvalError);
}
