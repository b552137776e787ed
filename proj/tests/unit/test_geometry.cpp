#include <catch2/catch_amalgamated.hpp>

#include "crweyl/forms.hpp"
#include "support/oracles.hpp"

using namespace crweyl;

namespace {

Eigen::VectorXd pt(std::initializer_list<double> xs) {
  Eigen::VectorXd p(static_cast<int>(xs.size()));
  int i = 0;
  for (double x : xs) p(i++) = x;
  return p;
}

VectorField vf(const std::vector<std::string>& coords,
               std::initializer_list<std::string> comps) {
  std::vector<Expression> es;
  for (const auto& s : comps) es.push_back(parse(s, coords));
  return VectorField::from_expressions(std::move(es));
}

KForm oneform(const std::vector<std::string>& coords,
              std::initializer_list<std::string> comps) {
  std::vector<Expression> es;
  for (const auto& s : comps) es.push_back(parse(s, coords));
  return KForm::one_form_expressions(std::move(es));
}

const std::vector<std::string> kXY = {"x", "y"};

}  // namespace

TEST_CASE("coordinate fields commute") {
  auto X = vf(kXY, {"1", "0"});
  auto Y = vf(kXY, {"0", "1"});
  CHECK(lie_bracket_at(X, Y, pt({0.3, -0.7})).norm() == 0.0);
}

TEST_CASE("bracket of x d/dy and y d/dx") {
  auto X = vf(kXY, {"0", "x"});
  auto Y = vf(kXY, {"y", "0"});
  Eigen::VectorXd b = lie_bracket_at(X, Y, pt({1, 2}));
  CHECK(b(0) == Catch::Approx(1.0));
  CHECK(b(1) == Catch::Approx(-2.0));

  // flow-commutator oracle
  Eigen::VectorXd fb = oracles::flow_commutator(X, Y, pt({1, 2}), 2e-3);
  CHECK((b - fb).norm() < 1e-4);
}

TEST_CASE("bracket is antisymmetric and [X,X] = 0") {
  Rng rng(7);
  std::vector<std::string> coords = {"x", "y", "z"};
  oracles::ExprGen gen(rng, coords);
  for (int i = 0; i < 10; ++i) {
    auto X = VectorField::from_expressions({parse(gen.gen(2), coords),
                                            parse(gen.gen(2), coords),
                                            parse(gen.gen(2), coords)});
    Eigen::VectorXd p = rng.vector(3, -1, 1);
    try {
      CHECK(lie_bracket_at(X, X, p).norm() <= 1e-12);
    } catch (const EvalError&) {
      continue;
    }
  }
}

TEST_CASE("jacobi identity holds to 1e-9 at 100 seeded points") {
  std::vector<std::string> c3 = {"x", "y", "z"};
  auto X = vf(c3, {"y*z", "x^2", "sin(x)"});
  auto Y = vf(c3, {"cos(y)", "x*z", "y"});
  auto Z = vf(c3, {"x + y", "z^2", "x*y"});
  auto XY = lie_bracket(X, Y);
  auto YZ = lie_bracket(Y, Z);
  auto ZX = lie_bracket(Z, X);
  Rng rng(42);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    Eigen::VectorXd p = rng.vector(3, -1.2, 1.2);
    Eigen::VectorXd s = lie_bracket_at(XY, Z, p) + lie_bracket_at(YZ, X, p) +
                        lie_bracket_at(ZX, Y, p);
    double scale = 1.0 + lie_bracket_at(XY, Z, p).norm();
    worst = std::max(worst, s.norm() / scale);
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("exterior derivative of x dy") {
  auto w = oneform(kXY, {"0", "x"});
  auto dw = exterior_derivative(w);
  Eigen::VectorXd ex = pt({1, 0}), ey = pt({0, 1});
  CHECK(dw.evaluate(pt({0.4, 2.0}), {ex, ey}) == Catch::Approx(1.0));
  CHECK(dw.evaluate(pt({0.4, 2.0}), {ey, ex}) == Catch::Approx(-1.0));
}

TEST_CASE("d of a constant-coefficient form vanishes") {
  auto w = oneform(kXY, {"3", "-2"});
  auto dw = exterior_derivative(w);
  CHECK(std::abs(dw.evaluate(pt({0.3, 0.9}), {pt({1, 0}), pt({0, 1})})) == 0.0);
}

TEST_CASE("d o d = 0 on 1-forms, evaluated on triples") {
  std::vector<std::string> c3 = {"x", "y", "z"};
  auto w = oneform(c3, {"x*y + sin(z)", "exp(x)*z", "x^2 - y"});
  auto ddw = exterior_derivative(exterior_derivative(w));
  Rng rng(11);
  double worst = 0.0;
  for (int i = 0; i < 40; ++i) {
    Eigen::VectorXd p = rng.vector(3, -1, 1);
    std::vector<Eigen::VectorXd> vs = {rng.vector(3), rng.vector(3), rng.vector(3)};
    worst = std::max(worst, std::abs(ddw.evaluate(p, vs)));
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("2-form evaluation is alternating") {
  std::vector<std::string> c3 = {"x", "y", "z"};
  auto a = oneform(c3, {"x", "y*z", "1"});
  auto b = oneform(c3, {"z", "x^2", "y"});
  auto w = wedge(a, b);
  Rng rng(3);
  for (int i = 0; i < 20; ++i) {
    Eigen::VectorXd p = rng.vector(3), u = rng.vector(3), v = rng.vector(3);
    double s = w.evaluate(p, {u, v});
    double t = w.evaluate(p, {v, u});
    CHECK(std::abs(s + t) <= 1e-12 * std::max(1.0, std::abs(s)));
  }
}

TEST_CASE("graded Leibniz rule for the interior product on 1-forms") {
  std::vector<std::string> c3 = {"x", "y", "z"};
  Rng rng(5);
  oracles::ExprGen gen(rng, c3);
  for (int rep = 0; rep < 10; ++rep) {
    auto a = oneform(c3, {"x*y", "z", "cos(x)"});
    auto b = oneform(c3, {"y", "x - z", "exp(y)"});
    auto X = VectorField::from_expressions({parse(gen.gen(1), c3),
                                            parse(gen.gen(1), c3),
                                            parse(gen.gen(1), c3)});
    Eigen::VectorXd p = rng.vector(3, -1, 1), v = rng.vector(3);
    double lhs, rhs;
    try {
      lhs = interior_product(X, wedge(a, b)).evaluate(p, {v});
      rhs = (interior_product(X, a).scalar_component().value(p)) *
                b.evaluate(p, {v}) -
            a.evaluate(p, {v}) *
                (interior_product(X, b).scalar_component().value(p));
    } catch (const EvalError&) {
      continue;
    }
    CHECK(lhs == Catch::Approx(rhs).margin(1e-10));
  }
}

TEST_CASE("pullback under the identity map is the identity") {
  std::vector<std::string> c3 = {"x", "y", "z"};
  auto w = oneform(c3, {"x*y", "z^2", "sin(x)"});
  auto id = map_from_expressions(
      {parse("x", c3), parse("y", c3), parse("z", c3)});
  auto pw = pullback(id, w, 3);
  Rng rng(9);
  for (int i = 0; i < 10; ++i) {
    Eigen::VectorXd p = rng.vector(3), v = rng.vector(3);
    CHECK(pw.evaluate(p, {v}) == Catch::Approx(w.evaluate(p, {v})).margin(1e-12));
  }
}

TEST_CASE("cartan magic formula for 1-forms") {
  std::vector<std::string> c3 = {"x", "y", "z"};
  auto w = oneform(c3, {"x*y + z", "cos(z)", "x^2"});
  auto X = vf(c3, {"y", "z*x", "sin(y)"});
  auto lhs = lie_derivative_one_form(X, w);
  auto rhs = interior_product(X, exterior_derivative(w)) +
             d_scalar(interior_product(X, w).scalar_component(), 3);
  Rng rng(13);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    Eigen::VectorXd p = rng.vector(3, -1, 1), v = rng.vector(3);
    worst = std::max(worst,
                     std::abs(lhs.evaluate(p, {v}) - rhs.evaluate(p, {v})));
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("weighted exterior derivative specializes correctly") {
  std::vector<std::string> c3 = {"x", "y", "z"};
  auto th = oneform(c3, {"y", "-x", "1"});
  auto zero = KForm::zero_one_form(3);
  auto ga = oneform(c3, {"x", "0", "z"});

  Rng rng(17);
  auto direct = exterior_derivative(th) + 1.0 * wedge(ga, th);
  auto weighted = weighted_ext_derivative(th, ga, 1, 3);
  auto w0 = weighted_ext_derivative(th, ga, 0, 3);
  auto gz = weighted_ext_derivative(th, zero, 1, 3);
  auto dth = exterior_derivative(th);
  for (int i = 0; i < 25; ++i) {
    Eigen::VectorXd p = rng.vector(3), u = rng.vector(3), v = rng.vector(3);
    CHECK(weighted.evaluate(p, {u, v}) ==
          Catch::Approx(direct.evaluate(p, {u, v})).margin(1e-12));
    CHECK(w0.evaluate(p, {u, v}) ==
          Catch::Approx(dth.evaluate(p, {u, v})).margin(1e-12));
    CHECK(gz.evaluate(p, {u, v}) ==
          Catch::Approx(dth.evaluate(p, {u, v})).margin(1e-12));
  }
}

TEST_CASE("degree-3 evaluator wedge is alternating") {
  std::vector<std::string> c4 = {"x", "y", "z", "w"};
  auto a = oneform(c4, {"x", "y", "z", "w"});
  auto b = oneform(c4, {"y", "0", "x*w", "1"});
  auto c = oneform(c4, {"0", "z", "0", "x"});
  auto abc = wedge(a, wedge(b, c));
  Rng rng(23);
  Eigen::VectorXd p = rng.vector(4);
  std::vector<Eigen::VectorXd> vs = {rng.vector(4), rng.vector(4), rng.vector(4)};
  double base = abc.evaluate(p, vs);
  std::swap(vs[0], vs[2]);
  CHECK(abc.evaluate(p, vs) == Catch::Approx(-base).margin(1e-12));
  // degenerate arguments kill the form
  vs[0] = vs[1];
  CHECK(std::abs(abc.evaluate(p, vs)) <= 1e-12);
}
