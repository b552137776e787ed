#include <catch2/catch_amalgamated.hpp>

#include "crweyl/chart.hpp"
#include "crweyl/expression.hpp"
#include "support/oracles.hpp"

using crweyl::Expression;
using crweyl::parse;

namespace {

Eigen::VectorXd pt(std::initializer_list<double> xs) {
  Eigen::VectorXd p(static_cast<int>(xs.size()));
  int i = 0;
  for (double x : xs) p(i++) = x;
  return p;
}

const std::vector<std::string> kXYT = {"x", "y", "t"};

}  // namespace

TEST_CASE("parse and evaluate basic expressions") {
  auto e = parse("x*y + sin(t)", kXYT);
  CHECK(e.evaluate(pt({2, 3, 0})) == Catch::Approx(6.0));

  auto sq = parse("x^2", {"x"});
  auto j = sq.evaluate_jet(pt({3}), 1);
  CHECK(j.grad()(0) == Catch::Approx(6.0));
}

TEST_CASE("syntax errors carry line and column") {
  try {
    parse("x +* y", {"x", "y"});
    FAIL("expected ParseError");
  } catch (const crweyl::ParseError& err) {
    CHECK(err.line == 1);
    CHECK(err.col == 4);
  }
}

TEST_CASE("unknown identifiers name the symbol") {
  try {
    parse("x + nope", {"x"});
    FAIL("expected ParseError");
  } catch (const crweyl::ParseError& err) {
    CHECK(std::string(err.what()).find("nope") != std::string::npos);
  }
}

TEST_CASE("jet evaluation matches the spec examples") {
  auto xy = parse("x*y", {"x", "y"});
  auto j = xy.evaluate_jet(pt({2, 3}), 2);
  CHECK(j.value() == 6.0);
  CHECK(j.grad()(0) == 3.0);
  CHECK(j.grad()(1) == 2.0);
  CHECK(j.hess()(0, 1) == 1.0);

  auto ex = parse("exp(x)", {"x"});
  auto je = ex.evaluate_jet(pt({0}), 2);
  CHECK(je.value() == 1.0);
  CHECK(je.grad()(0) == 1.0);
  CHECK(je.hess()(0, 0) == 1.0);
}

TEST_CASE("domain errors identify the subexpression") {
  auto e = parse("1 + log(x)", {"x"});
  try {
    e.evaluate(pt({-1}));
    FAIL("expected EvalError");
  } catch (const crweyl::EvalError& err) {
    CHECK(std::string(err.what()).find("log") != std::string::npos);
  }
  auto d = parse("x/(y - y)", {"x", "y"});
  CHECK_THROWS_AS(d.evaluate(pt({1, 2})), crweyl::EvalError);
}

TEST_CASE("operator precedence follows the grammar") {
  // '^' is right-associative
  CHECK(parse("2^3^2", {}).evaluate(pt({})) == Catch::Approx(512.0));
  // unary minus is an atom production, so it binds before '^'
  CHECK(Expression::equal(parse("-2^2", {}), parse("(-2)^2", {})));
  CHECK(parse("-2^2", {}).evaluate(pt({})) == Catch::Approx(4.0));
  CHECK(parse("2 - 3*4", {}).evaluate(pt({})) == Catch::Approx(-10.0));
  CHECK(parse("2^-2", {}).evaluate(pt({})) == Catch::Approx(0.25));
  CHECK(parse("1e2 + 1", {}).evaluate(pt({})) == Catch::Approx(101.0));
}

TEST_CASE("real exponents with negative base are a domain error") {
  auto e = parse("x^0.5", {"x"});
  CHECK_THROWS_AS(e.evaluate(pt({-2})), crweyl::EvalError);
  CHECK(e.evaluate(pt({4})) == Catch::Approx(2.0));
  // non-literal exponent goes through exp/log
  auto g = parse("x^y", {"x", "y"});
  CHECK(g.evaluate(pt({2, 3})) == Catch::Approx(8.0));
  CHECK_THROWS_AS(g.evaluate(pt({-2, 3})), crweyl::EvalError);
}

TEST_CASE("parse o pretty o parse is the identity on ASTs") {
  crweyl::Rng rng(20240817);
  std::vector<std::string> coords = {"x", "y", "z"};
  oracles::ExprGen gen(rng, coords);
  for (int i = 0; i < 120; ++i) {
    std::string src = gen.gen(3);
    Expression p1 = parse(src, coords);
    std::string printed = crweyl::pretty(p1, coords);
    INFO("src: " << src << "  printed: " << printed);
    Expression p2 = parse(printed, coords);
    CHECK(Expression::equal(p1, p2));
  }
}

TEST_CASE("jets agree with central finite differences on 200 seeded pairs") {
  crweyl::Rng rng(42);
  std::vector<std::string> coords = {"x", "y", "z"};
  oracles::ExprGen gen(rng, coords);
  int accepted = 0;
  double worst_grad = 0.0, worst_hess = 0.0;
  while (accepted < 200) {
    std::string src = gen.gen(3);
    Expression e = parse(src, coords);
    Eigen::VectorXd p = rng.vector(3, -1.5, 1.5);
    crweyl::Jet j;
    try {
      j = e.evaluate_jet(p, 2);
    } catch (const crweyl::EvalError&) {
      continue;
    }
    // reject draws too close to a singularity for finite differences
    auto fn = [&](const Eigen::VectorXd& q) { return e.evaluate(q); };
    bool finite = std::isfinite(j.value());
    for (int i = 0; i < 3 && finite; ++i)
      finite = std::isfinite(j.grad()(i)) && std::abs(j.grad()(i)) < 1e4;
    if (!finite || std::abs(j.value()) > 1e4 || j.hess().cwiseAbs().maxCoeff() > 1e4)
      continue;
    Eigen::VectorXd fg;
    Eigen::MatrixXd fh;
    try {
      fg = oracles::fd_gradient(fn, p);
      fh = oracles::fd_hessian(fn, p);
    } catch (const crweyl::EvalError&) {
      continue;
    }
    double gref = std::max(1.0, fg.cwiseAbs().maxCoeff());
    double href = std::max(1.0, fh.cwiseAbs().maxCoeff());
    worst_grad = std::max(worst_grad, (j.grad() - fg).cwiseAbs().maxCoeff() / gref);
    worst_hess = std::max(worst_hess, (j.hess() - fh).cwiseAbs().maxCoeff() / href);
    ++accepted;
  }
  CHECK(worst_grad <= 1e-6);
  CHECK(worst_hess <= 1e-4);
}

TEST_CASE("substitution composes coordinate maps") {
  auto e = parse("x^2 + y", {"x", "y"});
  auto m = e.substitute({parse("u + v", {"u", "v"}), parse("u*v", {"u", "v"})});
  Eigen::VectorXd q = pt({2, 3});
  CHECK(m.evaluate(q) == Catch::Approx(25.0 + 6.0));
}
