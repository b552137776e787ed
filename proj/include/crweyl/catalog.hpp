#pragma once

#include <map>
#include <optional>
#include <sstream>

#include "crweyl/reduction.hpp"

namespace crweyl {

// A named, ready-to-verify instance: structure, optional action and slice,
// canonical quotient loops, and the table of expected suite outcomes.
struct ExampleBundle {
  std::string name;
  std::string params;
  CRWeylStructure structure;
  std::optional<GroupActionSpec> action;
  std::optional<SliceChart> slice;
  std::vector<Loop> loops;  // loops[0] is the quotient circle when present
  std::map<std::string, bool> expected;  // suite name -> must pass
};

namespace catalog_detail {

inline Expression num(double v) { return Expression::number(v); }

inline std::string weights_str(const std::vector<int>& w) {
  std::string s;
  for (size_t i = 0; i < w.size(); ++i)
    s += (i ? "," : "") + std::to_string(w[i]);
  return s;
}

}  // namespace catalog_detail

// Weighted S^1 x Z action on C^n \ {0} x R^{>0} with the contact form
// sum_p (x_p dy_p - y_p dx_p) - dt. The slice chart is provided for the
// n = 2, weights (1,-1) quotient.
inline ExampleBundle make_example2(int n, std::vector<int> weights,
                                   double lambda) {
  if (n < 2 || static_cast<int>(weights.size()) != n)
    throw std::invalid_argument("example2: need n >= 2 with n weights");
  bool pos = false, neg = false;
  for (int w : weights) {
    pos |= w > 0;
    neg |= w < 0;
  }
  if (!pos || !neg)
    throw std::invalid_argument("example2: weights must change sign");
  if (lambda <= 1.0) throw std::invalid_argument("example2: lambda must exceed 1");

  const int dim = 2 * n + 1;
  std::vector<std::string> coords;
  std::vector<std::pair<double, double>> box;
  for (int p = 1; p <= n; ++p) {
    coords.push_back("x" + std::to_string(p));
    coords.push_back("y" + std::to_string(p));
    box.emplace_back(-1.2, 1.2);
    box.emplace_back(-1.2, 1.2);
  }
  coords.push_back("t");
  box.emplace_back(0.25, 8.0);
  Chart chart = make_chart(coords, box);
  {
    std::string z2;
    for (int p = 1; p <= n; ++p) {
      if (p > 1) z2 += " + ";
      z2 += "x" + std::to_string(p) + "^2 + y" + std::to_string(p) + "^2";
    }
    chart.exclusions.emplace_back(chart.parse_expr(z2), 0.04);
  }

  // theta = sum x_p dy_p - y_p dx_p - dt
  std::vector<Expression> th(static_cast<size_t>(dim), catalog_detail::num(0));
  for (int p = 0; p < n; ++p) {
    th[static_cast<size_t>(2 * p)] = -Expression::coordinate(2 * p + 1);
    th[static_cast<size_t>(2 * p + 1)] = Expression::coordinate(2 * p);
  }
  th[static_cast<size_t>(dim - 1)] = catalog_detail::num(-1.0);
  KForm theta = KForm::one_form_expressions(std::move(th));

  // ambient complex structure blocks, zero on d/dt
  std::vector<Expression> endo(static_cast<size_t>(dim * dim),
                               catalog_detail::num(0));
  for (int p = 0; p < n; ++p) {
    endo[static_cast<size_t>((2 * p) * dim + (2 * p + 1))] =
        catalog_detail::num(-1.0);
    endo[static_cast<size_t>((2 * p + 1) * dim + (2 * p))] =
        catalog_detail::num(1.0);
  }
  EndomorphismField A = EndomorphismField::from_expressions(dim, endo);

  CRWeylStructure structure(chart, theta, A, KForm::zero_one_form(dim));

  // S^1 generator xi = sum a_p (x_p d/dy_p - y_p d/dx_p)
  std::vector<Expression> xi(static_cast<size_t>(dim), catalog_detail::num(0));
  for (int p = 0; p < n; ++p) {
    xi[static_cast<size_t>(2 * p)] =
        catalog_detail::num(-weights[static_cast<size_t>(p)]) *
        Expression::coordinate(2 * p + 1);
    xi[static_cast<size_t>(2 * p + 1)] =
        catalog_detail::num(weights[static_cast<size_t>(p)]) *
        Expression::coordinate(2 * p);
  }

  // Z generator (z, t) -> (lambda z, lambda^2 t)
  DiscreteMap dmap;
  for (int i = 0; i < dim - 1; ++i) {
    dmap.forward.push_back(catalog_detail::num(lambda) *
                           Expression::coordinate(i));
    dmap.inverse.push_back(catalog_detail::num(1.0 / lambda) *
                           Expression::coordinate(i));
  }
  dmap.forward.push_back(catalog_detail::num(lambda * lambda) *
                         Expression::coordinate(dim - 1));
  dmap.inverse.push_back(catalog_detail::num(1.0 / (lambda * lambda)) *
                         Expression::coordinate(dim - 1));

  GroupActionSpec action;
  action.structure = structure;
  action.generators.push_back(VectorField::from_expressions(xi));
  action.discrete.push_back(dmap);

  const bool canonical = (n == 2 && weights[0] == 1 && weights[1] == -1);
  if (canonical) {
    action.s_sampler = [](Rng& rng) {
      double r = rng.uniform(0.45, 1.1);
      double p1 = rng.uniform(-3.1, 3.1);
      double p2 = rng.uniform(-3.1, 3.1);
      double t = rng.uniform(0.5, 2.0);
      Eigen::VectorXd p(5);
      p << r * std::cos(p1), r * std::sin(p1), r * std::cos(p2),
          r * std::sin(p2), t;
      return p;
    };
  } else {
    action.s_sampler = nullptr;
  }

  ExampleBundle b;
  b.name = "example2";
  {
    std::ostringstream os;
    os << "n=" << n << " weights=" << catalog_detail::weights_str(weights)
       << " lambda=" << lambda;
    b.params = os.str();
  }
  b.structure = structure;
  b.action = action;

  if (canonical) {
    // slice of S / (S^1 x Z): z1 = z2 = r e^{i phi/2} with r = e^{u1}/sqrt(2),
    // t = e^{u2 + 2 u1}; the Z translation becomes u1 -> u1 + log(lambda).
    const double L = std::log(lambda);
    Chart rchart = make_chart({"phi", "u1", "u2"},
                              {{-2.5, 2.5}, {0.0, L}, {-0.6, 0.6}});
    std::vector<std::string> rc = rchart.coords;
    SliceChart slice;
    slice.reduced_chart = rchart;
    slice.embedding = {
        parse("exp(u1)*cos(phi/2)/sqrt(2)", rc),
        parse("exp(u1)*sin(phi/2)/sqrt(2)", rc),
        parse("exp(u1)*cos(phi/2)/sqrt(2)", rc),
        parse("exp(u1)*sin(phi/2)/sqrt(2)", rc),
        parse("exp(u2 + 2*u1)", rc),
    };
    slice.gauge = parse("2*u1", rc);
    b.slice = slice;

    std::vector<std::string> sc = {"s"};
    Loop circle;
    circle.path = {parse("0.3", sc),
                   parse(std::to_string(L) + "*s", sc),
                   parse("0.1", sc)};
    Loop wobble;
    wobble.path = {parse("0.3 + 0.4*sin(6.283185307179586*s)", sc),
                   parse(std::to_string(L) + "*s", sc),
                   parse("0.1 + 0.15*(cos(6.283185307179586*s) - 1)", sc)};
    Loop contractible;
    contractible.path = {parse("0.3*sin(6.283185307179586*s)", sc),
                         parse(std::to_string(0.5 * L) +
                                   " + " + std::to_string(0.3 * L) +
                                   "*cos(6.283185307179586*s)",
                               sc),
                         parse("0.2*sin(6.283185307179586*s)", sc)};
    b.loops = {circle, wobble, contractible};
  }

  b.expected = {{"calculus", true},  {"validate", true},
                {"sasaki-weyl", true}, {"cone", true},
                {"nijenhuis", true},   {"lck", true}};
  if (canonical) {
    b.expected["reduction"] = true;
    b.expected["rho-exactness"] = true;
    b.expected["commutativity"] = true;
  }
  return b;
}

// Non-closed Sasaki-Weyl connections D = D0 + kappa s0 eta on a Sasaki base:
// gamma is replaced by kappa * theta0.
inline ExampleBundle make_example1(const CRWeylStructure& base,
                                   const Expression& kappa,
                                   const std::string& label) {
  KForm gamma = ScalarField(kappa) * base.theta0();
  ExampleBundle b;
  b.name = label;
  b.params = "gamma = kappa * theta0";
  b.structure = CRWeylStructure(base.chart(), base.theta0(), base.endo(), gamma);
  b.expected = {{"calculus", true},  {"validate", true},
                {"sasaki-weyl", true}, {"cone", true}};
  return b;
}

// Round-sphere Sasaki structure S^{2n-1} on the graph patch x1 > 0, chart
// coordinates (y1, x2, y2, ..., xn, yn).
inline ExampleBundle make_sphere(int n) {
  if (n < 2) throw std::invalid_argument("sphere: need n >= 2");
  const int dim = 2 * n - 1;
  std::vector<std::string> coords;
  coords.push_back("y1");
  for (int p = 2; p <= n; ++p) {
    coords.push_back("x" + std::to_string(p));
    coords.push_back("y" + std::to_string(p));
  }
  std::vector<std::pair<double, double>> box(static_cast<size_t>(dim),
                                             {-0.55, 0.55});
  Chart chart = make_chart(coords, box);
  std::string norm2;
  for (int i = 0; i < dim; ++i)
    norm2 += (i ? " + " : "") + coords[static_cast<size_t>(i)] + "^2";
  chart.exclusions.emplace_back(chart.parse_expr("1 - (" + norm2 + ")"), 0.09);

  std::string w = "sqrt(1 - (" + norm2 + "))";
  // theta = x1 dy1 - y1 dx1 + sum_{p>=2} x_p dy_p - y_p dx_p with x1 = w
  std::vector<Expression> th;
  th.push_back(chart.parse_expr(w + " + y1^2/(" + w + ")"));
  for (int p = 2; p <= n; ++p) {
    std::string xp = "x" + std::to_string(p), yp = "y" + std::to_string(p);
    th.push_back(chart.parse_expr("y1*" + xp + "/(" + w + ") - " + yp));
    th.push_back(chart.parse_expr("y1*" + yp + "/(" + w + ") + " + xp));
  }
  KForm theta = KForm::one_form_expressions(std::move(th));

  // A v = drop_x1(J_ambient(lift v)); first row carries the graph Jacobian
  std::vector<Expression> endo(static_cast<size_t>(dim * dim),
                               catalog_detail::num(0));
  for (int j = 0; j < dim; ++j)
    endo[static_cast<size_t>(j)] =
        chart.parse_expr("-" + coords[static_cast<size_t>(j)] + "/(" + w + ")");
  for (int p = 2; p <= n; ++p) {
    int xrow = 1 + 2 * (p - 2), yrow = 2 + 2 * (p - 2);
    endo[static_cast<size_t>(xrow * dim + yrow)] = catalog_detail::num(-1.0);
    endo[static_cast<size_t>(yrow * dim + xrow)] = catalog_detail::num(1.0);
  }
  EndomorphismField A = EndomorphismField::from_expressions(dim, endo);

  ExampleBundle b;
  b.name = "sphere";
  b.params = "n=" + std::to_string(n) + " patch x1>0";
  b.structure = CRWeylStructure(chart, theta, A, KForm::zero_one_form(dim));
  b.expected = {{"calculus", true},  {"validate", true},
                {"sasaki-weyl", true}, {"cone", true},
                {"nijenhuis", true},   {"lck", true}};
  return b;
}

// Sasaki structure theta = alpha - dt2 on (Kahler cone of a Sasaki base) x
// R^{>0}, with alpha = (t1^2/2) theta_N and the holomorphic Z action
// (x, t1, t2) -> (x, lambda t1, lambda^2 t2). K is instantiated trivial.
inline ExampleBundle make_example3_cone(const ExampleBundle& sasaki,
                                        double lambda) {
  const CRWeylStructure& N = sasaki.structure;
  const int nd = N.dim();
  const int dim = nd + 2;

  std::vector<std::string> coords = N.chart().coords;
  coords.push_back("t1");
  coords.push_back("t2");
  std::vector<std::pair<double, double>> box;
  for (int i = 0; i < nd; ++i)
    box.emplace_back(N.chart().box_lo(i), N.chart().box_hi(i));
  box.emplace_back(0.7, 1.4);
  box.emplace_back(0.4, 6.0);
  Chart chart = make_chart(coords, box);
  chart.exclusions = N.chart().exclusions;

  if (!N.theta0().has_table())
    throw std::invalid_argument("example3: base contact form must be tabled");
  for (int i = 0; i < nd; ++i)
    if (!N.theta0().component(i).symbolic())
      throw std::invalid_argument("example3: base data must be symbolic");

  Expression t1 = Expression::coordinate(nd);
  // theta_P = (t1^2/2) theta_N - dt2
  std::vector<Expression> th;
  for (int i = 0; i < nd; ++i)
    th.push_back(t1 * t1 * N.theta0().component(i).expression() *
                 catalog_detail::num(0.5));
  th.push_back(catalog_detail::num(0.0));
  th.push_back(catalog_detail::num(-1.0));
  KForm theta = KForm::one_form_expressions(std::move(th));

  // Reeb field of the base as expressions (needed symbolically): solve it
  // from the catalog structures we instantiate (sphere patch), where the
  // ambient Reeb is (w, -y2, x2, ..., -yn, xn).
  std::vector<Expression> reeb_n;
  {
    std::string norm2;
    for (int i = 0; i < nd; ++i)
      norm2 += (i ? " + " : "") +
               N.chart().coords[static_cast<size_t>(i)] + "^2";
    std::string w = "sqrt(1 - (" + norm2 + "))";
    reeb_n.push_back(N.chart().parse_expr(w));
    for (int p = 2; p * 2 - 1 <= nd; ++p) {
      reeb_n.push_back(
          N.chart().parse_expr("-y" + std::to_string(p)));
      reeb_n.push_back(N.chart().parse_expr("x" + std::to_string(p)));
    }
  }

  // metric-cone complex structure J_K on (N x R^{>0}):
  //   J v = I v_H + (v_t1 / t1) T0 - t1 theta(v) d/dt1
  // and the product endomorphism A_P(v) = (J_K v_M, alpha(J_K v_M)).
  std::vector<Expression> endo(static_cast<size_t>(dim * dim),
                               catalog_detail::num(0));
  auto at = [&](int r, int c) -> Expression& {
    return endo[static_cast<size_t>(r * dim + c)];
  };
  // apply_I = A (Id - T0 theta^T) entries
  std::vector<Expression> AT0(static_cast<size_t>(nd), catalog_detail::num(0));
  for (int i = 0; i < nd; ++i)
    for (int k = 0; k < nd; ++k)
      AT0[static_cast<size_t>(i)] =
          AT0[static_cast<size_t>(i)] +
          N.endo().entry(i, k).expression() * reeb_n[static_cast<size_t>(k)];
  for (int i = 0; i < nd; ++i) {
    for (int j = 0; j < nd; ++j) {
      at(i, j) = N.endo().entry(i, j).expression() -
                 AT0[static_cast<size_t>(i)] *
                     N.theta0().component(j).expression();
    }
    at(i, nd) = reeb_n[static_cast<size_t>(i)] / t1;
  }
  for (int j = 0; j < nd; ++j)
    at(nd, j) = -(t1 * N.theta0().component(j).expression());
  at(dim - 1, nd) = t1 * catalog_detail::num(0.5);
  EndomorphismField A = EndomorphismField::from_expressions(dim, endo);

  ExampleBundle b;
  b.name = "example3";
  b.params = "base=" + sasaki.name + " lambda=" + std::to_string(lambda);
  b.structure = CRWeylStructure(chart, theta, A, KForm::zero_one_form(dim));

  GroupActionSpec action;
  action.structure = b.structure;
  DiscreteMap dmap;
  for (int i = 0; i < nd; ++i) {
    dmap.forward.push_back(Expression::coordinate(i));
    dmap.inverse.push_back(Expression::coordinate(i));
  }
  dmap.forward.push_back(catalog_detail::num(lambda) * t1);
  dmap.inverse.push_back(catalog_detail::num(1.0 / lambda) * t1);
  dmap.forward.push_back(catalog_detail::num(lambda * lambda) *
                         Expression::coordinate(dim - 1));
  dmap.inverse.push_back(catalog_detail::num(1.0 / (lambda * lambda)) *
                         Expression::coordinate(dim - 1));
  action.discrete.push_back(dmap);
  Chart amb = chart;
  action.s_sampler = [amb](Rng& rng) { return amb.sample(rng); };
  b.action = action;

  // quotient chart: t1 = e^{v1}, t2 = e^{v2 + 2 v1}; Z acts by
  // v1 -> v1 + log(lambda)
  const double L = std::log(lambda);
  std::vector<std::string> rcoords = N.chart().coords;
  rcoords.push_back("v1");
  rcoords.push_back("v2");
  std::vector<std::pair<double, double>> rbox;
  for (int i = 0; i < nd; ++i)
    rbox.emplace_back(N.chart().box_lo(i), N.chart().box_hi(i));
  rbox.emplace_back(0.0, L);
  rbox.emplace_back(-0.6, 0.6);
  Chart rchart = make_chart(rcoords, rbox);
  rchart.exclusions = N.chart().exclusions;
  SliceChart slice;
  slice.reduced_chart = rchart;
  for (int i = 0; i < nd; ++i)
    slice.embedding.push_back(Expression::coordinate(i));
  slice.embedding.push_back(parse("exp(v1)", rcoords));
  slice.embedding.push_back(parse("exp(v2 + 2*v1)", rcoords));
  slice.gauge = parse("2*v1", rcoords);
  b.slice = slice;

  std::vector<std::string> sc = {"s"};
  Loop circle;
  for (int i = 0; i < nd; ++i)
    circle.path.push_back(parse("0.1", sc));
  circle.path.push_back(parse(std::to_string(L) + "*s", sc));
  circle.path.push_back(parse("0.05", sc));
  b.loops = {circle};

  b.expected = {{"calculus", true},  {"validate", true},
                {"sasaki-weyl", true}, {"cone", true},
                {"reduction", true},   {"rho-exactness", true}};
  return b;
}

// Negative controls ------------------------------------------------------

// gamma = x1 dx1 (closed): the Reeb field tilts and the Weyl-Lie derivative
// of I no longer vanishes. Fails the Sasaki-Weyl and integrability suites.
inline ExampleBundle make_example2_broken() {
  ExampleBundle base = make_example2(2, {1, -1}, 2.0);
  const Chart& chart = base.structure.chart();
  std::vector<Expression> g(static_cast<size_t>(chart.dim()),
                            catalog_detail::num(0));
  g[0] = chart.parse_expr("x1");
  KForm gamma = KForm::one_form_expressions(std::move(g));
  ExampleBundle b;
  b.name = "example2-broken";
  b.params = "gamma = x1 dx1";
  b.structure = CRWeylStructure(chart, base.structure.theta0(),
                                base.structure.endo(), gamma);
  b.expected = {{"calculus", true}, {"validate", true},
                {"sasaki-weyl", false}, {"cone", true},
                {"nijenhuis", false},   {"lck", false}};
  return b;
}

// gamma = x1 dy1: the Faraday curvature dx1 ^ dy1 is not proportional to
// d^D theta0, so the l.c.K. factorization fails outright.
inline ExampleBundle make_example2_nonfactor() {
  ExampleBundle base = make_example2(2, {1, -1}, 2.0);
  const Chart& chart = base.structure.chart();
  std::vector<Expression> g(static_cast<size_t>(chart.dim()),
                            catalog_detail::num(0));
  g[1] = chart.parse_expr("x1");
  KForm gamma = KForm::one_form_expressions(std::move(g));
  ExampleBundle b;
  b.name = "example2-nonfactor";
  b.params = "gamma = x1 dy1";
  b.structure = CRWeylStructure(chart, base.structure.theta0(),
                                base.structure.endo(), gamma);
  b.expected = {{"calculus", true}, {"validate", true},
                {"sasaki-weyl", false}, {"cone", true},
                {"nijenhuis", false},   {"lck", false}};
  return b;
}

// Position-dependent conjugation of the CR endomorphism by
// Id + h U alpha^T with U = d/dx2 - y2 d/dt, alpha = dx1, h = 0.35 x1.
// Keeps A^2 = -Id on H but destroys CR integrability.
inline ExampleBundle make_example2_nonintegrable() {
  ExampleBundle base = make_example2(2, {1, -1}, 2.0);
  const Chart& chart = base.structure.chart();
  const int dim = chart.dim();
  Expression h = chart.parse_expr("0.35*x1");
  // A' = A - h (U (x) dy1 + d/dy2 (x) dx1), from T A T^{-1} with the U
  // above (alpha(A U) = 0 kills the quadratic term)
  std::vector<Expression> u_comps = {
      catalog_detail::num(0), catalog_detail::num(0), catalog_detail::num(1),
      catalog_detail::num(0), chart.parse_expr("-y2")};
  std::vector<Expression> endo;
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j)
      endo.push_back(base.structure.endo().entry(i, j).expression());
  auto at = [&](int r, int c) -> Expression& {
    return endo[static_cast<size_t>(r * dim + c)];
  };
  for (int i = 0; i < dim; ++i)
    at(i, 1) = at(i, 1) - h * u_comps[static_cast<size_t>(i)];
  at(3, 0) = at(3, 0) - h;
  ExampleBundle b;
  b.name = "example2-nonintegrable";
  b.params = "twisted endomorphism";
  b.structure = CRWeylStructure(
      chart, base.structure.theta0(),
      EndomorphismField::from_expressions(dim, endo),
      KForm::zero_one_form(dim));
  b.expected = {{"calculus", true}, {"validate", false}};
  return b;
}

inline std::vector<std::string> catalog_names() {
  return {"example2",        "example1",
          "example1-kx1",    "sphere",
          "example3",        "example2-broken",
          "example2-nonfactor", "example2-nonintegrable"};
}

inline ExampleBundle make_example(const std::string& name, int n = 2,
                                  std::vector<int> weights = {1, -1},
                                  double lambda = 2.0) {
  if (name == "example2") return make_example2(n, weights, lambda);
  if (name == "example1") {
    ExampleBundle base = make_example2(n, weights, lambda);
    ExampleBundle b = make_example1(base.structure,
                                    Expression::number(1.0), "example1");
    b.expected["nijenhuis"] = true;
    b.expected["lck"] = true;
    b.expected["sasaki-weyl"] = true;
    return b;
  }
  if (name == "example1-kx1") {
    ExampleBundle base = make_example2(n, weights, lambda);
    ExampleBundle b = make_example1(
        base.structure, base.structure.chart().parse_expr("x1"),
        "example1-kx1");
    // F^D = d(x1 theta0) has i_{T0} F != 0: the cone is not l.c.K. even
    // though the connection stays Sasaki-Weyl.
    b.expected["sasaki-weyl"] = true;
    b.expected["nijenhuis"] = false;
    b.expected["lck"] = false;
    return b;
  }
  if (name == "sphere") return make_sphere(n);
  if (name == "example3") return make_example3_cone(make_sphere(n), lambda);
  if (name == "example2-broken") return make_example2_broken();
  if (name == "example2-nonfactor") return make_example2_nonfactor();
  if (name == "example2-nonintegrable") return make_example2_nonintegrable();
  throw std::invalid_argument("unknown example '" + name + "'");
}

}  // namespace crweyl
