#include <catch2/catch_amalgamated.hpp>

#include "crweyl/catalog.hpp"
#include "support/oracles.hpp"

using namespace crweyl;

namespace {

const ExampleBundle& ex2() {
  static ExampleBundle b = make_example2(2, {1, -1}, 2.0);
  return b;
}

const ConeSpace& ex2_cone() {
  static ConeSpace c(ex2().structure);
  return c;
}

const ConeSpace& ex1_cone() {
  static ConeSpace c(
      make_example1(ex2().structure, Expression::number(1.0), "example1")
          .structure);
  return c;
}

}  // namespace

TEST_CASE("cone complex structure squares to minus the identity") {
  Rng rng(41);
  for (const ConeSpace* c : {&ex2_cone(), &ex1_cone()}) {
    double worst = 0.0;
    for (int i = 0; i < 25; ++i) {
      Eigen::VectorXd p = c->chart().sample(rng);
      Eigen::MatrixXd jm = c->complex_structure().value(p);
      for (int rep = 0; rep < 4; ++rep) {
        Eigen::VectorXd v = rng.vector(c->dim());
        worst = std::max(worst, (jm * (jm * v) + v).norm() / v.norm());
      }
    }
    CHECK(worst <= 1e-9);
  }
}

TEST_CASE("gamma = 0 gives J(d/dt) = T0 and J = I on H") {
  const ConeSpace& c = ex2_cone();
  Rng rng(43);
  Eigen::VectorXd p = c.chart().sample(rng);
  Eigen::VectorXd x = p.head(5);
  Eigen::VectorXd vert = Eigen::VectorXd::Zero(6);
  vert(5) = 1.0;
  Eigen::VectorXd jt = c.apply_j_at(p, vert);
  Eigen::VectorXd t0 = ex2().structure.reeb_at(x);
  CHECK((jt.head(5) - t0).norm() <= 1e-12);
  CHECK(std::abs(jt(5)) <= 1e-12);

  Eigen::VectorXd v = ex2().structure.project_h_at(x, rng.vector(5));
  Eigen::VectorXd lifted(6);
  lifted.head(5) = v;
  lifted(5) = 0.0;
  Eigen::VectorXd jv = c.apply_j_at(p, lifted);
  Eigen::VectorXd iv = ex2().structure.apply_cr_at(x, v);
  CHECK((jv.head(5) - iv).norm() <= 1e-11);
  CHECK(std::abs(jv(5)) <= 1e-11);
}

TEST_CASE("example 1 cone has J(d/dt) = T0 - t d/dt") {
  const ConeSpace& c = ex1_cone();
  Rng rng(47);
  Eigen::VectorXd p = c.chart().sample(rng);
  double t = p(5);
  Eigen::VectorXd vert = Eigen::VectorXd::Zero(6);
  vert(5) = 1.0;
  Eigen::VectorXd jt = c.apply_j_at(p, vert);
  Eigen::VectorXd t0 = ex2().structure.reeb_at(p.head(5));
  CHECK((jt.head(5) - t0).norm() <= 1e-11);
  CHECK(jt(5) == Catch::Approx(-t).margin(1e-11));
}

TEST_CASE("cone two-form pairs the vertical and reeb directions") {
  Rng rng(53);
  for (const ConeSpace* c : {&ex2_cone(), &ex1_cone()}) {
    for (int i = 0; i < 10; ++i) {
      Eigen::VectorXd p = c->chart().sample(rng);
      Eigen::VectorXd vert = c->vertical_field().value(p);
      Eigen::VectorXd reeb = c->reeb_horizontal().value(p);
      CHECK(c->two_form().evaluate(p, {vert, reeb}) ==
            Catch::Approx(0.5).margin(1e-12));
      Eigen::VectorXd u = rng.vector(6), v = rng.vector(6);
      double a = c->two_form().evaluate(p, {u, v});
      double b = c->two_form().evaluate(p, {v, u});
      CHECK(a == Catch::Approx(-b).margin(1e-12));
    }
  }
}

TEST_CASE("gamma = 0 cone is Kahler: d Omega = 0") {
  const ConeSpace& c = ex2_cone();
  KForm dw = exterior_derivative(c.two_form());
  Rng rng(59);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    Eigen::VectorXd p = c.chart().sample(rng);
    worst = std::max(worst, std::abs(dw.evaluate(
                                p, {rng.vector(6), rng.vector(6), rng.vector(6)})));
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("omega is J-invariant") {
  Rng rng(61);
  for (const ConeSpace* c : {&ex2_cone(), &ex1_cone()}) {
    double worst = 0.0;
    for (int i = 0; i < 15; ++i) {
      Eigen::VectorXd p = c->chart().sample(rng);
      Eigen::MatrixXd jm = c->complex_structure().value(p);
      Eigen::VectorXd u = rng.vector(6), v = rng.vector(6);
      worst = std::max(
          worst, std::abs(c->two_form().evaluate(
                              p, {Eigen::VectorXd(jm * u), Eigen::VectorXd(jm * v)}) -
                          c->two_form().evaluate(p, {u, v})));
    }
    CHECK(worst <= 1e-9);
  }
}

TEST_CASE("the J-potential identity holds and flips fail") {
  CHECK(ex2_cone().jpotential_residual(20, 42) <= 1e-9);
  CHECK(ex1_cone().jpotential_residual(20, 42) <= 1e-9);

  // replacing J by -J flips the sign of the transform and breaks it
  const ConeSpace& c = ex2_cone();
  Rng rng(67);
  double worst = 0.0;
  for (int i = 0; i < 10; ++i) {
    Eigen::VectorXd p = c.chart().sample(rng);
    double t = p(5);
    Eigen::VectorXd v = rng.vector(6);
    Eigen::VectorXd jv = c.apply_j_at(p, v);
    // beta = d(t^2) + 2 t^2 gamma reduces to 2 t dt here
    double beta_at_jv = 2.0 * t * jv(5);
    double flipped = beta_at_jv;        // -beta(-Jv)
    double target = 2.0 * t * c.theta_lifted().evaluate(p, {v});
    worst = std::max(worst, std::abs(flipped - target));
  }
  CHECK(worst > 1e-3);
}

TEST_CASE("cone metric identities") {
  Rng rng(71);
  for (const ConeSpace* c : {&ex2_cone(), &ex1_cone()}) {
    const CRWeylStructure& base = c->base();
    double g_tt = 0.0, g_rr = 0.0, g_xr = 0.0, g_sym = 0.0, scale = 0.0;
    bool positive = true;
    for (int i = 0; i < 12; ++i) {
      Eigen::VectorXd p = c->chart().sample(rng);
      Eigen::VectorXd x = p.head(5);
      double t = p(5);
      Eigen::VectorXd vert = c->vertical_field().value(p);
      Eigen::VectorXd reeb = c->reeb_horizontal().value(p);
      g_tt = std::max(g_tt, std::abs(c->metric(p, vert, vert) - 0.5));
      g_rr = std::max(g_rr, std::abs(c->metric(p, reeb, reeb) - 0.5));

      Eigen::VectorXd v = base.project_h_at(x, rng.vector(5));
      Eigen::VectorXd w = base.project_h_at(x, rng.vector(5));
      VectorField vf = VectorField::constant(v);
      Eigen::VectorXd vl = c->horizontal_lift(base.extend_h(v)).value(p);
      Eigen::VectorXd wl = c->horizontal_lift(base.extend_h(w)).value(p);
      g_xr = std::max(g_xr, std::abs(c->metric(p, vl, reeb)));
      g_xr = std::max(g_xr, std::abs(c->metric(p, vl, vert)));
      g_xr = std::max(g_xr, std::abs(c->metric(p, reeb, vert)));
      scale = std::max(scale, std::abs(c->metric(p, vl, wl) -
                                       t * base.levi_metric(x, v, w)));
      Eigen::VectorXd a = rng.vector(6), b = rng.vector(6);
      g_sym = std::max(g_sym,
                       std::abs(c->metric(p, a, b) - c->metric(p, b, a)));
      if (a.norm() > 1e-8 && c->metric(p, a, a) <= 0.0) positive = false;
    }
    CHECK(g_tt <= 1e-12);
    CHECK(g_rr <= 1e-12);
    CHECK(g_xr <= 1e-10);
    CHECK(scale <= 1e-10);
    CHECK(g_sym <= 1e-10);
    CHECK(positive);
  }
}

TEST_CASE("nijenhuis tensor vanishes for integrable cones") {
  Rng rng(73);
  for (const ConeSpace* c : {&ex2_cone(), &ex1_cone()}) {
    double worst = 0.0;
    for (int i = 0; i < 8; ++i) {
      Eigen::VectorXd p = c->chart().sample(rng);
      VectorField X = VectorField::constant(rng.vector(6));
      VectorField Y = VectorField::constant(rng.vector(6));
      worst = std::max(worst, c->nijenhuis(p, X, Y).norm());
      CHECK(c->nijenhuis(p, X, X).norm() <= 1e-12);
    }
    CHECK(worst <= 1e-8);
  }
}

TEST_CASE("nijenhuis is large for the broken connection") {
  ConeSpace c(make_example2_broken().structure);
  Rng rng(79);
  double worst = 0.0;
  for (int i = 0; i < 10; ++i) {
    Eigen::VectorXd p = c.chart().sample(rng);
    VectorField X = VectorField::constant(rng.vector(6));
    VectorField Y = VectorField::constant(rng.vector(6));
    worst = std::max(worst, c.nijenhuis(p, X, Y).norm());
  }
  CHECK(worst > 1e-3);
}

TEST_CASE("closed-form nijenhuis matches the bracket computation on H") {
  // across random connection perturbations; the bracket route is the oracle
  const CRWeylStructure& s = ex2().structure;
  Rng rng(mix_seed(42, "nijenhuis-closed"));
  std::vector<std::string> perturbations = {
      "0.4*x1", "0.3*y2 - 0.2*x2", "0.5*sin(x1)", "0.25*x1*y1", "0.3*t"};
  int checked = 0;
  for (const auto& which : {0, 1, 2, 3, 4}) {
    std::vector<Expression> g(5, Expression::number(0.0));
    g[static_cast<size_t>(which)] =
        s.chart().parse_expr(perturbations[static_cast<size_t>(which)]);
    CRWeylStructure pert(s.chart(), s.theta0(), s.endo(),
                         KForm::one_form_expressions(std::move(g)));
    ConeSpace cone(pert);
    for (int i = 0; i < 4; ++i) {
      Eigen::VectorXd p = cone.chart().sample(rng);
      Eigen::VectorXd x = p.head(5);
      Eigen::VectorXd v = pert.project_h_at(x, rng.vector(5));
      Eigen::VectorXd w = pert.project_h_at(x, rng.vector(5));
      VectorField Xt = cone.horizontal_lift(pert.extend_h(v));
      VectorField Yt = cone.horizontal_lift(pert.extend_h(w));
      Eigen::VectorXd nb = cone.nijenhuis(p, Xt, Yt);
      Eigen::VectorXd nc = cone.nijenhuis_closed_form(p, v, w);
      CHECK((nb - nc).norm() <= 1e-8 * (1.0 + nb.norm()));
      ++checked;
    }
  }
  CHECK(checked == 20);
}

TEST_CASE("mixed nijenhuis formula with the reeb lift") {
  const CRWeylStructure& s = ex2().structure;
  Rng rng(83);
  std::vector<Expression> g(5, Expression::number(0.0));
  g[0] = s.chart().parse_expr("0.4*y1");
  g[3] = s.chart().parse_expr("0.2*x2");
  CRWeylStructure pert(s.chart(), s.theta0(), s.endo(),
                       KForm::one_form_expressions(std::move(g)));
  ConeSpace cone(pert);
  for (int i = 0; i < 6; ++i) {
    Eigen::VectorXd p = cone.chart().sample(rng);
    Eigen::VectorXd x = p.head(5);
    double t = p(5);
    Eigen::VectorXd v = pert.project_h_at(x, rng.vector(5));
    VectorField Xt = cone.horizontal_lift(pert.extend_h(v));
    VectorField Tt = cone.reeb_horizontal();
    Eigen::VectorXd lhs = cone.nijenhuis(p, Xt, Tt);

    Eigen::VectorXd t0 = pert.reeb_at(x);
    Eigen::VectorXd iv = pert.apply_cr_at(x, v);
    double f_x_t0 = pert.faraday().evaluate(x, {v, t0});
    double f_ix_t0 = pert.faraday().evaluate(x, {iv, t0});
    Eigen::VectorXd vert = Eigen::VectorXd::Zero(6);
    vert(5) = 1.0;
    Eigen::VectorXd ttilde = Tt.value(p);
    Eigen::VectorXd defect = pert.sasaki_weyl_defect(x, iv);
    Eigen::VectorXd defect_lift(6);
    defect_lift.head(5) = defect;
    defect_lift(5) = -t * pert.gamma().evaluate(x, {defect});
    Eigen::VectorXd rhs =
        t * f_x_t0 * vert + t * f_ix_t0 * ttilde - defect_lift;
    CHECK((lhs - rhs).norm() <= 1e-8 * (1.0 + lhs.norm()));
  }
}

TEST_CASE("lck certificate for the parallel perturbation") {
  LckCertificate cert = ex1_cone().lck_check(20, 42);
  for (const auto& c : cert.report.checks) {
    INFO(c.name << " residual " << c.max_residual);
    CHECK(c.pass);
  }
  CHECK(std::abs(cert.kappa_mean - 1.0) <= 1e-8);
  for (double k : cert.kappa_samples) CHECK(std::abs(k - 1.0) <= 1e-8);
  for (bool in_locus : cert.global_kahler_locus) CHECK(in_locus);
}

TEST_CASE("lck certificate for the exact case has kappa = 0") {
  LckCertificate cert = ex2_cone().lck_check(20, 42);
  CHECK(cert.pass());
  for (double k : cert.kappa_samples) CHECK(std::abs(k) <= 1e-10);
}

TEST_CASE("lck fails when i_T F is nonzero") {
  ConeSpace c(make_example1(ex2().structure,
                            ex2().structure.chart().parse_expr("x1"),
                            "example1-kx1")
                  .structure);
  LckCertificate cert = c.lck_check(20, 42);
  CHECK_FALSE(cert.pass());
  const CheckResult* rc = cert.report.find("reeb-contraction");
  REQUIRE(rc != nullptr);
  CHECK(rc->max_residual > 1e-3);
  // the connection itself is still Sasaki-Weyl
  CHECK(cert.report.find("sasaki-weyl")->pass);
}

TEST_CASE("lck factorization fails for a non-proportional curvature") {
  ConeSpace c(make_example2_nonfactor().structure);
  LckCertificate cert = c.lck_check(20, 42);
  CHECK_FALSE(cert.pass());
  CHECK(cert.report.find("factorization")->max_residual > 1e-3);
}

TEST_CASE("lck fails for the broken sasaki-weyl connection") {
  ConeSpace c(make_example2_broken().structure);
  LckCertificate cert = c.lck_check(20, 42);
  CHECK_FALSE(cert.pass());
  CHECK(cert.report.find("sasaki-weyl")->max_residual > 1e-4);
}

TEST_CASE("equivalence battery: lck pass iff defect and curvature conditions") {
  // positive and negative controls in both directions
  struct Row {
    std::string name;
    bool lck_expected;
  };
  for (const Row& row : {Row{"example1", true}, Row{"example2", true},
                         Row{"sphere", true}, Row{"example1-kx1", false},
                         Row{"example2-broken", false},
                         Row{"example2-nonfactor", false}}) {
    ExampleBundle b = make_example(row.name);
    ConeSpace c(b.structure);
    LckCertificate cert = c.lck_check(12, 42);
    INFO(row.name);
    CHECK(cert.pass() == row.lck_expected);
  }
}
