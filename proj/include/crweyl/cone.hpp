#pragma once

#include "crweyl/crweyl_structure.hpp"

namespace crweyl {

// --- lifting base-chart objects to a product chart (one extra coordinate) ---

inline Jet pad_jet(const Jet& j, int extra = 1) {
  const int n = j.dim(), m = n + extra;
  Jet r(m, j.order());
  r.value() = j.value();
  if (j.order() >= 1) r.grad().head(n) = j.grad();
  if (j.order() >= 2) r.hess().topLeftCorner(n, n) = j.hess();
  if (j.order() >= 3)
    for (int k = 0; k < n; ++k) r.third(k).topLeftCorner(n, n) = j.third(k);
  return r;
}

// Base expressions evaluate on product points unchanged (their coordinate
// indices stay valid); numeric closures get the strip-and-pad wrapper.
inline ScalarField lift_scalar(const ScalarField& f, int base_dim,
                               int extra = 1) {
  if (f.symbolic()) return f;
  return ScalarField(
      [f, base_dim, extra](const Eigen::VectorXd& p, int o) {
        return pad_jet(f.jet(p.head(base_dim), o), extra);
      },
      f.max_order());
}

inline VectorField lift_field(const VectorField& X, int base_dim,
                              int extra = 1) {
  std::vector<ScalarField> comps;
  for (int i = 0; i < X.dim(); ++i)
    comps.push_back(lift_scalar(X.component(i), base_dim, extra));
  for (int i = 0; i < extra; ++i) comps.push_back(ScalarField::constant(0.0));
  return VectorField(std::move(comps));
}

inline KForm lift_form(const KForm& w, int base_dim, int extra = 1) {
  const int n = base_dim, m = base_dim + extra;
  if (w.degree() == 0) return KForm::scalar(lift_scalar(w.scalar_component(), n, extra));
  if (w.degree() == 1) {
    std::vector<ScalarField> comps;
    for (int i = 0; i < n; ++i)
      comps.push_back(lift_scalar(w.component(i), n, extra));
    for (int i = n; i < m; ++i) comps.push_back(ScalarField::constant(0.0));
    return KForm::one_form(std::move(comps));
  }
  if (w.degree() == 2 && w.has_table()) {
    std::vector<ScalarField> upper;
    for (int i = 0; i < m; ++i)
      for (int j = i + 1; j < m; ++j)
        upper.push_back(j < n ? lift_scalar(w.component2(i, j), n, extra)
                              : ScalarField::constant(0.0));
    return KForm::two_form(m, std::move(upper));
  }
  throw std::invalid_argument("lift_form: unsupported form");
}

// l.c.K. certification data for a cone (Theorem-level outcome).
struct LckCertificate {
  ValidationReport report;
  std::vector<double> kappa_samples;  // component of k w.r.t. s0^{-1}
  double kappa_mean = 0.0;
  KForm lee_form;                     // alpha = (2 kappa / t) pi* theta0
  ScalarField kappa_field;
  std::vector<bool> global_kahler_locus;  // kappa != 0 per sample

  bool pass() const { return report.pass(); }
};

// The cone M x R^{>0} of a CR-Weyl structure in the s0-trivialization,
// carrying the almost complex structure J and the 2-form
// Omega = (1/2) d(t theta0) + t gamma ^ theta0.
class ConeSpace {
 public:
  explicit ConeSpace(CRWeylStructure base, double t_lo = 0.5, double t_hi = 2.0)
      : base_(std::move(base)) {
    const int n = base_.dim();
    chart_.coords = base_.chart().coords;
    std::string fiber = "tau";
    for (bool clash = true; clash;) {
      clash = false;
      for (const auto& c : chart_.coords)
        if (c == fiber) {
          fiber += "_";
          clash = true;
        }
    }
    chart_.coords.push_back(fiber);
    chart_.box_lo.resize(n + 1);
    chart_.box_hi.resize(n + 1);
    chart_.box_lo.head(n) = base_.chart().box_lo;
    chart_.box_hi.head(n) = base_.chart().box_hi;
    chart_.box_lo(n) = t_lo;
    chart_.box_hi(n) = t_hi;
    chart_.exclusions = base_.chart().exclusions;

    theta_l_ = lift_form(base_.theta0(), n);
    gamma_l_ = lift_form(base_.gamma(), n);
    faraday_l_ = lift_form(base_.faraday(), n);
    reeb_l_ = lift_field(base_.reeb_field(), n);
    j_ = make_complex_structure();
    omega_ = make_two_form();
  }

  const CRWeylStructure& base() const { return base_; }
  const Chart& chart() const { return chart_; }
  int dim() const { return chart_.dim(); }
  int fiber_index() const { return dim() - 1; }

  const EndomorphismField& complex_structure() const { return j_; }
  const KForm& two_form() const { return omega_; }
  const KForm& theta_lifted() const { return theta_l_; }
  const KForm& gamma_lifted() const { return gamma_l_; }
  const KForm& faraday_lifted() const { return faraday_l_; }

  Eigen::VectorXd apply_j_at(const Eigen::VectorXd& p,
                             const Eigen::VectorXd& v) const {
    return j_.value(p) * v;
  }

  double metric(const Eigen::VectorXd& p, const Eigen::VectorXd& u,
                const Eigen::VectorXd& v) const {
    return omega_.evaluate(p, {u, apply_j_at(p, v)});
  }

  // D-horizontal lift of a base field: X - t gamma(X) d/dt.
  VectorField horizontal_lift(const VectorField& X) const {
    const int n = base_.dim();
    VectorField lifted = lift_field(X, n);
    ScalarField gx = interior_product(lifted, gamma_l_).scalar_component();
    std::vector<ScalarField> comps;
    for (int i = 0; i < n; ++i) comps.push_back(lifted.component(i));
    comps.push_back(-(t_coord() * gx));
    return VectorField(std::move(comps));
  }

  VectorField reeb_horizontal() const {
    return horizontal_lift(base_.reeb_field());
  }

  VectorField vertical_field() const {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(dim());
    e(fiber_index()) = 1.0;
    return VectorField::constant(e);
  }

  ScalarField t_coord() const {
    return ScalarField(Expression::coordinate(fiber_index()));
  }

  // N^J(X,Y) = [JX,JY] - J([JX,Y] + [X,JY]) - [X,Y] for cone fields.
  Eigen::VectorXd nijenhuis(const Eigen::VectorXd& p, const VectorField& X,
                            const VectorField& Y) const {
    VectorField JX = j_.apply(X);
    VectorField JY = j_.apply(Y);
    Eigen::VectorXd mixed =
        lie_bracket_at(JX, Y, p) + lie_bracket_at(X, JY, p);
    return lie_bracket_at(JX, JY, p) - j_.value(p) * mixed -
           lie_bracket_at(X, Y, p);
  }

  // Closed form of N^J on horizontal lifts of H-vectors, via the
  // anti-invariant part F^{I-}(A,B) = (F(A,B) - F(IA,IB))/2 of the Faraday
  // curvature: 2 t F^{I-}(X,Y) d/dt + 2 t F^{I-}(IX,Y) (T0 horizontal).
  Eigen::VectorXd nijenhuis_closed_form(const Eigen::VectorXd& p,
                                        const Eigen::VectorXd& vx,
                                        const Eigen::VectorXd& vy) const {
    const int n = base_.dim();
    Eigen::VectorXd x = p.head(n);
    double t = p(fiber_index());
    if (std::abs(base_.theta_of(x, vx)) > 1e-8 ||
        std::abs(base_.theta_of(x, vy)) > 1e-8)
      throw std::invalid_argument("nijenhuis_closed_form: arguments not in H");
    auto fmin = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
      double fab = base_.faraday().evaluate(x, {a, b});
      double fiaib = base_.faraday().evaluate(
          x, {base_.apply_cr_at(x, a), base_.apply_cr_at(x, b)});
      return 0.5 * (fab - fiaib);
    };
    Eigen::VectorXd t0 = base_.reeb_at(x);
    double gt0 = base_.gamma().evaluate(x, {t0});
    Eigen::VectorXd t0_tilde(dim());
    t0_tilde.head(n) = t0;
    t0_tilde(fiber_index()) = -t * gt0;
    Eigen::VectorXd vert = Eigen::VectorXd::Zero(dim());
    vert(fiber_index()) = 1.0;
    return 2.0 * t * fmin(vx, vy) * vert +
           2.0 * t * fmin(base_.apply_cr_at(x, vx), vy) * t0_tilde;
  }

  // max |J(dt^2 + 2 t^2 gamma) - 2 t theta0| over samples and frame vectors,
  // with (J beta)(v) := -beta(Jv).
  double jpotential_residual(int samples, std::uint64_t seed) const {
    Rng rng(mix_seed(seed, "jpotential"));
    const int m = dim();
    std::vector<ScalarField> beta_comps;
    for (int i = 0; i < m - 1; ++i)
      beta_comps.push_back(2.0 * (t_coord() * t_coord() *
                                  gamma_l_.component(i)));
    beta_comps.push_back(2.0 * t_coord());  // d(t^2) = 2t dt
    KForm beta = KForm::one_form(std::move(beta_comps));
    double worst = 0.0;
    for (int s = 0; s < samples; ++s) {
      Eigen::VectorXd p = chart_.sample(rng);
      Eigen::MatrixXd jm = j_.value(p);
      for (int i = 0; i < m; ++i) {
        Eigen::VectorXd v = Eigen::VectorXd::Zero(m);
        v(i) = 1.0;
        double lhs = -beta.evaluate(p, {Eigen::VectorXd(jm * v)});
        double rhs = 2.0 * p(fiber_index()) * theta_l_.evaluate(p, {v});
        worst = std::max(worst, std::abs(lhs - rhs));
      }
    }
    return worst;
  }

  LckCertificate lck_check(int samples, std::uint64_t seed,
                           double tol_scale = 1.0) const;

 private:
  EndomorphismField make_complex_structure() {
    const int n = base_.dim();
    const int m = n + 1;
    KForm th = theta_l_, ga = gamma_l_;
    VectorField t0f = reeb_l_;
    VectorField zf = lift_field(base_.complement_field(), n);
    ScalarField thz = lift_scalar(base_.theta_of_complement(), n);
    EndomorphismField A = base_.endo();
    return EndomorphismField::joint(
        m,
        [th, ga, t0f, zf, thz, A, n, m](const Eigen::VectorXd& p, int o) {
          Eigen::VectorXd x = p.head(n);
          std::vector<Jet> tj, gj, t0, zc;
          for (int i = 0; i < n; ++i) {
            tj.push_back(th.component(i).jet(p, o));
            gj.push_back(ga.component(i).jet(p, o));
            t0.push_back(t0f.component(i).jet(p, o));
            zc.push_back(zf.component(i).jet(p, o));
          }
          Jet zt = thz.jet(p, o);
          std::vector<std::vector<Jet>> a(static_cast<size_t>(n),
                                          std::vector<Jet>(static_cast<size_t>(n)));
          for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k)
              a[i][k] = pad_jet(A.entry(i, k).jet(x, o));
          Jet t = Jet::coordinate(p(n), n, m, o);
          Jet gt0 = Jet::constant(0.0, m, o);
          for (int k = 0; k < n; ++k) gt0 = gt0 + gj[k] * t0[k];

          std::vector<std::vector<Jet>> J(
              static_cast<size_t>(m), std::vector<Jet>(static_cast<size_t>(m)));
          // column for the fiber direction: J(d/dt) = T0 - t gamma(T0) d/dt
          for (int i = 0; i < n; ++i) J[i][m - 1] = t0[i];
          J[m - 1][m - 1] = -(t * gt0);
          // base columns
          for (int jcol = 0; jcol < n; ++jcol) {
            Jet aco = tj[jcol];  // theta0(e_j)
            std::vector<Jet> vH(static_cast<size_t>(n));
            for (int i = 0; i < n; ++i) {
              vH[i] = -(aco * t0[i]);
              if (i == jcol) vH[i] = vH[i] + Jet::constant(1.0, m, o);
            }
            std::vector<Jet> AvH(static_cast<size_t>(n), Jet::constant(0.0, m, o));
            for (int i = 0; i < n; ++i)
              for (int k = 0; k < n; ++k) AvH[i] = AvH[i] + a[i][k] * vH[k];
            // read the endomorphism in H again (ambient matrices preserve H
            // only modulo the complement span)
            Jet thAvH = Jet::constant(0.0, m, o);
            for (int k = 0; k < n; ++k) thAvH = thAvH + tj[k] * AvH[k];
            Jet ratio = thAvH / zt;
            std::vector<Jet> IvH(static_cast<size_t>(n));
            for (int i = 0; i < n; ++i) IvH[i] = AvH[i] - ratio * zc[i];
            Jet gvH = Jet::constant(0.0, m, o), gIvH = Jet::constant(0.0, m, o);
            for (int k = 0; k < n; ++k) {
              gvH = gvH + gj[k] * vH[k];
              gIvH = gIvH + gj[k] * IvH[k];
            }
            for (int i = 0; i < n; ++i)
              J[i][jcol] = IvH[i] + t * gvH * t0[i] + aco * (t * gt0 * t0[i]);
            J[m - 1][jcol] = -(t * t * gvH * gt0 + t * gIvH) -
                             aco * (Jet::constant(1.0, m, o) + t * t * gt0 * gt0);
          }
          return J;
        },
        std::min({th.max_order(), ga.max_order(), t0f.max_order(),
                  zf.max_order(), A.max_order()}));
  }

  KForm make_two_form() {
    const int n = base_.dim();
    std::vector<ScalarField> ttheta;
    for (int i = 0; i < n; ++i)
      ttheta.push_back(t_coord() * theta_l_.component(i));
    ttheta.push_back(ScalarField::constant(0.0));
    KForm half_d = 0.5 * exterior_derivative(KForm::one_form(std::move(ttheta)));
    KForm gw = t_coord() * wedge(gamma_l_, theta_l_);
    return half_d + gw;
  }

  CRWeylStructure base_;
  Chart chart_;
  KForm theta_l_, gamma_l_, faraday_l_;
  VectorField reeb_l_;
  EndomorphismField j_;
  KForm omega_;
};

inline LckCertificate ConeSpace::lck_check(int samples, std::uint64_t seed,
                                           double tol_scale) const {
  Rng rng(mix_seed(seed, "lck"));
  const int n = base_.dim();
  const int m = dim();
  LckCertificate cert;

  // (i) the construction identity d Omega = t F^D ^ theta0 - 2 Omega ^ gamma
  KForm domega = exterior_derivative(omega_);
  KForm rhs = t_coord() * wedge(faraday_l_, theta_l_) +
              (-2.0) * wedge(omega_, gamma_l_);
  double id_res = 0.0;

  // kappa as a field: least squares of F against d^D theta over all
  // coordinate pairs (smooth in the base point, no frame selection).
  const KForm F = base_.faraday();
  const KForm W = base_.weyl_two_form();
  int kf_order = std::min(F.max_order(), W.max_order());
  ScalarField kappa(
      [F, W, n](const Eigen::VectorXd& x, int o) {
        Jet num = Jet::constant(0.0, n, o), den = Jet::constant(0.0, n, o);
        for (int i = 0; i < n; ++i) {
          for (int j = i + 1; j < n; ++j) {
            Eigen::VectorXd ei = Eigen::VectorXd::Zero(n),
                            ej = Eigen::VectorXd::Zero(n);
            ei(i) = 1.0;
            ej(j) = 1.0;
            Jet f = F.evaluate_jet(x, {ei, ej}, o);
            Jet w = W.evaluate_jet(x, {ei, ej}, o);
            num = num + f * w;
            den = den + w * w;
          }
        }
        if (den.value() < 1e-16)
          throw std::runtime_error("lck_check: degenerate d^D theta0");
        return num / den;
      },
      kf_order);
  cert.kappa_field = kappa;

  double factor_res = 0.0, t_indep = 0.0, kappa_consistency = 0.0;
  double reeb_contraction = 0.0, bianchi = 0.0, lee_closed = 0.0,
         global_kahler = 0.0, sw_defect = 0.0;

  // D(k) + k^2 eta in the trivialization: d kappa - kappa gamma + kappa^2 theta0
  KForm dk = d_scalar(kappa, n);
  KForm parallel_defect =
      dk + (-1.0) * (kappa * base_.gamma()) + (kappa * kappa) * base_.theta0();

  // Kahler form of the conformally rescaled cone on the locus kappa != 0
  KForm kahler = (lift_scalar(kappa * kappa, n)) * omega_;
  KForm dkahler = exterior_derivative(kahler);

  for (int s = 0; s < samples; ++s) {
    Eigen::VectorXd p = chart_.sample(rng);
    Eigen::VectorXd x = p.head(n);

    std::vector<Eigen::VectorXd> tri = {rng.vector(m), rng.vector(m),
                                        rng.vector(m)};
    id_res = std::max(id_res, std::abs(domega.evaluate(p, tri) -
                                       rhs.evaluate(p, tri)));

    // per-point least squares over H-frame pairs
    HFrame f = base_.h_frame(x);
    double num = 0.0, den = 0.0;
    std::vector<std::pair<double, double>> pairs;
    for (size_t a = 0; a < f.values.size(); ++a) {
      for (size_t b = a + 1; b < f.values.size(); ++b) {
        double fv = base_.faraday().evaluate(x, {f.values[a], f.values[b]});
        double wv = W.evaluate(x, {f.values[a], f.values[b]});
        pairs.emplace_back(fv, wv);
        num += fv * wv;
        den += wv * wv;
      }
    }
    if (std::sqrt(den) <= 1e-8)
      throw std::runtime_error("lck_check: degenerate d^D theta0 on H");
    double kap = num / den;
    for (auto [fv, wv] : pairs)
      factor_res = std::max(factor_res, std::abs(fv - kap * wv));
    cert.kappa_samples.push_back(kap);
    cert.global_kahler_locus.push_back(std::abs(kap) > 1e-8);

    // cone-level route: solve Omega ^ (lambda theta0) = F ^ theta0 for
    // lambda at t in {0.5, 1, 2}; kappa = t lambda / 2 must not depend on t
    if (std::abs(kap) > 1e-12 || s % 8 == 0) {
      KForm lhs_base = wedge(omega_, theta_l_);
      KForm rhs_base = wedge(faraday_l_, theta_l_);
      for (double tv : {0.5, 1.0, 2.0}) {
        Eigen::VectorXd q(m);
        q.head(n) = x;
        q(m - 1) = tv;
        double num2 = 0.0, den2 = 0.0;
        for (int rep = 0; rep < 6; ++rep) {
          std::vector<Eigen::VectorXd> tr = {rng.vector(m), rng.vector(m),
                                             rng.vector(m)};
          double av = lhs_base.evaluate(q, tr);
          double bv = rhs_base.evaluate(q, tr);
          num2 += av * bv;
          den2 += av * av;
        }
        if (den2 > 1e-16)
          t_indep = std::max(t_indep, std::abs(tv * (num2 / den2) / 2.0 - kap));
      }
    }

    kappa_consistency =
        std::max(kappa_consistency, std::abs(kappa.value(x) - kap));

    Eigen::VectorXd t0 = base_.reeb_at(x);
    for (int i = 0; i < n; ++i) {
      Eigen::VectorXd ei = Eigen::VectorXd::Zero(n);
      ei(i) = 1.0;
      reeb_contraction = std::max(
          reeb_contraction, std::abs(base_.faraday().evaluate(x, {t0, ei})));
    }

    // the theorem requires the connection to be Sasaki-Weyl as well
    {
      Eigen::VectorXd v = base_.project_h_at(x, rng.vector(n));
      if (v.norm() > 1e-6)
        sw_defect =
            std::max(sw_defect, base_.sasaki_weyl_defect(x, v).norm() / v.norm());
    }

    for (int i = 0; i < n; ++i) {
      Eigen::VectorXd ei = Eigen::VectorXd::Zero(n);
      ei(i) = 1.0;
      bianchi = std::max(bianchi, std::abs(parallel_defect.evaluate(x, {ei})));
    }

    // recorded Lee-form convention: alpha = (2 kappa / t) pi* theta0 with
    // d(t alpha - 2 pi* gamma) = 0
    {
      KForm talpha_minus =
          2.0 * (kappa * base_.theta0()) + (-2.0) * base_.gamma();
      KForm dconv = exterior_derivative(talpha_minus);
      for (int rep = 0; rep < 2; ++rep) {
        Eigen::VectorXd u = rng.vector(n), v = rng.vector(n);
        lee_closed = std::max(lee_closed, std::abs(dconv.evaluate(x, {u, v})));
      }
    }

    if (std::abs(kap) > 1e-8) {
      std::vector<Eigen::VectorXd> tri2 = {rng.vector(m), rng.vector(m),
                                           rng.vector(m)};
      global_kahler =
          std::max(global_kahler, std::abs(dkahler.evaluate(p, tri2)));
    }
  }

  double sum = 0.0;
  for (double k : cert.kappa_samples) sum += k;
  cert.kappa_mean = sum / static_cast<double>(cert.kappa_samples.size());

  ScalarField lee_coef =
      2.0 * lift_scalar(kappa, n) *
      ScalarField([m](const Eigen::VectorXd& p, int o) {
        return jet_pow_int(Jet::coordinate(p(m - 1), m - 1, m, o), -1);
      }, 3);
  cert.lee_form = lee_coef * theta_l_;

  cert.report.add("domega-identity", id_res, 1e-9 * tol_scale);
  cert.report.add("sasaki-weyl", sw_defect, 1e-8 * tol_scale);
  cert.report.add("factorization", factor_res, 1e-8 * tol_scale);
  cert.report.add("kappa-t-independence", t_indep, 1e-9 * tol_scale);
  cert.report.add("kappa-consistency", kappa_consistency, 1e-8 * tol_scale);
  cert.report.add("reeb-contraction", reeb_contraction, 1e-8 * tol_scale);
  cert.report.add("parallel-section", bianchi, 1e-8 * tol_scale);
  cert.report.add("lee-form-closed", lee_closed, 1e-8 * tol_scale);
  cert.report.add("global-kahler", global_kahler, 1e-8 * tol_scale);
  return cert;
}

}  // namespace crweyl
