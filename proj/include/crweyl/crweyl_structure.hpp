#pragma once

#include <optional>

#include "crweyl/forms.hpp"
#include "crweyl/report.hpp"

namespace crweyl {

// Frame of the contact distribution H = ker theta0 anchored at a point:
// coordinate directions projected onto H along the Reeb direction. The
// fields are globally defined; only the index choice is anchored.
struct HFrame {
  std::vector<int> indices;
  std::vector<VectorField> fields;
  std::vector<Eigen::VectorXd> values;

  int rank() const { return static_cast<int>(fields.size()); }
};

// CR structure with a Weyl connection, written in the trivialization of the
// co-contact bundle by a positive section: contact form theta0, extension A
// of the CR endomorphism to the whole tangent space, connection form gamma.
// Immutable; derived objects (Reeb field, curvature data) are built once.
class CRWeylStructure {
 public:
  CRWeylStructure() = default;

  // The optional complement is the direction along which the supplied
  // endomorphism is read into H (operations project onto H along it). It is
  // part of the CR data and must not depend on the connection; by default it
  // is the classical contact Reeb field of theta0.
  CRWeylStructure(Chart chart, KForm theta0, EndomorphismField endo,
                  KForm gamma,
                  std::optional<VectorField> complement = std::nullopt)
      : chart_(std::move(chart)),
        theta0_(std::move(theta0)),
        endo_(std::move(endo)),
        gamma_(std::move(gamma)) {
    const int n = chart_.dim();
    if (theta0_.degree() != 1 || theta0_.dim() != n)
      throw std::invalid_argument("structure: theta0 must be a 1-form on the chart");
    if (gamma_.degree() != 1 || gamma_.dim() != n)
      throw std::invalid_argument("structure: gamma must be a 1-form on the chart");
    if (endo_.dim() != n)
      throw std::invalid_argument("structure: endomorphism dimension mismatch");
    d_theta0_ = exterior_derivative(theta0_);
    weyl_two_form_ = d_theta0_ + wedge(gamma_, theta0_);
    reeb_ = make_reeb_field(weyl_two_form_);
    complement_ = complement ? std::move(*complement)
                             : make_reeb_field(d_theta0_);
    theta_of_complement_ =
        interior_product(complement_, theta0_).scalar_component();
    faraday_ = exterior_derivative(gamma_);
  }

  const Chart& chart() const { return chart_; }
  int dim() const { return chart_.dim(); }
  const KForm& theta0() const { return theta0_; }
  const KForm& gamma() const { return gamma_; }
  const EndomorphismField& endo() const { return endo_; }
  const KForm& d_theta0() const { return d_theta0_; }

  // Trivialized d^D eta = d theta0 + gamma ^ theta0.
  const KForm& weyl_two_form() const { return weyl_two_form_; }

  // Trivialized Faraday curvature F^D = d gamma.
  const KForm& faraday() const { return faraday_; }

  // Trivialized Reeb field T0: theta0(T0) = 1 and i_{T0} weyl_two_form = 0.
  const VectorField& reeb_field() const { return reeb_; }
  Eigen::VectorXd reeb_at(const Eigen::VectorXd& p) const {
    return reeb_.value(p);
  }

  double theta_of(const Eigen::VectorXd& p, const Eigen::VectorXd& v) const {
    return theta0_.evaluate(p, {v});
  }

  // Connection-independent complement of H used to read the endomorphism.
  const VectorField& complement_field() const { return complement_; }
  const ScalarField& theta_of_complement() const {
    return theta_of_complement_;
  }

  // Projection onto H along the complement direction.
  Eigen::VectorXd project_h_at(const Eigen::VectorXd& p,
                               const Eigen::VectorXd& v) const {
    return v - theta_of(p, v) / theta_of_complement_.value(p) *
                   complement_.value(p);
  }

  VectorField project_h(const VectorField& X) const {
    ScalarField c = interior_product(X, theta0_).scalar_component();
    ScalarField inv(
        [f = theta_of_complement_](const Eigen::VectorXd& p, int o) {
          return jet_pow_int(f.jet(p, o), -1);
        },
        theta_of_complement_.max_order());
    return X - (c * inv) * complement_;
  }

  // CR endomorphism as used by every operation: project onto H, apply the
  // supplied extension, read the result in H again. The catalog supplies
  // ambient matrices whose raw action leaves H only modulo the Reeb span.
  Eigen::VectorXd apply_cr_at(const Eigen::VectorXd& p,
                              const Eigen::VectorXd& v) const {
    Eigen::VectorXd h = project_h_at(p, v);
    return project_h_at(p, endo_.value(p) * h);
  }

  VectorField apply_cr(const VectorField& X) const {
    return project_h(endo_.apply(project_h(X)));
  }

  // Levi metric g0 = (1/2) d theta0 (. , I .) on H.
  double levi_metric(const Eigen::VectorXd& p, const Eigen::VectorXd& v,
                     const Eigen::VectorXd& w) const {
    if (std::abs(theta_of(p, v)) > 1e-10 || std::abs(theta_of(p, w)) > 1e-10)
      throw std::invalid_argument("levi_metric: vector not in H");
    return 0.5 * d_theta0_.evaluate(p, {v, apply_cr_at(p, w)});
  }

  Eigen::MatrixXd levi_gram(const Eigen::VectorXd& p,
                            const std::vector<Eigen::VectorXd>& frame) const {
    const int k = static_cast<int>(frame.size());
    Eigen::MatrixXd g(k, k);
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b)
        g(a, b) = 0.5 * d_theta0_.evaluate(p, {frame[a], apply_cr_at(p, frame[b])});
    return g;
  }

  HFrame h_frame(const Eigen::VectorXd& p) const {
    const int n = dim();
    Eigen::VectorXd z = complement_.value(p) / theta_of_complement_.value(p);
    Eigen::VectorXd th(n);
    for (int i = 0; i < n; ++i) th(i) = theta0_.component(i).value(p);
    Eigen::MatrixXd proj =
        Eigen::MatrixXd::Identity(n, n) - z * th.transpose();
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(proj);
    HFrame f;
    const int rank = n - 1;
    ScalarField inv(
        [g = theta_of_complement_](const Eigen::VectorXd& q, int o) {
          return jet_pow_int(g.jet(q, o), -1);
        },
        theta_of_complement_.max_order());
    for (int k = 0; k < rank; ++k) {
      int i = qr.colsPermutation().indices()(k);
      f.indices.push_back(i);
      f.values.push_back(proj.col(i));
      std::vector<ScalarField> comps;
      for (int j = 0; j < n; ++j) {
        ScalarField d = ScalarField::constant(i == j ? 1.0 : 0.0);
        comps.push_back(d - theta0_.component(i) * inv * complement_.component(j));
      }
      f.fields.emplace_back(std::move(comps));
    }
    return f;
  }

  // Extension of a tangent vector to an H-valued field (constant vector
  // projected pointwise). The Weyl-Lie defect is tensorial, so any extension
  // gives the same defect value.
  VectorField extend_h(const Eigen::VectorXd& v) const {
    return project_h(VectorField::constant(v));
  }

  // s0-component of the Weyl-Lie derivative of the CR endomorphism applied
  // to v in H: ([T0, IX] + gamma(IX) T0) - I([T0, X] + gamma(X) T0).
  Eigen::VectorXd sasaki_weyl_defect(const Eigen::VectorXd& p,
                                     const Eigen::VectorXd& v) const {
    if (std::abs(theta_of(p, v)) > 1e-8)
      throw std::invalid_argument("sasaki_weyl_defect: vector not in H");
    VectorField X = extend_h(v);
    return sasaki_weyl_defect_field(X, p);
  }

  Eigen::VectorXd sasaki_weyl_defect_field(const VectorField& X,
                                           const Eigen::VectorXd& p) const {
    VectorField IX = apply_cr(X);
    Eigen::VectorXd t0 = reeb_at(p);
    Eigen::VectorXd a = lie_bracket_at(reeb_, IX, p) +
                        gamma_.evaluate(p, {IX.value(p)}) * t0;
    Eigen::VectorXd b = lie_bracket_at(reeb_, X, p) +
                        gamma_.evaluate(p, {X.value(p)}) * t0;
    return a - apply_cr_at(p, b);
  }

  // Re-trivialization s0 -> e^u s0: theta0 -> e^-u theta0, gamma -> gamma + du.
  CRWeylStructure gauge_transform(const Expression& u) const {
    ScalarField factor(Expression::apply(Expression::Op::kExp, -u));
    KForm new_theta = factor * theta0_;
    KForm new_gamma = gamma_ + d_scalar(ScalarField(u), dim());
    return CRWeylStructure(chart_, new_theta, endo_, new_gamma, complement_);
  }

 private:
  VectorField make_reeb_field(const KForm& two_form) {
    const int n = chart_.dim();
    KForm w = two_form;
    KForm th = theta0_;
    int max_order = std::min(w.max_order(), th.max_order());
    max_order = std::min(max_order, 2);
    return VectorField::joint(
        n,
        [w, th, n](const Eigen::VectorXd& p, int o) {
          if (o > 2) throw std::logic_error("reeb field: jet order > 2");
          // entries of the stacked system [K; theta^T] T = e_{n+1},
          // K_ij = W(e_i, e_j)
          std::vector<std::vector<Jet>> entry(
              static_cast<size_t>(n + 1), std::vector<Jet>(static_cast<size_t>(n)));
          for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
              if (i < j) entry[i][j] = w.component2(i, j).jet(p, o);
              else if (i == j) entry[i][j] = Jet::constant(0.0, n, o);
              else entry[i][j] = -entry[j][i];
            }
          }
          for (int j = 0; j < n; ++j) entry[n][j] = th.component(j).jet(p, o);

          Eigen::MatrixXd A(n + 1, n);
          for (int i = 0; i <= n; ++i)
            for (int j = 0; j < n; ++j) A(i, j) = entry[i][j].value();
          Eigen::VectorXd b = Eigen::VectorXd::Zero(n + 1);
          b(n) = 1.0;

          Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
          if (qr.rank() < n)
            throw std::runtime_error(
                "reeb field: singular system (degenerate d theta0 on H)");
          Eigen::VectorXd T = qr.solve(b);
          if ((A * T - b).cwiseAbs().maxCoeff() >
              1e-9 * (1.0 + A.cwiseAbs().maxCoeff()))
            throw std::runtime_error("reeb field: inconsistent system");

          std::vector<Eigen::VectorXd> dT(static_cast<size_t>(n));
          std::vector<std::vector<Eigen::VectorXd>> ddT;
          if (o >= 1) {
            auto dA = [&](int k) {
              Eigen::MatrixXd m(n + 1, n);
              for (int i = 0; i <= n; ++i)
                for (int j = 0; j < n; ++j) m(i, j) = entry[i][j].grad()(k);
              return m;
            };
            std::vector<Eigen::MatrixXd> Ak;
            for (int k = 0; k < n; ++k) Ak.push_back(dA(k));
            for (int k = 0; k < n; ++k)
              dT[static_cast<size_t>(k)] = qr.solve(Eigen::VectorXd(-Ak[k] * T));
            if (o >= 2) {
              ddT.assign(static_cast<size_t>(n),
                         std::vector<Eigen::VectorXd>(static_cast<size_t>(n)));
              for (int k = 0; k < n; ++k) {
                for (int l = k; l < n; ++l) {
                  Eigen::MatrixXd Akl(n + 1, n);
                  for (int i = 0; i <= n; ++i)
                    for (int j = 0; j < n; ++j)
                      Akl(i, j) = entry[i][j].hess()(k, l);
                  Eigen::VectorXd rhs = -(Akl * T + Ak[k] * dT[l] + Ak[l] * dT[k]);
                  ddT[k][l] = qr.solve(rhs);
                  ddT[l][k] = ddT[k][l];
                }
              }
            }
          }

          std::vector<Jet> out;
          out.reserve(static_cast<size_t>(n));
          for (int i = 0; i < n; ++i) {
            Jet j(n, o);
            j.value() = T(i);
            if (o >= 1)
              for (int k = 0; k < n; ++k) j.grad()(k) = dT[k](i);
            if (o >= 2)
              for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) j.hess()(k, l) = ddT[k][l](i);
            out.push_back(std::move(j));
          }
          return out;
        },
        max_order);
  }

  Chart chart_;
  KForm theta0_;
  EndomorphismField endo_;
  KForm gamma_;
  KForm d_theta0_;
  KForm weyl_two_form_;
  KForm faraday_;
  VectorField reeb_;
  VectorField complement_;
  ScalarField theta_of_complement_;
};

// Runs the CR-Weyl structure invariants at seeded samples. Positivity-type
// checks report the violation magnitude with tolerance 0.
inline ValidationReport validate(const CRWeylStructure& s, int samples,
                                 std::uint64_t seed, double tol_scale = 1.0) {
  Rng rng(mix_seed(seed, "validate"));
  const int n = s.dim();
  double theta_vanish = 0.0;
  double frame_defect = 0.0;
  double acx = 0.0;          // ||I(Iv) + v|| / ||v|| on H
  double integrability = 0.0;
  double h_valued = 0.0;
  double nonconvex = 0.0;    // positivity violation of the Levi metric
  double reeb_res = 0.0;

  for (int sidx = 0; sidx < samples; ++sidx) {
    Eigen::VectorXd p = s.chart().sample(rng);
    Eigen::VectorXd th(n);
    for (int i = 0; i < n; ++i) th(i) = s.theta0().component(i).value(p);
    theta_vanish = std::max(theta_vanish, std::max(0.0, 1e-10 - th.norm()));

    HFrame f = s.h_frame(p);
    Eigen::MatrixXd fm(n, f.rank());
    for (int k = 0; k < f.rank(); ++k) fm.col(k) = f.values[static_cast<size_t>(k)];
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(fm);
    double cond = svd.singularValues()(f.rank() - 1) / svd.singularValues()(0);
    frame_defect = std::max(frame_defect, std::max(0.0, 1e-10 - cond));

    // A o A = -Id on H
    for (int rep = 0; rep < 3; ++rep) {
      Eigen::VectorXd v = s.project_h_at(p, rng.vector(n));
      if (v.norm() < 1e-8) continue;
      Eigen::VectorXd r = s.apply_cr_at(p, s.apply_cr_at(p, v)) + v;
      acx = std::max(acx, r.norm() / v.norm());
    }

    // CR integrability over frame pairs
    std::vector<VectorField> icache;
    for (const auto& X : f.fields) icache.push_back(s.apply_cr(X));
    for (size_t a = 0; a < f.fields.size(); ++a) {
      for (size_t b = a + 1; b < f.fields.size(); ++b) {
        const VectorField& X = f.fields[a];
        const VectorField& Y = f.fields[b];
        const VectorField& IX = icache[a];
        const VectorField& IY = icache[b];
        Eigen::VectorXd lhs =
            lie_bracket_at(IX, IY, p) - lie_bracket_at(X, Y, p);
        h_valued = std::max(h_valued, std::abs(s.theta_of(p, lhs)));
        Eigen::VectorXd rhs = s.apply_cr_at(
            p, lie_bracket_at(IX, Y, p) + lie_bracket_at(X, IY, p));
        integrability = std::max(integrability, (lhs - rhs).norm());
      }
    }

    // strong pseudoconvexity
    Eigen::MatrixXd g = s.levi_gram(p, f.values);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(
        0.5 * (g + g.transpose()));
    nonconvex = std::max(nonconvex, std::max(0.0, 1e-12 - eig.eigenvalues()(0)));

    // Reeb conditions
    Eigen::VectorXd t0 = s.reeb_at(p);
    reeb_res = std::max(reeb_res, std::abs(s.theta_of(p, t0) - 1.0));
    for (int i = 0; i < n; ++i) {
      Eigen::VectorXd ei = Eigen::VectorXd::Zero(n);
      ei(i) = 1.0;
      reeb_res = std::max(reeb_res,
                          std::abs(s.weyl_two_form().evaluate(p, {t0, ei})));
    }
  }

  ValidationReport rep;
  rep.add("theta0-nonvanishing", theta_vanish, 0.0);
  rep.add("h-rank", frame_defect, 0.0);
  rep.add("cr-square", acx, 1e-9 * tol_scale);
  rep.add("cr-integrability", integrability, 1e-9 * tol_scale);
  rep.add("cr-h-valued", h_valued, 1e-9 * tol_scale);
  rep.add("pseudoconvexity", nonconvex, 0.0);
  rep.add("reeb-conditions", reeb_res, 1e-9 * tol_scale);
  return rep;
}

}  // namespace crweyl
