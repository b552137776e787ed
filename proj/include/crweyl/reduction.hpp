#pragma once

#include "crweyl/cone.hpp"
#include "crweyl/jet_linalg.hpp"

namespace crweyl {

// A finite generator of the action: a chart self-map with its inverse.
struct DiscreteMap {
  std::vector<Expression> forward;
  std::vector<Expression> inverse;
};

// Group action by CR-Weyl automorphisms: infinitesimal generators of the
// identity component plus discrete generators. s_sampler draws points of
// the moment zero set S (the constraint is solved analytically per example,
// never by root finding).
struct GroupActionSpec {
  CRWeylStructure structure;
  std::vector<VectorField> generators;
  std::vector<DiscreteMap> discrete;
  std::function<Eigen::VectorXd(Rng&)> s_sampler;
};

// Moment map components Theta_a = theta0(xi^a), kept symbolic.
struct MomentData {
  std::vector<ScalarField> components;
  double epsilon = 1e-10;

  Eigen::VectorXd value(const Eigen::VectorXd& p) const {
    Eigen::VectorXd v(static_cast<int>(components.size()));
    for (size_t a = 0; a < components.size(); ++a)
      v(static_cast<int>(a)) = components[a].value(p);
    return v;
  }

  bool on_zero_set(const Eigen::VectorXd& p) const {
    for (const auto& c : components)
      if (std::abs(c.value(p)) > epsilon) return false;
    return true;
  }
};

inline MomentData moment_data(const GroupActionSpec& a) {
  MomentData m;
  for (const auto& xi : a.generators)
    m.components.push_back(
        interior_product(xi, a.structure.theta0()).scalar_component());
  return m;
}

inline Eigen::VectorXd moment_map(const GroupActionSpec& a,
                                  const Eigen::VectorXd& p) {
  return moment_data(a).value(p);
}

// Both characterizations of T_x S from the tangency proposition:
// pairing d^D eta (v, xi^a) = 0 and covariant gradient D_v(Theta_a) = 0.
struct TangencyResult {
  bool tangent = false;
  double pairing_residual = 0.0;
  double gradient_residual = 0.0;
};

inline TangencyResult tangent_to_s(const GroupActionSpec& a,
                                   const Eigen::VectorXd& p,
                                   const Eigen::VectorXd& v,
                                   double tol = 1e-9) {
  MomentData m = moment_data(a);
  if (!m.on_zero_set(p))
    throw std::invalid_argument("tangent_to_s: point not on the zero set");
  const CRWeylStructure& s = a.structure;
  TangencyResult r;
  for (size_t idx = 0; idx < a.generators.size(); ++idx) {
    Eigen::VectorXd xi = a.generators[idx].value(p);
    r.pairing_residual = std::max(
        r.pairing_residual, std::abs(s.weyl_two_form().evaluate(p, {v, xi})));
    double grad = d_scalar(m.components[idx], s.dim()).evaluate(p, {v}) +
                  s.gamma().evaluate(p, {v}) * m.components[idx].value(p);
    r.gradient_residual = std::max(r.gradient_residual, std::abs(grad));
  }
  double scale = 1.0 + v.norm();
  r.tangent = r.pairing_residual <= tol * scale;
  return r;
}

// g0-orthogonal splitting H = T + IT + E along S, as projector matrices on
// ambient tangent vectors.
struct HDecomposition {
  Eigen::MatrixXd proj_orbit;
  Eigen::MatrixXd proj_iorbit;
  Eigen::MatrixXd proj_e;
  Eigen::MatrixXd proj_h;
  int rank_orbit = 0;
  int rank_iorbit = 0;
  int rank_e = 0;
};

inline HDecomposition h_decomposition(const GroupActionSpec& a,
                                      const Eigen::VectorXd& p) {
  const CRWeylStructure& s = a.structure;
  const int n = s.dim();
  const int g = static_cast<int>(a.generators.size());
  Eigen::VectorXd t0 = s.reeb_at(p);
  Eigen::VectorXd th(n);
  for (int i = 0; i < n; ++i) th(i) = s.theta0().component(i).value(p);
  Eigen::MatrixXd ph = Eigen::MatrixXd::Identity(n, n) - t0 * th.transpose();

  HFrame f = s.h_frame(p);
  const int k = f.rank();
  Eigen::MatrixXd F(n, k);
  for (int i = 0; i < k; ++i) F.col(i) = f.values[static_cast<size_t>(i)];
  Eigen::MatrixXd M = s.levi_gram(p, f.values);
  M = 0.5 * (M + M.transpose());
  Eigen::MatrixXd Fpinv =
      (F.transpose() * F).ldlt().solve(F.transpose());  // k x n

  auto frame_coords = [&](const Eigen::VectorXd& v) {
    return Eigen::VectorXd(Fpinv * (ph * v));
  };
  auto orth_projector = [&](const Eigen::MatrixXd& basis) {
    // g0-orthogonal projector onto span(basis) in frame coordinates
    Eigen::MatrixXd gram = basis.transpose() * M * basis;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
    if (!lu.isInvertible())
      throw std::runtime_error("h_decomposition: degenerate orbit directions");
    return Eigen::MatrixXd(basis * lu.solve(basis.transpose() * M));
  };

  HDecomposition out;
  out.proj_h = ph;
  if (g == 0) {
    out.proj_orbit = Eigen::MatrixXd::Zero(n, n);
    out.proj_iorbit = Eigen::MatrixXd::Zero(n, n);
    out.proj_e = ph;
    out.rank_e = k;
    return out;
  }
  Eigen::MatrixXd BT(k, g), BIT(k, g);
  for (int c = 0; c < g; ++c) {
    Eigen::VectorXd xi = a.generators[static_cast<size_t>(c)].value(p);
    BT.col(c) = frame_coords(xi);
    BIT.col(c) = frame_coords(s.apply_cr_at(p, xi));
  }
  Eigen::MatrixXd joint(k, 2 * g);
  joint << BT, BIT;
  Eigen::MatrixXd pt = orth_projector(BT);
  Eigen::MatrixXd pit = orth_projector(BIT);
  Eigen::MatrixXd pjoint = orth_projector(joint);
  Eigen::MatrixXd pe = Eigen::MatrixXd::Identity(k, k) - pjoint;

  auto to_ambient = [&](const Eigen::MatrixXd& pf) {
    return Eigen::MatrixXd(F * pf * Fpinv * ph);
  };
  out.proj_orbit = to_ambient(pt);
  out.proj_iorbit = to_ambient(pit);
  out.proj_e = to_ambient(pe);
  out.rank_orbit = g;
  out.rank_iorbit = g;
  out.rank_e = k - 2 * g;
  return out;
}

// A chart of the quotient: embedding iota of the reduced chart into the zero
// set, plus the trivialization gauge u that makes the pulled-back data
// periodic across discrete identifications (theta = e^-u iota* theta0,
// gamma = iota* gamma + du).
struct SliceChart {
  Chart reduced_chart;
  std::vector<Expression> embedding;
  Expression gauge;  // empty means 0

  ScalarField gauge_field() const {
    return gauge.empty() ? ScalarField::constant(0.0) : ScalarField(gauge);
  }
};

inline ValidationReport validate_slice(const GroupActionSpec& a,
                                       const SliceChart& slice, int samples,
                                       std::uint64_t seed) {
  Rng rng(mix_seed(seed, "slice"));
  MomentData m = moment_data(a);
  const int md = slice.reduced_chart.dim();
  const int n = a.structure.dim();
  double zero_set = 0.0, transversality = 0.0, domain = 0.0;
  for (int s = 0; s < samples; ++s) {
    Eigen::VectorXd q = slice.reduced_chart.sample(rng);
    Eigen::VectorXd x(n);
    Eigen::MatrixXd di(n, md);
    for (int i = 0; i < n; ++i) {
      Jet j = slice.embedding[static_cast<size_t>(i)].evaluate_jet(q, 1);
      x(i) = j.value();
      di.row(i) = j.grad().transpose();
    }
    for (const auto& c : m.components)
      zero_set = std::max(zero_set, std::abs(c.value(x)));
    if (!a.structure.chart().contains(x)) domain = 1.0;
    Eigen::MatrixXd Z(n, md + static_cast<int>(a.generators.size()));
    Z.leftCols(md) = di;
    for (size_t g = 0; g < a.generators.size(); ++g)
      Z.col(md + static_cast<int>(g)) = a.generators[g].value(x);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(Z);
    double smin = svd.singularValues()(Z.cols() - 1);
    transversality = std::max(transversality, std::max(0.0, 1e-8 - smin));
  }
  ValidationReport rep;
  rep.add("slice-in-zero-set", zero_set, 1e-9);
  rep.add("slice-transversality", transversality, 0.0);
  rep.add("slice-in-domain", domain, 0.0);
  return rep;
}

namespace detail {

// Push an ambient vector at iota(q) down to the reduced chart: solve
// [d iota | xi^a] (v, c) = w. Throws when the slice is not transverse.
inline Eigen::VectorXd push_down(const GroupActionSpec& a,
                                 const SliceChart& slice,
                                 const Eigen::VectorXd& q,
                                 const Eigen::VectorXd& w,
                                 double* residual = nullptr) {
  const int n = a.structure.dim();
  const int md = slice.reduced_chart.dim();
  const int g = static_cast<int>(a.generators.size());
  Eigen::VectorXd x(n);
  Eigen::MatrixXd Z(n, md + g);
  for (int i = 0; i < n; ++i) {
    Jet j = slice.embedding[static_cast<size_t>(i)].evaluate_jet(q, 1);
    x(i) = j.value();
    Z.row(i).head(md) = j.grad().transpose();
  }
  for (int c = 0; c < g; ++c)
    Z.col(md + c) = a.generators[static_cast<size_t>(c)].value(x);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Z);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Z);
  if (svd.singularValues()(Z.cols() - 1) < 1e-8)
    throw std::runtime_error("push_down: slice not transverse to orbits");
  Eigen::VectorXd sol = qr.solve(w);
  if (residual) *residual = (Z * sol - w).norm();
  return sol.head(md);
}

}  // namespace detail

// Reduced CR-Weyl structure on a slice chart: theta = e^-u iota* theta0,
// gamma = iota* gamma + du, and the reduced endomorphism obtained by
// lifting, projecting onto E, applying I and pushing back down.
inline CRWeylStructure reduce(const GroupActionSpec& a,
                              const SliceChart& slice) {
  const CRWeylStructure& s = a.structure;
  const int n = s.dim();
  const int md = slice.reduced_chart.dim();
  const int g = static_cast<int>(a.generators.size());

  auto map = map_from_expressions(slice.embedding);
  ScalarField u = slice.gauge_field();
  ScalarField scale = slice.gauge.empty()
                          ? ScalarField::constant(1.0)
                          : ScalarField(Expression::apply(
                                Expression::Op::kExp, -slice.gauge));
  KForm theta_hat = scale * pullback(map, s.theta0(), md);
  KForm gamma_hat = pullback(map, s.gamma(), md) + d_scalar(u, md);

  // Reeb field of the reduced forms (independent of the endomorphism).
  CRWeylStructure proto(slice.reduced_chart, theta_hat,
                        EndomorphismField::constant(
                            Eigen::MatrixXd::Zero(md, md)),
                        gamma_hat);
  VectorField reeb_hat = proto.reeb_field();

  // Reduced endomorphism entries as a joint jet closure (order 1).
  auto embedding = slice.embedding;
  auto theta_amb = s.theta0();
  auto dtheta_amb = s.d_theta0();
  auto endo_amb = s.endo();
  auto compl_amb = s.complement_field();
  auto thz_amb = s.theta_of_complement();
  auto generators = a.generators;
  auto theta_hat_copy = theta_hat;

  EndomorphismField endo_hat = EndomorphismField::joint(
      md,
      [embedding, theta_amb, dtheta_amb, endo_amb, compl_amb, thz_amb,
       generators, theta_hat_copy, reeb_hat, n, md, g](const Eigen::VectorXd& q,
                                                       int o) {
        if (o > 1)
          throw std::logic_error("reduced endomorphism: jet order > 1");
        std::vector<Jet> mj;
        Eigen::VectorXd x(n);
        for (int i = 0; i < n; ++i) {
          mj.push_back(embedding[static_cast<size_t>(i)].evaluate_jet(q, o + 1));
          x(i) = mj.back().value();
        }
        auto comp = [&](const ScalarField& f) {
          return compose_jet(f.jet(x, o), mj);
        };
        auto comp_vec = [&](const VectorField& X) {
          JetVector v;
          for (int i = 0; i < n; ++i) v.push_back(comp(X.component(i)));
          return v;
        };
        // ambient ingredients as jets in the reduced coordinates
        JetVector th(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) th[i] = comp(theta_amb.component(i));
        JetVector z0 = comp_vec(compl_amb);
        Jet zt = comp(thz_amb);
        JetMatrix A(static_cast<size_t>(n), JetVector(static_cast<size_t>(n)));
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) A[i][j] = comp(endo_amb.entry(i, j));
        JetMatrix dth(static_cast<size_t>(n), JetVector(static_cast<size_t>(n)));
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j)
            dth[i][j] = (i == j) ? Jet::constant(0, md, o)
                                 : comp(dtheta_amb.component2(i, j));
        std::vector<JetVector> xi(static_cast<size_t>(g));
        for (int c = 0; c < g; ++c)
          xi[static_cast<size_t>(c)] = comp_vec(generators[static_cast<size_t>(c)]);

        auto theta_of = [&](const JetVector& v) {
          Jet r = Jet::constant(0, md, o);
          for (int i = 0; i < n; ++i) r = r + th[i] * v[i];
          return r;
        };
        auto proj_h = [&](const JetVector& v) {
          Jet c = theta_of(v) / zt;
          JetVector r(static_cast<size_t>(n));
          for (int i = 0; i < n; ++i) r[i] = v[i] - c * z0[i];
          return r;
        };
        auto apply_i = [&](const JetVector& v) {
          JetVector h = proj_h(v);
          JetVector r(static_cast<size_t>(n), Jet::constant(0, md, o));
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) r[i] = r[i] + A[i][j] * h[j];
          return proj_h(r);
        };
        auto levi = [&](const JetVector& v, const JetVector& w) {
          JetVector iw = apply_i(w);
          Jet r = Jet::constant(0, md, o);
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
              if (i != j) r = r + (dth[i][j] * v[i]) * iw[j];
          return 0.5 * r;
        };

        // d iota columns
        std::vector<JetVector> dio(static_cast<size_t>(md),
                                   JetVector(static_cast<size_t>(n)));
        for (int i = 0; i < md; ++i)
          for (int aidx = 0; aidx < n; ++aidx)
            dio[i][aidx] = mj[aidx].derivative(i);

        // orbit + I(orbit) basis on H
        std::vector<JetVector> B;
        for (int c = 0; c < g; ++c) {
          B.push_back(proj_h(xi[static_cast<size_t>(c)]));
          B.push_back(apply_i(xi[static_cast<size_t>(c)]));
        }

        std::vector<std::vector<Jet>> out(
            static_cast<size_t>(md),
            std::vector<Jet>(static_cast<size_t>(md)));
        for (int col = 0; col < md; ++col) {
          // v = P_H e_col in the reduced chart
          Jet tc = theta_hat_copy.component(col).jet(q, o);
          JetVector vhat(static_cast<size_t>(md));
          for (int i = 0; i < md; ++i) {
            vhat[i] = -(tc * reeb_hat.component(i).jet(q, o));
            if (i == col) vhat[i] = vhat[i] + Jet::constant(1.0, md, o);
          }
          // lift through d iota
          JetVector lift(static_cast<size_t>(n), Jet::constant(0, md, o));
          for (int aidx = 0; aidx < n; ++aidx)
            for (int i = 0; i < md; ++i)
              lift[aidx] = lift[aidx] + dio[i][aidx] * vhat[i];
          JetVector uH = proj_h(lift);
          // project onto E: subtract the g0-orthogonal component in span(B)
          if (!B.empty()) {
            const int bsize = static_cast<int>(B.size());
            JetMatrix gram(static_cast<size_t>(bsize),
                           JetVector(static_cast<size_t>(bsize)));
            JetVector rhs(static_cast<size_t>(bsize));
            for (int r = 0; r < bsize; ++r) {
              for (int c = 0; c < bsize; ++c)
                gram[r][c] = levi(B[static_cast<size_t>(r)],
                                  B[static_cast<size_t>(c)]);
              rhs[r] = levi(B[static_cast<size_t>(r)], uH);
            }
            JetVector coef = jet_solve(std::move(gram), std::move(rhs));
            for (int r = 0; r < bsize; ++r)
              for (int i = 0; i < n; ++i)
                uH[i] = uH[i] - coef[r] * B[static_cast<size_t>(r)][i];
          }
          JetVector w = apply_i(uH);
          // push down: [d iota | xi] (vhat', c) = w via least squares
          JetMatrix Z(static_cast<size_t>(n),
                      JetVector(static_cast<size_t>(md + g)));
          for (int aidx = 0; aidx < n; ++aidx) {
            for (int i = 0; i < md; ++i) Z[aidx][i] = dio[i][aidx];
            for (int c = 0; c < g; ++c)
              Z[aidx][md + c] = xi[static_cast<size_t>(c)][aidx];
          }
          {
            Eigen::MatrixXd zv(n, md + g);
            for (int r = 0; r < n; ++r)
              for (int c = 0; c < md + g; ++c) zv(r, c) = Z[r][c].value();
            Eigen::JacobiSVD<Eigen::MatrixXd> svd(zv);
            if (svd.singularValues()(md + g - 1) < 1e-8)
              throw std::runtime_error(
                  "reduce: slice not transverse to orbits");
          }
          JetVector sol = jet_lsq(Z, w);
          for (int i = 0; i < md; ++i) out[i][col] = sol[static_cast<size_t>(i)];
        }
        return out;
      },
      1);

  return CRWeylStructure(slice.reduced_chart, theta_hat, endo_hat, gamma_hat);
}

// max_q || e^u(q) push_down(T0 at iota(q)) - reduced Reeb at q ||.
inline double reeb_projection_residual(const GroupActionSpec& a,
                                       const SliceChart& slice,
                                       const CRWeylStructure& reduced,
                                       int samples, std::uint64_t seed) {
  Rng rng(mix_seed(seed, "reeb-projection"));
  ScalarField u = slice.gauge_field();
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    Eigen::VectorXd q = slice.reduced_chart.sample(rng);
    Eigen::VectorXd x(a.structure.dim());
    for (int i = 0; i < a.structure.dim(); ++i)
      x(i) = slice.embedding[static_cast<size_t>(i)].evaluate(q);
    Eigen::VectorXd t0 = a.structure.reeb_at(x);
    Eigen::VectorXd down = detail::push_down(a, slice, q, t0);
    Eigen::VectorXd predicted = std::exp(u.value(q)) * down;
    worst = std::max(worst, (predicted - reduced.reeb_at(q)).norm());
  }
  return worst;
}

// Scaling character of the action on the parallel trivializing contact form:
// g* theta0 = rho(g) theta0. Requires an exact ambient connection.
struct RhoResult {
  std::vector<double> factors;
  double constancy_residual = 0.0;
  double multiplicativity_residual = 0.0;
};

inline RhoResult rho(const GroupActionSpec& a, int samples,
                     std::uint64_t seed) {
  Rng rng(mix_seed(seed, "rho"));
  const CRWeylStructure& s = a.structure;
  const int n = s.dim();
  {
    Rng pre(mix_seed(seed, "rho-pre"));
    for (int i = 0; i < 8; ++i) {
      Eigen::VectorXd p = s.chart().sample(pre);
      for (int j = 0; j < n; ++j)
        if (std::abs(s.gamma().component(j).value(p)) > 1e-9)
          throw std::invalid_argument(
              "rho: ambient connection is not exact in this trivialization");
    }
  }
  RhoResult out;
  auto factor_of = [&](const std::vector<Expression>& fwd) {
    auto fmap = map_from_expressions(fwd);
    KForm pulled = pullback(fmap, s.theta0(), n);
    double factor = 0.0;
    bool first = true;
    double constancy = 0.0;
    for (int i = 0; i < samples; ++i) {
      Eigen::VectorXd p = s.chart().sample(rng);
      double num = 0.0, den = 0.0;
      for (int j = 0; j < n; ++j) {
        Eigen::VectorXd ej = Eigen::VectorXd::Zero(n);
        ej(j) = 1.0;
        double tv = s.theta0().evaluate(p, {ej});
        num += pulled.evaluate(p, {ej}) * tv;
        den += tv * tv;
      }
      double c = num / den;
      if (first) {
        factor = c;
        first = false;
      }
      constancy = std::max(constancy, std::abs(c - factor) /
                                          std::max(1.0, std::abs(factor)));
      // residual of proportionality itself
      for (int j = 0; j < n; ++j) {
        Eigen::VectorXd ej = Eigen::VectorXd::Zero(n);
        ej(j) = 1.0;
        constancy = std::max(
            constancy, std::abs(pulled.evaluate(p, {ej}) -
                                c * s.theta0().evaluate(p, {ej})));
      }
    }
    out.constancy_residual = std::max(out.constancy_residual, constancy);
    return factor;
  };
  for (const auto& dmap : a.discrete) out.factors.push_back(factor_of(dmap.forward));
  // multiplicativity on words of length two
  for (size_t i = 0; i < a.discrete.size(); ++i) {
    for (size_t j = 0; j < a.discrete.size(); ++j) {
      std::vector<Expression> word;
      for (const auto& comp : a.discrete[i].forward)
        word.push_back(comp.substitute(a.discrete[j].forward));
      double f = factor_of(word);
      out.multiplicativity_residual =
          std::max(out.multiplicativity_residual,
                   std::abs(f - out.factors[i] * out.factors[j]));
    }
  }
  return out;
}

// Closed path in a chart, components as expressions of one parameter in
// [0,1]. Endpoints may be identified by the chart's quotient construction.
struct Loop {
  std::vector<Expression> path;

  Eigen::VectorXd at(double t) const {
    Eigen::VectorXd s(1);
    s(0) = t;
    Eigen::VectorXd p(static_cast<int>(path.size()));
    for (size_t i = 0; i < path.size(); ++i)
      p(static_cast<int>(i)) = path[i].evaluate(s);
    return p;
  }
};

struct HolonomyResult {
  double holonomy = 0.0;
  double closedness_residual = 0.0;
};

// integral of gamma-hat along the loop by adaptive Simpson quadrature.
inline HolonomyResult exactness_check(const CRWeylStructure& reduced,
                                      const Loop& loop) {
  const int md = reduced.dim();
  auto integrand = [&](double t) {
    Eigen::VectorXd s(1);
    s(0) = t;
    Eigen::VectorXd p(md);
    Eigen::VectorXd dp(md);
    for (int i = 0; i < md; ++i) {
      Jet j = loop.path[static_cast<size_t>(i)].evaluate_jet(s, 1);
      p(i) = j.value();
      dp(i) = j.grad()(0);
    }
    if (!reduced.chart().contains(p))
      throw std::runtime_error("exactness_check: loop leaves the chart domain");
    return reduced.gamma().evaluate(p, {dp});
  };
  std::function<double(double, double, double, double, double, int)> simpson =
      [&](double lo, double hi, double flo, double fmid, double fhi,
          int depth) -> double {
    double mid = 0.5 * (lo + hi);
    double lmid = integrand(0.5 * (lo + mid));
    double rmid = integrand(0.5 * (mid + hi));
    double whole = (hi - lo) / 6.0 * (flo + 4 * fmid + fhi);
    double left = (mid - lo) / 6.0 * (flo + 4 * lmid + fmid);
    double right = (hi - mid) / 6.0 * (fmid + 4 * rmid + fhi);
    if (depth <= 0 || std::abs(left + right - whole) < 1e-12)
      return left + right + (left + right - whole) / 15.0;
    return simpson(lo, mid, flo, lmid, fmid, depth - 1) +
           simpson(mid, hi, fmid, rmid, fhi, depth - 1);
  };
  HolonomyResult r;
  double f0 = integrand(0.0), f1 = integrand(1.0), fm = integrand(0.5);
  r.holonomy = simpson(0.0, 1.0, f0, fm, f1, 24);

  // closedness of gamma-hat along the loop
  KForm dg = exterior_derivative(reduced.gamma());
  Rng rng(2);
  for (int i = 0; i <= 16; ++i) {
    Eigen::VectorXd p = loop.at(i / 16.0);
    Eigen::VectorXd u = rng.vector(md), v = rng.vector(md);
    r.closedness_residual =
        std::max(r.closedness_residual, std::abs(dg.evaluate(p, {u, v})));
  }
  return r;
}

// Moment map of the lifted action on the cone: (1/2) t Theta_a.
inline Eigen::VectorXd cone_moment_map(const GroupActionSpec& a,
                                       const ConeSpace& cone,
                                       const Eigen::VectorXd& p) {
  const int n = a.structure.dim();
  Eigen::VectorXd base = moment_map(a, p.head(n));
  return 0.5 * p(cone.fiber_index()) * base;
}

// Residual of omega(X, xi-lift) = (1/2) Dbar_X (t Theta_a), the moment-map
// identity on the cone; Dbar on weight-2 densities adds 2 (t Theta) gamma.
inline double cone_moment_identity_residual(const GroupActionSpec& a,
                                            const ConeSpace& cone, int samples,
                                            std::uint64_t seed) {
  Rng rng(mix_seed(seed, "cone-moment"));
  const int n = a.structure.dim();
  const int m = cone.dim();
  MomentData md = moment_data(a);
  double worst = 0.0;
  for (size_t idx = 0; idx < a.generators.size(); ++idx) {
    VectorField lift = cone.horizontal_lift(a.generators[idx]);
    ScalarField ttheta =
        cone.t_coord() * lift_scalar(md.components[idx], n);
    KForm dt_theta = d_scalar(ttheta, m);
    for (int s = 0; s < samples; ++s) {
      Eigen::VectorXd p = cone.chart().sample(rng);
      Eigen::VectorXd xiv = lift.value(p);
      for (int rep = 0; rep < 3; ++rep) {
        Eigen::VectorXd X = rng.vector(m);
        double lhs = cone.two_form().evaluate(p, {X, xiv});
        double rhs = 0.5 * (dt_theta.evaluate(p, {X}) +
                            2.0 * ttheta.value(p) *
                                cone.gamma_lifted().evaluate(p, {X}));
        worst = std::max(worst, std::abs(lhs - rhs));
      }
    }
  }
  return worst;
}

struct ConeCommutativity {
  double j_discrepancy = 0.0;
  double metric_discrepancy = 0.0;
  double span_residual = 0.0;
};

// Compares the complex structure and metric induced on the reduced cone by
// the ambient-cone reduction against the cone of the reduced structure.
inline ConeCommutativity cone_commutativity(const GroupActionSpec& a,
                                            const SliceChart& slice,
                                            const CRWeylStructure& reduced,
                                            int samples, std::uint64_t seed) {
  ConeSpace amb(a.structure);
  ConeSpace red(reduced);
  const int n = a.structure.dim();
  const int md = slice.reduced_chart.dim();
  const int g = static_cast<int>(a.generators.size());
  ScalarField u = slice.gauge_field();
  Rng rng(mix_seed(seed, "commutativity"));
  ConeCommutativity out;

  for (int s = 0; s < samples; ++s) {
    Eigen::VectorXd qred = red.chart().sample(rng);
    Eigen::VectorXd q = qred.head(md);
    double that = qred(md);
    Jet uj = u.jet(q, 1);
    double eu = std::exp(uj.value());
    double tamb = that * eu;

    Eigen::VectorXd x(n);
    Eigen::MatrixXd di(n, md);
    for (int i = 0; i < n; ++i) {
      Jet j = slice.embedding[static_cast<size_t>(i)].evaluate_jet(q, 1);
      x(i) = j.value();
      di.row(i) = j.grad().transpose();
    }
    Eigen::VectorXd P(n + 1);
    P.head(n) = x;
    P(n) = tamb;

    // differential of the cone embedding (q, that) -> (iota(q), that e^u)
    Eigen::MatrixXd dc = Eigen::MatrixXd::Zero(n + 1, md + 1);
    dc.topLeftCorner(n, md) = di;
    dc.row(n).head(md) = (that * eu) * uj.grad().transpose();
    dc(n, md) = eu;

    // horizontal lifts of the orbit directions
    Eigen::MatrixXd xis(n + 1, std::max(g, 1));
    std::vector<Eigen::VectorXd> xil;
    for (int c = 0; c < g; ++c) {
      Eigen::VectorXd xiv = a.generators[static_cast<size_t>(c)].value(x);
      Eigen::VectorXd lifted(n + 1);
      lifted.head(n) = xiv;
      lifted(n) = -tamb * a.structure.gamma().evaluate(x, {xiv});
      xil.push_back(lifted);
    }

    // basis of L + E-lift + Reeb-lift (the J-invariant complement of the
    // orbit directions inside the tangent space of the zero set)
    HDecomposition hd = h_decomposition(a, x);
    HFrame frame = a.structure.h_frame(x);
    Eigen::MatrixXd ecand(n, frame.rank());
    for (int i = 0; i < frame.rank(); ++i)
      ecand.col(i) = hd.proj_e * frame.values[static_cast<size_t>(i)];
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> eqr(ecand);
    std::vector<Eigen::VectorXd> ebasis;
    for (int i = 0; i < hd.rank_e; ++i)
      ebasis.push_back(ecand.col(eqr.colsPermutation().indices()(i)));

    auto hlift = [&](const Eigen::VectorXd& v) {
      Eigen::VectorXd lv(n + 1);
      lv.head(n) = v;
      lv(n) = -tamb * a.structure.gamma().evaluate(x, {v});
      return lv;
    };
    Eigen::VectorXd t0 = a.structure.reeb_at(x);
    std::vector<Eigen::VectorXd> wbasis;
    Eigen::VectorXd vert = Eigen::VectorXd::Zero(n + 1);
    vert(n) = 1.0;
    wbasis.push_back(vert);
    wbasis.push_back(hlift(t0));
    for (const auto& e : ebasis) wbasis.push_back(hlift(e));
    Eigen::MatrixXd B(n + 1, static_cast<int>(wbasis.size()) + g);
    for (size_t i = 0; i < wbasis.size(); ++i)
      B.col(static_cast<int>(i)) = wbasis[i];
    for (int c = 0; c < g; ++c)
      B.col(static_cast<int>(wbasis.size()) + c) = xil[static_cast<size_t>(c)];

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> bqr(B);
    Eigen::MatrixXd push(n + 1, md + 1 + g);
    push.leftCols(md + 1) = dc;
    for (int c = 0; c < g; ++c) push.col(md + 1 + c) = xil[static_cast<size_t>(c)];
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> pqr(push);
    {
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(push);
      if (svd.singularValues()(push.cols() - 1) < 1e-8)
        throw std::runtime_error(
            "cone_commutativity: embedding not transverse to cone orbits");
    }

    Eigen::MatrixXd jamb = amb.complex_structure().value(P);
    Eigen::MatrixXd jred = red.complex_structure().value(qred);

    std::vector<Eigen::VectorXd> w0s;
    for (int k = 0; k <= md; ++k) {
      Eigen::VectorXd vhat = Eigen::VectorXd::Zero(md + 1);
      vhat(k) = 1.0;
      Eigen::VectorXd w = dc * vhat;
      Eigen::VectorXd z = bqr.solve(w);
      out.span_residual = std::max(out.span_residual, (B * z - w).norm());
      Eigen::VectorXd w0 = w;
      for (int c = 0; c < g; ++c)
        w0 -= z(static_cast<int>(wbasis.size()) + c) * xil[static_cast<size_t>(c)];
      w0s.push_back(w0);

      Eigen::VectorXd jw = jamb * w0;
      Eigen::VectorXd sol = pqr.solve(jw);
      double res = (push * sol - jw).norm();
      out.span_residual = std::max(out.span_residual, res);
      Eigen::VectorXd j1 = sol.head(md + 1);
      Eigen::VectorXd j2 = jred * vhat;
      out.j_discrepancy = std::max(out.j_discrepancy, (j1 - j2).norm());
    }

    // metric comparison on basis pairs
    for (int k = 0; k <= md; ++k) {
      for (int l = k; l <= md; ++l) {
        Eigen::VectorXd ek = Eigen::VectorXd::Zero(md + 1),
                        el = Eigen::VectorXd::Zero(md + 1);
        ek(k) = 1.0;
        el(l) = 1.0;
        double g1 = std::exp(-2.0 * uj.value()) *
                    amb.metric(P, w0s[static_cast<size_t>(k)],
                               w0s[static_cast<size_t>(l)]);
        double g2 = red.metric(qred, ek, el);
        out.metric_discrepancy =
            std::max(out.metric_discrepancy, std::abs(g1 - g2));
      }
    }
  }
  return out;
}

// Invariant checks for a group action by CR-Weyl automorphisms.
inline ValidationReport validate_action(const GroupActionSpec& a, int samples,
                                        std::uint64_t seed,
                                        double tol_scale = 1.0) {
  Rng rng(mix_seed(seed, "action"));
  const CRWeylStructure& s = a.structure;
  const int n = s.dim();
  MomentData md = moment_data(a);

  double preserves_h = 0.0, preserves_i = 0.0, horizontality = 0.0,
         invariance = 0.0, moment_inv = 0.0;
  double d_gamma = 0.0, d_h = 0.0, d_i = 0.0, d_inv = 0.0;

  std::vector<KForm> pulled_theta, pulled_gamma;
  std::vector<std::vector<ScalarField>> maps;
  for (const auto& dm : a.discrete) {
    auto fmap = map_from_expressions(dm.forward);
    maps.push_back(fmap);
    pulled_theta.push_back(pullback(fmap, s.theta0(), n));
    pulled_gamma.push_back(pullback(fmap, s.gamma(), n));
  }

  std::vector<KForm> lie_theta;
  for (const auto& xi : a.generators)
    lie_theta.push_back(lie_derivative_one_form(xi, s.theta0()));

  for (int smp = 0; smp < samples; ++smp) {
    Eigen::VectorXd p = s.chart().sample(rng);
    HFrame f = s.h_frame(p);

    for (size_t gi = 0; gi < a.generators.size(); ++gi) {
      const VectorField& xi = a.generators[gi];
      Eigen::VectorXd xiv = xi.value(p);
      // L_xi theta0 ^ theta0 = 0 (H preserved)
      KForm wedge_check = wedge(lie_theta[gi], s.theta0());
      for (int rep = 0; rep < 2; ++rep) {
        Eigen::VectorXd uu = rng.vector(n), vv = rng.vector(n);
        preserves_h = std::max(preserves_h,
                               std::abs(wedge_check.evaluate(p, {uu, vv})));
      }
      // [xi, IX] - I [xi, X] for frame fields
      for (const auto& X : f.fields) {
        VectorField IX = s.apply_cr(X);
        Eigen::VectorXd r =
            lie_bracket_at(xi, IX, p) -
            s.apply_cr_at(p, lie_bracket_at(xi, X, p));
        preserves_i = std::max(preserves_i, std::abs(s.theta_of(p, r)));
        preserves_i = std::max(preserves_i, s.project_h_at(p, r).norm());
      }
      horizontality =
          std::max(horizontality, std::abs(s.gamma().evaluate(p, {xiv})));
      for (int i = 0; i < n; ++i) {
        Eigen::VectorXd ei = Eigen::VectorXd::Zero(n);
        ei(i) = 1.0;
        invariance = std::max(invariance,
                              std::abs(s.faraday().evaluate(p, {xiv, ei})));
      }
      for (const auto& th : md.components)
        moment_inv = std::max(
            moment_inv, std::abs(d_scalar(th, n).evaluate(p, {xiv})));
    }

    for (size_t di = 0; di < a.discrete.size(); ++di) {
      for (int i = 0; i < n; ++i) {
        Eigen::VectorXd ei = Eigen::VectorXd::Zero(n);
        ei(i) = 1.0;
        d_gamma = std::max(d_gamma,
                           std::abs(pulled_gamma[di].evaluate(p, {ei}) -
                                    s.gamma().evaluate(p, {ei})));
      }
      KForm wedge_check = wedge(pulled_theta[di], s.theta0());
      for (int rep = 0; rep < 2; ++rep) {
        Eigen::VectorXd uu = rng.vector(n), vv = rng.vector(n);
        d_h = std::max(d_h, std::abs(wedge_check.evaluate(p, {uu, vv})));
      }
      // dg o I = I o dg on H
      Eigen::VectorXd gp(n);
      Eigen::MatrixXd dg(n, n);
      for (int i = 0; i < n; ++i) {
        Jet j = a.discrete[di].forward[static_cast<size_t>(i)].evaluate_jet(p, 1);
        gp(i) = j.value();
        dg.row(i) = j.grad().transpose();
      }
      for (int rep = 0; rep < 2; ++rep) {
        Eigen::VectorXd v = s.project_h_at(p, rng.vector(n));
        Eigen::VectorXd lhs = dg * s.apply_cr_at(p, v);
        Eigen::VectorXd rhs = s.apply_cr_at(gp, Eigen::VectorXd(dg * v));
        d_i = std::max(d_i, (lhs - rhs).norm() / std::max(1.0, v.norm()));
      }
      Eigen::VectorXd back(n);
      for (int j = 0; j < n; ++j)
        back(j) = a.discrete[di].inverse[static_cast<size_t>(j)].evaluate(gp);
      d_inv = std::max(d_inv, (back - p).norm());
    }
  }

  ValidationReport rep;
  rep.add("generator-preserves-h", preserves_h, 1e-9 * tol_scale);
  rep.add("generator-preserves-i", preserves_i, 1e-9 * tol_scale);
  rep.add("horizontality", horizontality, 1e-9 * tol_scale);
  rep.add("curvature-invariance", invariance, 1e-9 * tol_scale);
  rep.add("moment-invariance", moment_inv, 1e-9 * tol_scale);
  if (!a.discrete.empty()) {
    rep.add("discrete-preserves-gamma", d_gamma, 1e-9 * tol_scale);
    rep.add("discrete-preserves-h", d_h, 1e-9 * tol_scale);
    rep.add("discrete-preserves-i", d_i, 1e-9 * tol_scale);
    rep.add("discrete-inverse", d_inv, 1e-9 * tol_scale);
  }
  return rep;
}

}  // namespace crweyl
