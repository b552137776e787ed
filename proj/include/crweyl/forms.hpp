#pragma once

#include "crweyl/vector_field.hpp"

namespace crweyl {

// Differential k-form. Degrees 0-2 carry a coordinate-component table of
// scalar fields (degree 2 stores the strict upper triangle); higher degrees,
// which only arise transiently from d and wedge, are alternating evaluators.
class KForm {
 public:
  using EvalFn = std::function<Jet(const Eigen::VectorXd&,
                                   const std::vector<Eigen::VectorXd>&, int)>;

  KForm() = default;

  static KForm scalar(ScalarField f) {
    KForm w;
    w.degree_ = 0;
    w.dim_ = 0;  // dimension-agnostic
    w.max_order_ = f.max_order();
    w.table_ = {std::move(f)};
    return w;
  }

  static KForm one_form(std::vector<ScalarField> comps) {
    KForm w;
    w.degree_ = 1;
    w.dim_ = static_cast<int>(comps.size());
    w.max_order_ = 3;
    for (const auto& c : comps) w.max_order_ = std::min(w.max_order_, c.max_order());
    w.table_ = std::move(comps);
    return w;
  }

  static KForm one_form_expressions(std::vector<Expression> comps) {
    std::vector<ScalarField> f(comps.begin(), comps.end());
    return one_form(std::move(f));
  }

  static KForm zero_one_form(int dim) {
    return one_form(std::vector<ScalarField>(static_cast<size_t>(dim)));
  }

  // Upper-triangle components in lexicographic order: (0,1), (0,2), ...
  static KForm two_form(int dim, std::vector<ScalarField> upper) {
    if (static_cast<int>(upper.size()) != dim * (dim - 1) / 2)
      throw std::invalid_argument("two_form: wrong component count");
    KForm w;
    w.degree_ = 2;
    w.dim_ = dim;
    w.max_order_ = 3;
    for (const auto& c : upper) w.max_order_ = std::min(w.max_order_, c.max_order());
    w.table_ = std::move(upper);
    return w;
  }

  static KForm evaluator(int degree, int dim, EvalFn fn, int max_order) {
    KForm w;
    w.degree_ = degree;
    w.dim_ = dim;
    w.max_order_ = max_order;
    w.eval_ = std::move(fn);
    return w;
  }

  int degree() const { return degree_; }
  int dim() const { return dim_; }
  int max_order() const { return max_order_; }
  bool has_table() const { return !table_.empty() || degree_ == 0; }

  const ScalarField& scalar_component() const { return table_.at(0); }
  const ScalarField& component(int i) const {
    if (degree_ != 1) throw std::logic_error("component: not a 1-form");
    return table_.at(static_cast<size_t>(i));
  }

  // Signed degree-2 component as a field; (i,j) with i>j flips sign.
  ScalarField component2(int i, int j) const {
    if (degree_ != 2 || !has_table())
      throw std::logic_error("component2: not a tabled 2-form");
    if (i == j) return ScalarField::constant(0.0);
    if (i < j) return table_[upper_index(i, j)];
    return -table_[upper_index(j, i)];
  }

  Jet evaluate_jet(const Eigen::VectorXd& p,
                   const std::vector<Eigen::VectorXd>& vs, int order) const {
    if (static_cast<int>(vs.size()) != degree_)
      throw std::invalid_argument("k-form: argument count != degree");
    if (!has_table()) return eval_(p, vs, order);
    switch (degree_) {
      case 0:
        return table_[0].jet(p, order);
      case 1: {
        Jet acc(static_cast<int>(p.size()), order);
        for (int i = 0; i < dim_; ++i) {
          double c = vs[0](i);
          if (c != 0.0) acc = acc + table_[static_cast<size_t>(i)].jet(p, order) * c;
        }
        return acc;
      }
      case 2: {
        Jet acc(static_cast<int>(p.size()), order);
        for (int i = 0; i < dim_; ++i) {
          for (int j = i + 1; j < dim_; ++j) {
            double c = vs[0](i) * vs[1](j) - vs[0](j) * vs[1](i);
            if (c != 0.0) acc = acc + table_[upper_index(i, j)].jet(p, order) * c;
          }
        }
        return acc;
      }
      default:
        throw std::logic_error("tabled form of degree > 2");
    }
  }

  double evaluate(const Eigen::VectorXd& p,
                  const std::vector<Eigen::VectorXd>& vs) const {
    return evaluate_jet(p, vs, 0).value();
  }

  friend KForm operator+(const KForm& a, const KForm& b) {
    if (a.degree_ != b.degree_)
      throw std::invalid_argument("form sum: degree mismatch");
    if (a.has_table() && b.has_table()) {
      KForm w = a;
      for (size_t i = 0; i < w.table_.size(); ++i)
        w.table_[i] = w.table_[i] + b.table_[i];
      w.max_order_ = std::min(a.max_order_, b.max_order_);
      return w;
    }
    int ord = std::min(a.max_order_, b.max_order_);
    return evaluator(
        a.degree_, std::max(a.dim_, b.dim_),
        [a, b](const Eigen::VectorXd& p, const std::vector<Eigen::VectorXd>& vs,
               int o) { return a.evaluate_jet(p, vs, o) + b.evaluate_jet(p, vs, o); },
        ord);
  }

  friend KForm operator*(const ScalarField& s, const KForm& a) {
    if (a.has_table()) {
      KForm w = a;
      for (auto& c : w.table_) c = s * c;
      w.max_order_ = std::min(a.max_order_, s.max_order());
      return w;
    }
    return evaluator(
        a.degree_, a.dim_,
        [s, a](const Eigen::VectorXd& p, const std::vector<Eigen::VectorXd>& vs,
               int o) { return s.jet(p, o) * a.evaluate_jet(p, vs, o); },
        std::min(a.max_order_, s.max_order()));
  }

  friend KForm operator*(double c, const KForm& a) {
    return ScalarField::constant(c) * a;
  }

  static int upper_count(int dim) { return dim * (dim - 1) / 2; }

 private:
  size_t upper_index(int i, int j) const {
    return static_cast<size_t>(i * (2 * dim_ - i - 1) / 2 + (j - i - 1));
  }

  int degree_ = 0;
  int dim_ = 0;
  int max_order_ = 0;
  std::vector<ScalarField> table_;
  EvalFn eval_;

  friend KForm exterior_derivative(const KForm&);
};

// Exterior derivative; consumes one derivative order. Tabled forms of
// degree <= 1 stay tabled.
inline KForm exterior_derivative(const KForm& w) {
  if (w.max_order() < 1)
    throw std::logic_error("exterior derivative: no derivative order left");
  const int n = w.dim();
  if (w.has_table() && w.degree() == 0) {
    // df needs the ambient dimension; scalar forms are dimension-agnostic,
    // so this overload is provided by d_scalar below.
    throw std::logic_error("use d_scalar(field, dim) for 0-forms");
  }
  if (w.has_table() && w.degree() == 1) {
    std::vector<ScalarField> upper;
    upper.reserve(static_cast<size_t>(KForm::upper_count(n)));
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        upper.push_back(w.component(j).derivative(i) -
                        w.component(i).derivative(j));
    return KForm::two_form(n, std::move(upper));
  }
  // General alternating-sum form; vectors are constant, so the invariant
  // formula reduces to directional derivatives of the contractions.
  return KForm::evaluator(
      w.degree() + 1, n,
      [w](const Eigen::VectorXd& p, const std::vector<Eigen::VectorXd>& vs,
          int o) {
        Jet acc(static_cast<int>(p.size()), o);
        for (size_t j = 0; j < vs.size(); ++j) {
          std::vector<Eigen::VectorXd> rest;
          for (size_t i = 0; i < vs.size(); ++i)
            if (i != j) rest.push_back(vs[i]);
          Jet term = directional(w.evaluate_jet(p, rest, o + 1), vs[j]);
          acc = (j % 2 == 0) ? acc + term : acc - term;
        }
        return acc;
      },
      w.max_order() - 1);
}

inline KForm d_scalar(const ScalarField& f, int dim) {
  std::vector<ScalarField> comps;
  comps.reserve(static_cast<size_t>(dim));
  for (int i = 0; i < dim; ++i) comps.push_back(f.derivative(i));
  return KForm::one_form(std::move(comps));
}

namespace detail {

inline int shuffle_sign(const std::vector<int>& perm) {
  int inversions = 0;
  for (size_t i = 0; i < perm.size(); ++i)
    for (size_t j = i + 1; j < perm.size(); ++j)
      if (perm[i] > perm[j]) ++inversions;
  return inversions % 2 == 0 ? 1 : -1;
}

}  // namespace detail

// Wedge product with the determinant convention:
// (a ^ b)(v1..vk+l) = sum over (k,l)-shuffles of sgn * a(..) * b(..).
inline KForm wedge(const KForm& a, const KForm& b) {
  if (a.degree() == 0) return a.scalar_component() * b;
  if (b.degree() == 0) return b.scalar_component() * a;
  const int n = std::max(a.dim(), b.dim());
  if (a.degree() == 1 && b.degree() == 1 && a.has_table() && b.has_table()) {
    std::vector<ScalarField> upper;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        upper.push_back(a.component(i) * b.component(j) -
                        a.component(j) * b.component(i));
    return KForm::two_form(n, std::move(upper));
  }
  const int k = a.degree(), l = b.degree();
  return KForm::evaluator(
      k + l, n,
      [a, b, k, l](const Eigen::VectorXd& p,
                   const std::vector<Eigen::VectorXd>& vs, int o) {
        Jet acc(static_cast<int>(p.size()), o);
        std::vector<int> pick(static_cast<size_t>(k));
        // iterate over k-subsets of {0..k+l-1}
        for (int i = 0; i < k; ++i) pick[static_cast<size_t>(i)] = i;
        for (;;) {
          std::vector<int> perm(pick.begin(), pick.end());
          std::vector<Eigen::VectorXd> av, bv;
          std::vector<bool> used(static_cast<size_t>(k + l), false);
          for (int i : pick) {
            av.push_back(vs[static_cast<size_t>(i)]);
            used[static_cast<size_t>(i)] = true;
          }
          for (int i = 0; i < k + l; ++i)
            if (!used[static_cast<size_t>(i)]) {
              bv.push_back(vs[static_cast<size_t>(i)]);
              perm.push_back(i);
            }
          double sgn = detail::shuffle_sign(perm);
          acc = acc + sgn * (a.evaluate_jet(p, av, o) * b.evaluate_jet(p, bv, o));
          // next subset
          int i = k - 1;
          while (i >= 0 && pick[static_cast<size_t>(i)] == i + l) --i;
          if (i < 0) break;
          ++pick[static_cast<size_t>(i)];
          for (int j = i + 1; j < k; ++j)
            pick[static_cast<size_t>(j)] = pick[static_cast<size_t>(j - 1)] + 1;
        }
        return acc;
      },
      std::min(a.max_order(), b.max_order()));
}

// Interior product i_X w. Tabled forms contract symbolically; evaluators
// expand the first slot over the coordinate basis, which keeps full jet
// order because the form is multilinear at every point.
inline KForm interior_product(const VectorField& X, const KForm& w) {
  if (w.degree() == 0)
    throw std::invalid_argument("interior product with a 0-form");
  if (w.has_table() && w.degree() == 1) {
    ScalarField acc = X.component(0) * w.component(0);
    for (int i = 1; i < w.dim(); ++i)
      acc = acc + X.component(i) * w.component(i);
    return KForm::scalar(std::move(acc));
  }
  if (w.has_table() && w.degree() == 2) {
    std::vector<ScalarField> comps;
    for (int j = 0; j < w.dim(); ++j) {
      ScalarField acc = ScalarField::constant(0.0);
      for (int i = 0; i < w.dim(); ++i)
        if (i != j) acc = acc + X.component(i) * w.component2(i, j);
      comps.push_back(std::move(acc));
    }
    return KForm::one_form(std::move(comps));
  }
  const int n = w.dim();
  return KForm::evaluator(
      w.degree() - 1, n,
      [X, w, n](const Eigen::VectorXd& p,
                const std::vector<Eigen::VectorXd>& vs, int o) {
        auto xj = X.jets(p, o);
        Jet acc(static_cast<int>(p.size()), o);
        std::vector<Eigen::VectorXd> args;
        args.push_back(Eigen::VectorXd::Zero(n));
        for (const auto& v : vs) args.push_back(v);
        for (int i = 0; i < n; ++i) {
          args[0].setZero();
          args[0](i) = 1.0;
          acc = acc + xj[static_cast<size_t>(i)] * w.evaluate_jet(p, args, o);
        }
        return acc;
      },
      std::min(w.max_order(), X.max_order()));
}

// Pullback along a chart map given by component fields (ambient components
// as functions of the target chart's coordinates).
inline KForm pullback(const std::vector<ScalarField>& map, const KForm& w,
                      int target_dim) {
  const int m = static_cast<int>(map.size());
  auto dmap = [&](int a, int i) { return map[static_cast<size_t>(a)].derivative(i); };
  if (w.has_table() && w.degree() == 0)
    return KForm::scalar(w.scalar_component().compose(map));
  if (w.has_table() && w.degree() == 1) {
    std::vector<ScalarField> comps;
    for (int i = 0; i < target_dim; ++i) {
      ScalarField acc = ScalarField::constant(0.0);
      for (int a = 0; a < m; ++a)
        acc = acc + w.component(a).compose(map) * dmap(a, i);
      comps.push_back(std::move(acc));
    }
    return KForm::one_form(std::move(comps));
  }
  if (w.has_table() && w.degree() == 2) {
    std::vector<ScalarField> upper;
    for (int i = 0; i < target_dim; ++i) {
      for (int j = i + 1; j < target_dim; ++j) {
        ScalarField acc = ScalarField::constant(0.0);
        for (int a = 0; a < m; ++a)
          for (int b = a + 1; b < m; ++b)
            acc = acc + w.component2(a, b).compose(map) *
                            (dmap(a, i) * dmap(b, j) - dmap(a, j) * dmap(b, i));
        upper.push_back(std::move(acc));
      }
    }
    return KForm::two_form(target_dim, std::move(upper));
  }
  // Evaluator pullback is only used at value level.
  return KForm::evaluator(
      w.degree(), target_dim,
      [map, w, m](const Eigen::VectorXd& q,
                  const std::vector<Eigen::VectorXd>& vs, int) {
        Eigen::VectorXd image(m);
        Eigen::MatrixXd J(m, q.size());
        for (int a = 0; a < m; ++a) {
          Jet ja = map[static_cast<size_t>(a)].jet(q, 1);
          image(a) = ja.value();
          J.row(a) = ja.grad().transpose();
        }
        std::vector<Eigen::VectorXd> pushed;
        pushed.reserve(vs.size());
        for (const auto& v : vs) pushed.push_back(J * v);
        return Jet::constant(w.evaluate(image, pushed), static_cast<int>(q.size()), 0);
      },
      0);
}

inline std::vector<ScalarField> map_from_expressions(
    const std::vector<Expression>& comps) {
  return std::vector<ScalarField>(comps.begin(), comps.end());
}

// d^D on weight-w bundle-valued forms, written in a trivialization with
// connection form gamma: d beta + w gamma ^ beta.
inline KForm weighted_ext_derivative(const KForm& beta, const KForm& gamma,
                                     int w, int dim) {
  KForm d = beta.degree() == 0 ? d_scalar(beta.scalar_component(), dim)
                               : exterior_derivative(beta);
  if (w == 0) return d;
  return d + static_cast<double>(w) * wedge(gamma, beta);
}

// Lie derivative of a tabled 1-form: (L_X w)_i = X^j d_j w_i + w_j d_i X^j.
inline KForm lie_derivative_one_form(const VectorField& X, const KForm& w) {
  if (!w.has_table() || w.degree() != 1)
    throw std::invalid_argument("lie_derivative_one_form: tabled 1-form required");
  const int n = w.dim();
  std::vector<ScalarField> comps;
  for (int i = 0; i < n; ++i) {
    ScalarField acc = ScalarField::constant(0.0);
    for (int j = 0; j < n; ++j)
      acc = acc + X.component(j) * w.component(i).derivative(j) +
            w.component(j) * X.component(j).derivative(i);
    comps.push_back(std::move(acc));
  }
  return KForm::one_form(std::move(comps));
}

}  // namespace crweyl
