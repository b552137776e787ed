#pragma once

#include <functional>
#include <memory>
#include <mutex>

#include "crweyl/chart.hpp"

namespace crweyl {

// Directional derivative of a jet along a constant vector; consumes one
// derivative order.
inline Jet directional(const Jet& j, const Eigen::VectorXd& u) {
  if (j.order() < 1)
    throw std::logic_error("directional derivative of an order-0 jet");
  Jet r(j.dim(), j.order() - 1);
  r.value() = j.grad().dot(u);
  if (r.order() >= 1) r.grad() = j.hess() * u;
  if (r.order() >= 2) {
    r.hess().setZero();
    for (int i = 0; i < j.dim(); ++i) r.hess() += u(i) * j.third(i);
  }
  return r;
}

// Jet of q |-> g(F(q)) from the jet of g at F(q) and the jets of the map
// components at q. The result order is limited by both inputs.
inline Jet compose_jet(const Jet& g, const std::vector<Jet>& f) {
  const int m = g.dim();
  if (static_cast<int>(f.size()) != m)
    throw std::invalid_argument("compose_jet: map dimension mismatch");
  const int n = f.empty() ? 0 : f[0].dim();
  int order = g.order();
  for (const Jet& fa : f) order = std::min(order, fa.order());
  Jet h(n, order);
  h.value() = g.value();
  if (order < 1) return h;
  Eigen::MatrixXd J(n, m);  // J.col(a) = grad of component a
  for (int a = 0; a < m; ++a) J.col(a) = f[a].grad();
  h.grad() = J * g.grad();
  if (order < 2) return h;
  h.hess() = J * g.hess() * J.transpose();
  for (int a = 0; a < m; ++a) h.hess() += g.grad()(a) * f[a].hess();
  if (order < 3) return h;
  for (int k = 0; k < n; ++k) {
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(n, n);
    for (int c = 0; c < m; ++c)
      T += f[c].grad()(k) * (J * g.third(c) * J.transpose());
    for (int a = 0; a < m; ++a) {
      for (int b = 0; b < m; ++b) {
        double w = g.hess()(a, b);
        if (w == 0.0) continue;
        T += w * (f[a].hess() * f[b].grad()(k) +
                  f[a].hess().col(k) * f[b].grad().transpose() +
                  f[b].grad() * f[a].hess().col(k).transpose());
      }
      T += g.grad()(a) * f[a].third(k);
    }
    h.third(k) = T;
  }
  return h;
}

// A scalar function of a chart point, evaluable as a jet up to max_order.
// Holds either an expression (full order 3) or a numeric closure whose
// available order is declared by the producer. Arithmetic stays symbolic
// whenever both operands are expressions.
class ScalarField {
 public:
  using Fn = std::function<Jet(const Eigen::VectorXd&, int)>;

  ScalarField() : ScalarField(Expression::number(0.0)) {}

  ScalarField(Expression e)  // NOLINT: implicit by design
      : expr_(std::move(e)), max_order_(3) {}

  ScalarField(Fn fn, int max_order)
      : fn_(std::move(fn)), max_order_(max_order) {}

  static ScalarField constant(double c) {
    return ScalarField(Expression::number(c));
  }

  int max_order() const { return max_order_; }
  bool symbolic() const { return fn_ == nullptr; }
  const Expression& expression() const {
    if (!symbolic()) throw std::logic_error("scalar field is not symbolic");
    return expr_;
  }

  Jet jet(const Eigen::VectorXd& p, int order) const {
    if (order > max_order_)
      throw std::logic_error("scalar field: requested jet order " +
                             std::to_string(order) + " exceeds available " +
                             std::to_string(max_order_));
    return symbolic() ? expr_.evaluate_jet(p, order) : fn_(p, order);
  }

  double value(const Eigen::VectorXd& p) const { return jet(p, 0).value(); }

  friend ScalarField operator+(const ScalarField& a, const ScalarField& b) {
    if (a.symbolic() && b.symbolic())
      return ScalarField(a.expr_ + b.expr_);
    return combine(a, b, [](const Jet& x, const Jet& y) { return x + y; });
  }
  friend ScalarField operator-(const ScalarField& a, const ScalarField& b) {
    if (a.symbolic() && b.symbolic())
      return ScalarField(a.expr_ - b.expr_);
    return combine(a, b, [](const Jet& x, const Jet& y) { return x - y; });
  }
  friend ScalarField operator*(const ScalarField& a, const ScalarField& b) {
    if (a.symbolic() && b.symbolic())
      return ScalarField(a.expr_ * b.expr_);
    return combine(a, b, [](const Jet& x, const Jet& y) { return x * y; });
  }
  friend ScalarField operator*(double c, const ScalarField& a) {
    return ScalarField::constant(c) * a;
  }
  friend ScalarField operator-(const ScalarField& a) {
    if (a.symbolic()) return ScalarField(-a.expr_);
    return ScalarField([a](const Eigen::VectorXd& p, int o) { return -a.jet(p, o); },
                       a.max_order());
  }

  // The i-th partial as a field; one order is consumed.
  ScalarField derivative(int i) const {
    ScalarField self = *this;
    return ScalarField(
        [self, i](const Eigen::VectorXd& p, int o) {
          return self.jet(p, o + 1).derivative(i);
        },
        max_order_ - 1);
  }

  // Composition with a chart map given by per-component fields.
  ScalarField compose(const std::vector<ScalarField>& map) const {
    if (symbolic()) {
      bool all_symbolic = true;
      for (const auto& m : map) all_symbolic &= m.symbolic();
      if (all_symbolic) {
        std::vector<Expression> repl;
        repl.reserve(map.size());
        for (const auto& m : map) repl.push_back(m.expression());
        return ScalarField(expr_.substitute(repl));
      }
    }
    ScalarField self = *this;
    int ord = max_order_;
    for (const auto& m : map) ord = std::min(ord, m.max_order());
    return ScalarField(
        [self, map](const Eigen::VectorXd& q, int o) {
          std::vector<Jet> mj;
          mj.reserve(map.size());
          Eigen::VectorXd image(static_cast<int>(map.size()));
          for (size_t a = 0; a < map.size(); ++a) {
            mj.push_back(map[a].jet(q, o));
            image(static_cast<int>(a)) = mj.back().value();
          }
          return compose_jet(self.jet(image, o), mj);
        },
        ord);
  }

 private:
  template <typename F>
  static ScalarField combine(const ScalarField& a, const ScalarField& b, F f) {
    return ScalarField(
        [a, b, f](const Eigen::VectorXd& p, int o) {
          return f(a.jet(p, o), b.jet(p, o));
        },
        std::min(a.max_order(), b.max_order()));
  }

  Expression expr_;
  Fn fn_;
  int max_order_;
};

}  // namespace crweyl
