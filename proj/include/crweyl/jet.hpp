#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace crweyl {

// Thrown when an evaluation leaves the domain of a primitive (log of a
// non-positive value, division by zero, ...). The expression layer augments
// the message with the offending subexpression.
struct EvalError : std::runtime_error {
  explicit EvalError(const std::string& msg) : std::runtime_error(msg) {}
};

// Scalar jet: a value together with derivatives up to `order` (0..3) with
// respect to the chart coordinates. Third-order data is stored slice-wise,
// third(k) being the Hessian of the k-th first partial, so that
// third(k)(i,j) = d^3 f / dx_i dx_j dx_k.
class Jet {
 public:
  Jet() = default;

  Jet(int dim, int order) : dim_(dim), order_(order) {
    if (order_ >= 1) grad_ = Eigen::VectorXd::Zero(dim_);
    if (order_ >= 2) hess_ = Eigen::MatrixXd::Zero(dim_, dim_);
    if (order_ >= 3) third_.assign(dim_, Eigen::MatrixXd::Zero(dim_, dim_));
  }

  static Jet constant(double c, int dim, int order) {
    Jet j(dim, order);
    j.value_ = c;
    return j;
  }

  static Jet coordinate(double x, int index, int dim, int order) {
    Jet j(dim, order);
    j.value_ = x;
    if (order >= 1) j.grad_(index) = 1.0;
    return j;
  }

  int dim() const { return dim_; }
  int order() const { return order_; }
  double value() const { return value_; }
  double& value() { return value_; }
  const Eigen::VectorXd& grad() const { return grad_; }
  Eigen::VectorXd& grad() { return grad_; }
  const Eigen::MatrixXd& hess() const { return hess_; }
  Eigen::MatrixXd& hess() { return hess_; }
  const Eigen::MatrixXd& third(int k) const { return third_[k]; }
  Eigen::MatrixXd& third(int k) { return third_[k]; }

  // Jet of the i-th first partial; one derivative order is consumed.
  Jet derivative(int i) const {
    if (order_ < 1) throw std::logic_error("jet: derivative of an order-0 jet");
    Jet r(dim_, order_ - 1);
    r.value_ = grad_(i);
    if (r.order_ >= 1) r.grad_ = hess_.col(i);
    if (r.order_ >= 2) r.hess_ = third_[i];
    return r;
  }

  Jet operator-() const {
    Jet r = *this;
    r.value_ = -r.value_;
    if (order_ >= 1) r.grad_ = -r.grad_;
    if (order_ >= 2) r.hess_ = -r.hess_;
    if (order_ >= 3)
      for (auto& m : r.third_) m = -m;
    return r;
  }

  Jet operator+(const Jet& o) const {
    Jet r(dim_, std::min(order_, o.order_));
    r.value_ = value_ + o.value_;
    if (r.order_ >= 1) r.grad_ = grad_ + o.grad_;
    if (r.order_ >= 2) r.hess_ = hess_ + o.hess_;
    if (r.order_ >= 3)
      for (int k = 0; k < dim_; ++k) r.third_[k] = third_[k] + o.third_[k];
    return r;
  }

  Jet operator-(const Jet& o) const { return *this + (-o); }

  Jet operator*(const Jet& o) const {
    const Jet& a = *this;
    const Jet& b = o;
    Jet r(dim_, std::min(a.order_, b.order_));
    r.value_ = a.value_ * b.value_;
    if (r.order_ >= 1) r.grad_ = a.value_ * b.grad_ + b.value_ * a.grad_;
    if (r.order_ >= 2)
      r.hess_ = a.value_ * b.hess_ + b.value_ * a.hess_ +
                a.grad_ * b.grad_.transpose() + b.grad_ * a.grad_.transpose();
    if (r.order_ >= 3) {
      for (int k = 0; k < dim_; ++k) {
        r.third_[k] = b.value_ * a.third_[k] + a.value_ * b.third_[k] +
                      b.grad_(k) * a.hess_ + a.grad_(k) * b.hess_ +
                      a.hess_.col(k) * b.grad_.transpose() +
                      b.grad_ * a.hess_.col(k).transpose() +
                      a.grad_ * b.hess_.col(k).transpose() +
                      b.hess_.col(k) * a.grad_.transpose();
      }
    }
    return r;
  }

  Jet operator*(double c) const {
    Jet r = *this;
    r.value_ *= c;
    if (order_ >= 1) r.grad_ *= c;
    if (order_ >= 2) r.hess_ *= c;
    if (order_ >= 3)
      for (auto& m : r.third_) m *= c;
    return r;
  }

  Jet operator/(const Jet& o) const {
    if (o.value_ == 0.0) throw EvalError("division by zero");
    return *this * o.chain(1.0 / o.value_, -1.0 / (o.value_ * o.value_),
                           2.0 / (o.value_ * o.value_ * o.value_),
                           -6.0 / (o.value_ * o.value_ * o.value_ * o.value_));
  }

  // Composition with a scalar function given by its derivatives at value().
  Jet chain(double f0, double f1, double f2, double f3) const {
    Jet r(dim_, order_);
    r.value_ = f0;
    if (order_ >= 1) r.grad_ = f1 * grad_;
    if (order_ >= 2)
      r.hess_ = f1 * hess_ + f2 * (grad_ * grad_.transpose());
    if (order_ >= 3) {
      Eigen::MatrixXd gg = grad_ * grad_.transpose();
      for (int k = 0; k < dim_; ++k) {
        r.third_[k] = f1 * third_[k] + f3 * grad_(k) * gg +
                      f2 * (grad_(k) * hess_ +
                            hess_.col(k) * grad_.transpose() +
                            grad_ * hess_.col(k).transpose());
      }
    }
    return r;
  }

 private:
  int dim_ = 0;
  int order_ = 0;
  double value_ = 0.0;
  Eigen::VectorXd grad_;
  Eigen::MatrixXd hess_;
  std::vector<Eigen::MatrixXd> third_;
};

inline Jet operator*(double c, const Jet& j) { return j * c; }

inline Jet jet_sin(const Jet& x) {
  double s = std::sin(x.value()), c = std::cos(x.value());
  return x.chain(s, c, -s, -c);
}

inline Jet jet_cos(const Jet& x) {
  double s = std::sin(x.value()), c = std::cos(x.value());
  return x.chain(c, -s, -c, s);
}

inline Jet jet_tan(const Jet& x) {
  double t = std::tan(x.value());
  double u = 1.0 + t * t;
  return x.chain(t, u, 2.0 * t * u, 2.0 * u * (1.0 + 3.0 * t * t));
}

inline Jet jet_exp(const Jet& x) {
  double e = std::exp(x.value());
  return x.chain(e, e, e, e);
}

inline Jet jet_log(const Jet& x) {
  double v = x.value();
  if (v <= 0.0) throw EvalError("log of a non-positive value");
  return x.chain(std::log(v), 1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v));
}

inline Jet jet_sqrt(const Jet& x) {
  double v = x.value();
  if (v < 0.0) throw EvalError("sqrt of a negative value");
  if (v == 0.0) throw EvalError("sqrt derivative at zero");
  double s = std::sqrt(v);
  return x.chain(s, 0.5 / s, -0.25 / (s * v), 0.375 / (s * v * v));
}

inline Jet jet_abs(const Jet& x) {
  double sgn = x.value() > 0.0 ? 1.0 : (x.value() < 0.0 ? -1.0 : 0.0);
  return x.chain(std::abs(x.value()), sgn, 0.0, 0.0);
}

inline Jet jet_atan(const Jet& x) {
  double v = x.value();
  double d = 1.0 + v * v;
  return x.chain(std::atan(v), 1.0 / d, -2.0 * v / (d * d),
                 (6.0 * v * v - 2.0) / (d * d * d));
}

// atan2 via the single-variable atan branches: away from the coordinate
// half-axes the derivatives of atan2(y,x) coincide with those of atan(y/x)
// or -atan(x/y); only the value carries the branch constant.
inline Jet jet_atan2(const Jet& y, const Jet& x) {
  if (x.value() == 0.0 && y.value() == 0.0)
    throw EvalError("atan2 at the origin");
  Jet r = std::abs(x.value()) >= std::abs(y.value()) ? jet_atan(y / x)
                                                     : -jet_atan(x / y);
  r.value() = std::atan2(y.value(), x.value());
  return r;
}

inline Jet jet_pow_int(const Jet& x, long long n) {
  double v = x.value();
  if (v == 0.0 && n < 0) throw EvalError("negative power of zero");
  auto term = [&](long long k) -> double {
    double coef = 1.0;
    for (long long j = 0; j < k; ++j) coef *= static_cast<double>(n - j);
    if (coef == 0.0) return 0.0;
    if (v == 0.0 && n - k < 0) throw EvalError("negative power of zero");
    return coef * std::pow(v, static_cast<double>(n - k));
  };
  return x.chain(term(0), term(1), term(2), term(3));
}

inline Jet jet_pow_real(const Jet& x, double a) {
  double v = x.value();
  if (v <= 0.0)
    throw EvalError("real power of a non-positive base");
  auto term = [&](int k) {
    double coef = 1.0;
    for (int j = 0; j < k; ++j) coef *= (a - j);
    return coef * std::pow(v, a - k);
  };
  return x.chain(term(0), term(1), term(2), term(3));
}

}  // namespace crweyl
