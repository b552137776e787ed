#pragma once

#include "crweyl/scalar_field.hpp"

namespace crweyl {

namespace detail {

// Memoizes the last joint evaluation so per-component access through
// ScalarField does not repeat shared work (e.g. a Reeb linear solve).
template <typename Value>
class JointCache {
 public:
  using Fn = std::function<Value(const Eigen::VectorXd&, int)>;

  explicit JointCache(Fn fn) : fn_(std::move(fn)) {}

  Value get(const Eigen::VectorXd& p, int order) {
    std::lock_guard<std::mutex> lock(mu_);
    if (!valid_ || order_ != order || p_.size() != p.size() || p_ != p) {
      value_ = fn_(p, order);
      p_ = p;
      order_ = order;
      valid_ = true;
    }
    return value_;
  }

 private:
  Fn fn_;
  std::mutex mu_;
  bool valid_ = false;
  Eigen::VectorXd p_;
  int order_ = 0;
  Value value_;
};

}  // namespace detail

// Vector field on a chart, one scalar component per coordinate.
class VectorField {
 public:
  using JointFn = std::function<std::vector<Jet>(const Eigen::VectorXd&, int)>;

  VectorField() = default;

  explicit VectorField(std::vector<ScalarField> comps)
      : comps_(std::move(comps)) {}

  static VectorField from_expressions(std::vector<Expression> comps) {
    std::vector<ScalarField> fields;
    fields.reserve(comps.size());
    for (auto& e : comps) fields.emplace_back(std::move(e));
    return VectorField(std::move(fields));
  }

  static VectorField constant(const Eigen::VectorXd& v) {
    std::vector<ScalarField> fields;
    for (int i = 0; i < v.size(); ++i)
      fields.push_back(ScalarField::constant(v(i)));
    return VectorField(std::move(fields));
  }

  // Components share a single joint evaluation via a memo cache.
  static VectorField joint(int dim, JointFn fn, int max_order) {
    auto cache =
        std::make_shared<detail::JointCache<std::vector<Jet>>>(std::move(fn));
    std::vector<ScalarField> fields;
    fields.reserve(dim);
    for (int i = 0; i < dim; ++i) {
      fields.emplace_back(
          [cache, i](const Eigen::VectorXd& p, int o) {
            return cache->get(p, o)[static_cast<size_t>(i)];
          },
          max_order);
    }
    return VectorField(std::move(fields));
  }

  int dim() const { return static_cast<int>(comps_.size()); }

  int max_order() const {
    int o = 3;
    for (const auto& c : comps_) o = std::min(o, c.max_order());
    return o;
  }

  const ScalarField& component(int i) const {
    return comps_[static_cast<size_t>(i)];
  }

  std::vector<Jet> jets(const Eigen::VectorXd& p, int order) const {
    std::vector<Jet> out;
    out.reserve(comps_.size());
    for (const auto& c : comps_) out.push_back(c.jet(p, order));
    return out;
  }

  Eigen::VectorXd value(const Eigen::VectorXd& p) const {
    Eigen::VectorXd v(dim());
    for (int i = 0; i < dim(); ++i) v(i) = comps_[i].value(p);
    return v;
  }

  friend VectorField operator+(const VectorField& a, const VectorField& b) {
    std::vector<ScalarField> c;
    for (int i = 0; i < a.dim(); ++i) c.push_back(a.comps_[i] + b.comps_[i]);
    return VectorField(std::move(c));
  }
  friend VectorField operator-(const VectorField& a, const VectorField& b) {
    std::vector<ScalarField> c;
    for (int i = 0; i < a.dim(); ++i) c.push_back(a.comps_[i] - b.comps_[i]);
    return VectorField(std::move(c));
  }
  friend VectorField operator*(const ScalarField& s, const VectorField& a) {
    std::vector<ScalarField> c;
    for (int i = 0; i < a.dim(); ++i) c.push_back(s * a.comps_[i]);
    return VectorField(std::move(c));
  }

 private:
  std::vector<ScalarField> comps_;
};

// [X,Y]^i = X^j d_j Y^i - Y^j d_j X^i, one derivative order consumed.
inline VectorField lie_bracket(const VectorField& X, const VectorField& Y) {
  if (X.dim() != Y.dim())
    throw std::invalid_argument("lie_bracket: dimension mismatch");
  const int n = X.dim();
  int max_order = std::min(X.max_order(), Y.max_order()) - 1;
  return VectorField::joint(
      n,
      [X, Y, n](const Eigen::VectorXd& p, int o) {
        auto xs = X.jets(p, o + 1);
        auto ys = Y.jets(p, o + 1);
        std::vector<Jet> out;
        out.reserve(n);
        for (int i = 0; i < n; ++i) {
          Jet acc(static_cast<int>(p.size()), o);
          for (int j = 0; j < n; ++j)
            acc = acc + xs[j] * ys[i].derivative(j) -
                  ys[j] * xs[i].derivative(j);
          out.push_back(acc);
        }
        return out;
      },
      max_order);
}

inline Eigen::VectorXd lie_bracket_at(const VectorField& X,
                                      const VectorField& Y,
                                      const Eigen::VectorXd& p) {
  return lie_bracket(X, Y).value(p);
}

// Endomorphism field acting on tangent vectors; row-major entries.
class EndomorphismField {
 public:
  EndomorphismField() = default;

  EndomorphismField(int dim, std::vector<ScalarField> entries)
      : dim_(dim), entries_(std::move(entries)) {
    if (static_cast<int>(entries_.size()) != dim_ * dim_)
      throw std::invalid_argument("endomorphism: entry count != dim^2");
  }

  static EndomorphismField from_expressions(
      int dim, const std::vector<Expression>& entries) {
    std::vector<ScalarField> f(entries.begin(), entries.end());
    return EndomorphismField(dim, std::move(f));
  }

  static EndomorphismField constant(const Eigen::MatrixXd& m) {
    std::vector<ScalarField> f;
    for (int i = 0; i < m.rows(); ++i)
      for (int j = 0; j < m.cols(); ++j)
        f.push_back(ScalarField::constant(m(i, j)));
    return EndomorphismField(static_cast<int>(m.rows()), std::move(f));
  }

  // Entries share one jointly computed matrix of jets.
  using JointFn =
      std::function<std::vector<std::vector<Jet>>(const Eigen::VectorXd&, int)>;
  static EndomorphismField joint(int dim, JointFn fn, int max_order) {
    auto cache = std::make_shared<
        detail::JointCache<std::vector<std::vector<Jet>>>>(std::move(fn));
    std::vector<ScalarField> f;
    f.reserve(dim * dim);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j)
        f.emplace_back(
            [cache, i, j](const Eigen::VectorXd& p, int o) {
              return cache->get(p, o)[static_cast<size_t>(i)]
                                     [static_cast<size_t>(j)];
            },
            max_order);
    return EndomorphismField(dim, std::move(f));
  }

  int dim() const { return dim_; }

  int max_order() const {
    int o = 3;
    for (const auto& e : entries_) o = std::min(o, e.max_order());
    return o;
  }

  const ScalarField& entry(int i, int j) const {
    return entries_[static_cast<size_t>(i * dim_ + j)];
  }

  Eigen::MatrixXd value(const Eigen::VectorXd& p) const {
    Eigen::MatrixXd m(dim_, dim_);
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j) m(i, j) = entry(i, j).value(p);
    return m;
  }

  VectorField apply(const VectorField& X) const {
    std::vector<ScalarField> comps;
    comps.reserve(dim_);
    for (int i = 0; i < dim_; ++i) {
      ScalarField acc = entry(i, 0) * X.component(0);
      for (int j = 1; j < dim_; ++j)
        acc = acc + entry(i, j) * X.component(j);
      comps.push_back(std::move(acc));
    }
    return VectorField(std::move(comps));
  }

 private:
  int dim_ = 0;
  std::vector<ScalarField> entries_;
};

}  // namespace crweyl
