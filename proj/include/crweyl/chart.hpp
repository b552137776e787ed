#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "crweyl/expression.hpp"

namespace crweyl {

// Deterministic uniform sampling. The mt19937_64 stream is standardized and
// the 53-bit mapping below is fixed, so identical seeds reproduce identical
// draws on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::uint64_t next() { return gen_(); }

  int index(int n) { return static_cast<int>(gen_() % static_cast<std::uint64_t>(n)); }

  Eigen::VectorXd vector(int dim, double lo = -1.0, double hi = 1.0) {
    Eigen::VectorXd v(dim);
    for (int i = 0; i < dim; ++i) v(i) = uniform(lo, hi);
    return v;
  }

 private:
  std::mt19937_64 gen_;
};

// Derives independent sub-seeds so different suites never share a stream.
inline std::uint64_t mix_seed(std::uint64_t seed, std::string_view tag) {
  std::uint64_t h = seed ^ 0x9e3779b97f4a7c15ull;
  for (char c : tag) {
    h ^= static_cast<std::uint64_t>(static_cast<unsigned char>(c));
    h *= 0xff51afd7ed558ccdull;
    h ^= h >> 33;
  }
  return h;
}

// A coordinate chart: named coordinates, a sampling box and exclusion
// predicates (each pair (e, c) requires e(p) >= c).
struct Chart {
  std::vector<std::string> coords;
  Eigen::VectorXd box_lo, box_hi;
  std::vector<std::pair<Expression, double>> exclusions;

  int dim() const { return static_cast<int>(coords.size()); }

  Expression parse_expr(std::string_view src) const {
    return crweyl::parse(src, coords);
  }

  bool contains(const Eigen::VectorXd& p) const {
    for (int i = 0; i < dim(); ++i)
      if (p(i) < box_lo(i) || p(i) > box_hi(i)) return false;
    for (const auto& [e, c] : exclusions)
      if (e.evaluate(p) < c) return false;
    return true;
  }

  Eigen::VectorXd sample(Rng& rng) const {
    for (int attempt = 0; attempt < 100000; ++attempt) {
      Eigen::VectorXd p(dim());
      for (int i = 0; i < dim(); ++i) p(i) = rng.uniform(box_lo(i), box_hi(i));
      bool ok = true;
      for (const auto& [e, c] : exclusions)
        if (e.evaluate(p) < c) {
          ok = false;
          break;
        }
      if (ok) return p;
    }
    throw std::runtime_error("chart sampling: exclusions reject everything");
  }
};

inline Chart make_chart(std::vector<std::string> coords,
                        std::vector<std::pair<double, double>> box) {
  Chart c;
  c.coords = std::move(coords);
  c.box_lo.resize(static_cast<int>(box.size()));
  c.box_hi.resize(static_cast<int>(box.size()));
  for (size_t i = 0; i < box.size(); ++i) {
    c.box_lo(static_cast<int>(i)) = box[i].first;
    c.box_hi(static_cast<int>(i)) = box[i].second;
  }
  if (c.box_lo.size() != c.dim())
    throw std::invalid_argument("chart: box size != coordinate count");
  return c;
}

}  // namespace crweyl
