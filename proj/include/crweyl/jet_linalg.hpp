#pragma once

#include "crweyl/jet.hpp"

namespace crweyl {

using JetVector = std::vector<Jet>;
using JetMatrix = std::vector<std::vector<Jet>>;

// Gaussian elimination with partial pivoting on jet entries (pivot choice by
// value magnitude). Differentiating the elimination is exact because the
// pivot pattern is locally constant.
inline JetVector jet_solve(JetMatrix a, JetVector b) {
  const int n = static_cast<int>(b.size());
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a[r][col].value()) > std::abs(a[piv][col].value())) piv = r;
    if (std::abs(a[piv][col].value()) < 1e-13)
      throw std::runtime_error("jet_solve: singular system");
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    for (int r = col + 1; r < n; ++r) {
      Jet factor = a[r][col] / a[col][col];
      for (int c = col; c < n; ++c) a[r][c] = a[r][c] - factor * a[col][c];
      b[r] = b[r] - factor * b[col];
    }
  }
  JetVector x(b);
  for (int row = n - 1; row >= 0; --row) {
    Jet acc = b[row];
    for (int c = row + 1; c < n; ++c) acc = acc - a[row][c] * x[c];
    x[row] = acc / a[row][row];
  }
  return x;
}

// Least squares via normal equations; fine for the small well-conditioned
// systems that arise from frame decompositions.
inline JetVector jet_lsq(const JetMatrix& a, const JetVector& b) {
  const int rows = static_cast<int>(a.size());
  const int cols = static_cast<int>(a[0].size());
  const int dim = b[0].dim();
  const int order = b[0].order();
  JetMatrix ata(static_cast<size_t>(cols),
                JetVector(static_cast<size_t>(cols), Jet::constant(0, dim, order)));
  JetVector atb(static_cast<size_t>(cols), Jet::constant(0, dim, order));
  for (int i = 0; i < cols; ++i) {
    for (int j = 0; j < cols; ++j)
      for (int r = 0; r < rows; ++r) ata[i][j] = ata[i][j] + a[r][i] * a[r][j];
    for (int r = 0; r < rows; ++r) atb[i] = atb[i] + a[r][i] * b[r];
  }
  return jet_solve(std::move(ata), std::move(atb));
}

}  // namespace crweyl
