#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "democ/democratic.hpp"
#include "democ/rng.hpp"

namespace democ::harness {

/// N x N orthonormal DCT-II matrix; row k is the k-th cosine atom.
inline Matrix dct2_matrix(Eigen::Index n) {
  if (n < 1) throw std::invalid_argument("dct2_matrix: n must be >= 1");
  Matrix c(n, n);
  const double nd = static_cast<double>(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double s = k == 0 ? std::sqrt(1.0 / nd) : std::sqrt(2.0 / nd);
    for (Eigen::Index j = 0; j < n; ++j)
      c(k, j) = s * std::cos(std::numbers::pi * (static_cast<double>(j) + 0.5) *
                             static_cast<double>(k) / nd);
  }
  return c;
}

/// M rows of the orthonormal DCT-II picked uniformly without replacement
/// (kept in increasing order), so H H^T = I_M.
inline Matrix build_dct_frame(Eigen::Index m, Eigen::Index n, RngStream& rng) {
  if (m < 1 || m > n) throw std::invalid_argument("build_dct_frame: need 1 <= M <= N");
  std::vector<Eigen::Index> rows(static_cast<std::size_t>(n));
  std::iota(rows.begin(), rows.end(), Eigen::Index{0});
  // partial Fisher-Yates
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto j = i + static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(n - i)));
    std::swap(rows[static_cast<std::size_t>(i)], rows[static_cast<std::size_t>(j)]);
  }
  std::sort(rows.begin(), rows.begin() + m);
  const Matrix c = dct2_matrix(n);
  Matrix h(m, n);
  for (Eigen::Index i = 0; i < m; ++i) h.row(i) = c.row(rows[static_cast<std::size_t>(i)]);
  return h;
}

}  // namespace democ::harness
