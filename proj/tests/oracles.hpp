#pragma once

// Independent numerical references for the tests: adaptive Gauss-Kronrod
// quadrature split at kinks, and fine-grid total variation.

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "democ/coder.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace oracle {

/// Integral over consecutive breakpoints (infinite ends allowed).
inline double integrate(const std::function<double(double)>& f, std::vector<double> pts,
                        double tol = 1e-13) {
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, pts[i], pts[i + 1], 15, tol);
  }
  return total;
}

inline double integrate(const std::function<double(double)>& f, double lo, double hi,
                        std::vector<double> kinks = {}, double tol = 1e-13) {
  std::vector<double> pts{lo, hi};
  for (double k : kinks)
    if (k > lo && k < hi) pts.push_back(k);
  return integrate(f, pts, tol);
}

/// TV distance between a normalized density p and the law proportional to
/// exp(log_q), both evaluated on a midpoint grid over [lo, hi]. The p mass
/// falling outside the grid counts fully toward the distance.
inline double grid_tv(const std::function<double(double)>& p,
                      const std::function<double(double)>& log_q, double lo, double hi,
                      std::size_t n = 200000) {
  const double dx = (hi - lo) / static_cast<double>(n);
  std::vector<double> lq(n);
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    lq[i] = log_q(lo + (static_cast<double>(i) + 0.5) * dx);
    top = std::max(top, lq[i]);
  }
  double zq = 0.0;
  for (auto& v : lq) {
    v = std::exp(v - top);
    zq += v * dx;
  }
  double tv = 0.0;
  double p_mass = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double pi = p(lo + (static_cast<double>(i) + 0.5) * dx);
    p_mass += pi * dx;
    tv += std::abs(pi - lq[i] / zq) * dx;
  }
  return 0.5 * tv + 0.5 * std::max(0.0, 1.0 - p_mass);
}

// Integral of f over R^d for f even in every coordinate and depending on the
// coordinates through their running max (kinks there): 2^d times the orthant.
inline double integrate_symmetric(const std::function<double(const democ::Vector&)>& f, int d, double r,
                                  double start_max = 0.0) {
  democ::Vector x(d);
  std::function<double(int, double)> level = [&](int k, double running_max) -> double {
    if (k == d) return f(x);
    return integrate(
        [&, k, running_max](double v) {
          x[k] = v;
          return level(k + 1, std::max(running_max, v));
        },
        0.0, r, {running_max}, 1e-11);
  };
  return std::ldexp(level(0, start_max), d);
}

// TV between the coefficient conditional mixture of x_n and the normalized
// slice of the joint posterior.
inline double conditional_tv(const democ::CodingProblem& pb, const democ::Vector& x, Eigen::Index n,
                             double sigma2, double mu) {
  const auto mix = democ::coef_conditional_mixture(n, x, sigma2, mu, pb);
  const double h_sq = pb.col_sq_norms()[n];
  const double s = std::sqrt(sigma2 / h_sq);
  const double lam = static_cast<double>(pb.n()) * mu;
  const double hte = pb.h().col(n).dot(pb.residual(x)) + x[n] * h_sq;
  const double mu2 = hte / h_sq;
  double m = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (i != n) m = std::max(m, std::abs(x[i]));
  const double r = std::abs(mu2) + s * s * lam + m + 15.0 * s;
  democ::Vector work = x;
  return grid_tv([&](double v) { return mix.pdf(v); },
                 [&](double v) {
                   work[n] = v;
                   return democ::log_joint_posterior(work, sigma2, mu, pb);
                 },
                 -r, r, 400000);
}

}  // namespace oracle
