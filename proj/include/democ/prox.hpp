#pragma once

// Proximity operator of w * ||.||_inf:
//   prox(x) = argmin_u  w ||u||_inf + ||x - u||^2 / 2.
// Coordinates whose magnitude reaches the threshold phi are clipped to +-phi,
// the others pass through unchanged.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "democ/democratic.hpp"
#include "democ/problem.hpp"

namespace democ {

struct ProxThreshold {
  double phi = 0.0;
  /// Candidate thresholds, one per distinct magnitude.
  std::vector<double> levels;
  /// Distinct magnitudes in decreasing order.
  std::vector<double> magnitudes;
  std::vector<std::size_t> multiplicities;
};

/// Threshold for weight `w` (w = lambda * delta for the prox of lambda ||.||_inf
/// with step delta). Magnitudes are scanned from the largest down; the j-th level
/// is (sum_{k<=j} d_k eps_k - w) / sum_{k<=j} d_k.
inline ProxThreshold prox_linf_threshold(VectorCRef x, double w) {
  std::vector<double> mags(static_cast<std::size_t>(x.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i) mags[static_cast<std::size_t>(i)] = std::abs(x[i]);
  std::sort(mags.begin(), mags.end(), std::greater<>());

  ProxThreshold out;
  out.magnitudes.reserve(mags.size());
  out.multiplicities.reserve(mags.size());
  for (double v : mags) {
    if (!out.magnitudes.empty() && out.magnitudes.back() == v) {
      ++out.multiplicities.back();
    } else {
      out.magnitudes.push_back(v);
      out.multiplicities.push_back(1);
    }
  }
  out.levels.reserve(out.magnitudes.size());
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t j = 0; j < out.magnitudes.size(); ++j) {
    count += out.multiplicities[j];
    sum += static_cast<double>(out.multiplicities[j]) * out.magnitudes[j];
    const double level = (sum - w) / static_cast<double>(count);
    out.levels.push_back(level);
    out.phi = std::max(out.phi, level);
  }
  return out;
}

inline Vector prox_linf(VectorCRef x, double w) {
  if (!(w > 0.0)) throw std::invalid_argument("prox_linf: weight must be > 0");
  const double phi = prox_linf_threshold(x, w).phi;
  Vector rho = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (std::abs(x[i]) >= phi) rho[i] = std::copysign(phi, x[i]);
  }
  return rho;
}

/// Euclidean projection onto the unit l1 ball (sort-based, exact).
inline Vector project_l1_ball(VectorCRef v, double radius = 1.0) {
  if (v.cwiseAbs().sum() <= radius) return v;
  std::vector<double> u(static_cast<std::size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) u[static_cast<std::size_t>(i)] = std::abs(v[i]);
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumsum = 0.0;
  double theta = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    cumsum += u[k];
    const double t = (cumsum - radius) / static_cast<double>(k + 1);
    if (u[k] - t > 0.0) theta = t;
  }
  Vector out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i)
    out[i] = std::copysign(std::max(std::abs(v[i]) - theta, 0.0), v[i]);
  return out;
}

/// Moreau-decomposition route: x - w * P_{B1}(x / w). Independent of prox_linf.
inline Vector prox_linf_oracle(VectorCRef x, double w) {
  if (!(w > 0.0)) throw std::invalid_argument("prox_linf_oracle: weight must be > 0");
  return x - w * project_l1_ball(x / w);
}

/// Gradient step on ||y - Hx||^2 / (2 sigma2) followed by the l_inf prox with
/// weight lambda * delta / 2; the first-order surrogate of the posterior prox.
inline Vector gradient_step_prox(VectorCRef x, const CodingProblem& problem, double sigma2,
                                 double lambda, double delta) {
  check_dim(x, static_cast<std::size_t>(problem.n()), "gradient_step_prox");
  if (!(sigma2 > 0.0) || !(delta > 0.0))
    throw std::invalid_argument("gradient_step_prox: sigma2 and delta must be > 0");
  const Vector grad = problem.h().transpose() * (problem.h() * x - problem.y());
  const Vector z = x - (delta / sigma2) * grad;
  if (lambda <= 0.0) return z;
  return prox_linf(z, 0.5 * lambda * delta);
}

}  // namespace democ
