#pragma once

// Point estimates from posterior chains, plus the deterministic baselines:
// an l_inf-penalized least-squares solver (monotone FISTA), least squares and
// the Gaussian-prior (ridge) posterior mean.

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "democ/coder.hpp"
#include "democ/prox.hpp"

namespace democ {

enum class EstimatorKind { MMSE, mMAP, FITRA, LS, RidgeMMSE, RidgeMAP };

inline std::string to_string(EstimatorKind k) {
  switch (k) {
    case EstimatorKind::MMSE: return "MMSE";
    case EstimatorKind::mMAP: return "mMAP";
    case EstimatorKind::FITRA: return "FITRA";
    case EstimatorKind::LS: return "LS";
    case EstimatorKind::RidgeMMSE: return "RidgeMMSE";
    case EstimatorKind::RidgeMAP: return "RidgeMAP";
  }
  return "?";
}

struct EstimatorResult {
  Vector x_hat;
  EstimatorKind kind = EstimatorKind::MMSE;
  /// log marginal posterior of x_hat (mMAP only).
  double score = std::numeric_limits<double>::quiet_NaN();
  /// Sample index of the mMAP pick, or iterations used by FITRA.
  std::size_t index = 0;
};

/// Mean of the post-burn-in x samples.
inline EstimatorResult mmse_estimate(const PosteriorChain& chain) {
  if (chain.burn_in >= chain.x_samples.size())
    throw std::invalid_argument("mmse_estimate: no samples after burn-in");
  Vector acc = Vector::Zero(chain.x_samples.front().size());
  for (std::size_t t = chain.burn_in; t < chain.x_samples.size(); ++t) acc += chain.x_samples[t];
  acc /= static_cast<double>(chain.x_samples.size() - chain.burn_in);
  return {std::move(acc), EstimatorKind::MMSE};
}

struct NuisanceMeans {
  double sigma2;
  double mu;
  double lambda;
};

/// Post-burn-in means of sigma2, mu and lambda = N mu.
inline NuisanceMeans nuisance_mmse(const PosteriorChain& chain) {
  if (chain.burn_in >= chain.sigma2_samples.size())
    throw std::invalid_argument("nuisance_mmse: no samples after burn-in");
  double s = 0.0;
  double m = 0.0;
  for (std::size_t t = chain.burn_in; t < chain.sigma2_samples.size(); ++t) {
    s += chain.sigma2_samples[t];
    m += chain.mu_samples[t];
  }
  const double k = static_cast<double>(chain.sigma2_samples.size() - chain.burn_in);
  const double n = static_cast<double>(chain.x_samples.front().size());
  return {s / k, m / k, n * m / k};
}

/// Sample (over the whole chain, burn-in included) with the largest marginal
/// posterior; the earliest one wins ties.
inline EstimatorResult mmap_estimate(const PosteriorChain& chain, const CodingProblem& pb,
                                     ResidualExponent exponent = ResidualExponent::Exact) {
  if (chain.x_samples.empty()) throw std::invalid_argument("mmap_estimate: empty chain");
  std::size_t best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  bool all_degenerate = true;
  for (std::size_t t = 0; t < chain.x_samples.size(); ++t) {
    const double s = log_marginal_posterior(chain.x_samples[t], pb, exponent);
    if (s != kPosInf) all_degenerate = false;
    if (s > best_score) {
      best_score = s;
      best = t;
    }
  }
  if (all_degenerate) throw std::domain_error("mmap_estimate: every sample has zero residual");
  return {chain.x_samples[best], EstimatorKind::mMAP, best_score, best};
}

struct FitraOptions {
  std::size_t max_iters = 500;
  double tol = 1e-9;
  std::optional<Vector> warm_start;
  /// Lipschitz constant ||H||_2^2; estimated by power iteration when absent.
  std::optional<double> lipschitz;
};

/// 0.5 ||y - Hx||^2 + (beta / 2) ||x||_inf.
inline double fitra_objective(VectorCRef x, const CodingProblem& pb, double beta) {
  return 0.5 * pb.residual(x).squaredNorm() + 0.5 * beta * linf_norm(x);
}

/// Monotone FISTA on 0.5 ||y - Hx||^2 + (beta / 2) ||x||_inf; beta = 2 lambda sigma2
/// matches the MAP problem of the Bayesian model.
inline EstimatorResult fitra(const CodingProblem& pb, double beta, const FitraOptions& opt = {}) {
  if (beta < 0.0) throw std::invalid_argument("fitra: beta must be >= 0");
  if (opt.max_iters < 1) throw std::invalid_argument("fitra: max_iters must be >= 1");
  const Matrix& h = pb.h();
  const double lip = opt.lipschitz ? *opt.lipschitz : spectral_norm_sq(h);
  const double step = 1.0 / lip;
  const double w = 0.5 * beta * step;

  Vector x = opt.warm_start ? *opt.warm_start : Vector::Zero(pb.n());
  check_dim(x, static_cast<std::size_t>(pb.n()), "fitra warm start");
  Vector x_prev = x;
  Vector v = x;
  double t = 1.0;
  double f_cur = fitra_objective(x, pb, beta);
  std::size_t it = 0;
  for (; it < opt.max_iters; ++it) {
    const Vector grad = h.transpose() * (h * v - pb.y());
    Vector z = v - step * grad;
    if (w > 0.0) z = prox_linf(z, w);
    const double f_z = fitra_objective(z, pb, beta);
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    x_prev = x;
    const double f_prev = f_cur;
    if (f_z <= f_cur) {
      x = z;
      f_cur = f_z;
    }
    v = x + (t / t_next) * (z - x) + ((t - 1.0) / t_next) * (x - x_prev);
    t = t_next;
    if (it > 0 && std::abs(f_prev - f_cur) <= opt.tol * std::max(1.0, std::abs(f_prev))) {
      // A rejected step leaves f unchanged; only stop once x also settled.
      if ((x - x_prev).norm() <= std::sqrt(opt.tol) * std::max(1.0, x.norm()) && f_z <= f_prev) {
        ++it;
        break;
      }
    }
  }
  return {std::move(x), EstimatorKind::FITRA, std::numeric_limits<double>::quiet_NaN(), it};
}

/// Minimum-norm least squares, and the Gaussian-prior posterior mean
/// (H^T H / sigma2 + I / prior_var)^{-1} H^T y / sigma2, reported as both the
/// Gaussian MMSE and MAP (they coincide).
inline std::vector<EstimatorResult> reference_solvers(const CodingProblem& pb, double sigma2,
                                                      double prior_var) {
  check_positive(sigma2, "reference_solvers: sigma2");
  check_positive(prior_var, "reference_solvers: prior_var");
  const Matrix& h = pb.h();
  std::vector<EstimatorResult> out;
  out.push_back({h.completeOrthogonalDecomposition().solve(pb.y()), EstimatorKind::LS});
  // Solve in the smaller of the two spaces; the M x M form stays well
  // conditioned for wide H when prior_var is large.
  Vector ridge;
  if (h.cols() > h.rows()) {
    Matrix g = h * h.transpose();
    g.diagonal().array() += sigma2 / prior_var;
    ridge = h.transpose() * g.llt().solve(pb.y());
  } else {
    Matrix a = h.transpose() * h / sigma2;
    a.diagonal().array() += 1.0 / prior_var;
    ridge = a.llt().solve(h.transpose() * pb.y() / sigma2);
  }
  out.push_back({ridge, EstimatorKind::RidgeMMSE});
  out.push_back({ridge, EstimatorKind::RidgeMAP});
  return out;
}

}  // namespace democ
