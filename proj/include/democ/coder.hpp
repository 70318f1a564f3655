#pragma once

// Bayesian anti-sparse coding: y = Hx + e, e ~ N(0, sigma2 I), x | mu ~ D_N(N mu),
// Jeffreys prior on sigma2 and Gamma(a, b) on mu. Gibbs sampler over
// (sigma2, mu, x), with the x-step done either coordinate-wise (exact
// conditionals) or as a block of proximal MALA moves.

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "democ/democratic.hpp"
#include "democ/mixture.hpp"
#include "democ/problem.hpp"
#include "democ/prox.hpp"
#include "democ/rng.hpp"
#include "democ/samplers.hpp"
#include "democ/special.hpp"

namespace democ {

enum class CoefStepKind { Gibbs, PMala };

inline std::string to_string(CoefStepKind k) { return k == CoefStepKind::Gibbs ? "gibbs" : "pmala"; }

inline CoefStepKind coef_step_from_string(const std::string& s) {
  if (s == "gibbs") return CoefStepKind::Gibbs;
  if (s == "pmala" || s == "p-mala") return CoefStepKind::PMala;
  throw std::invalid_argument("unknown coefficient step kind: " + s);
}

/// Exponent applied to the residual norm in the marginal posterior of x.
/// Exact: integrating sigma2 out gives ||y - Hx||^{-M}. Halved: ||y - Hx||^{-M/2}.
enum class ResidualExponent { Exact, Halved };

/// Lower bound on ||y - Hx||^2 in the sigma2 update, keeping it proper on noise-free data.
inline constexpr double kResidualFloor = 1e-12;

inline void check_positive(double v, const char* what) {
  if (!(v > 0.0)) throw std::domain_error(std::string(what) + " must be > 0");
}

/// log f(x, sigma2, mu | y) up to a constant depending on y only.
inline double log_joint_posterior(VectorCRef x, double sigma2, double mu, const CodingProblem& pb) {
  check_positive(sigma2, "log_joint_posterior: sigma2");
  check_positive(mu, "log_joint_posterior: mu");
  const double m = static_cast<double>(pb.m());
  const auto prior = DemocraticParams::from_hyper(static_cast<std::size_t>(pb.n()), mu);
  const double rss = pb.residual(x).squaredNorm();
  return -(0.5 * m + 1.0) * std::log(sigma2) - rss / (2.0 * sigma2) + log_pdf(x, prior) +
         (pb.hyper_a() - 1.0) * std::log(mu) - pb.hyper_b() * mu;
}

/// log f(x | y) up to a constant. Zero residual maps to +inf.
inline double log_marginal_posterior(VectorCRef x, const CodingProblem& pb,
                                     ResidualExponent exponent = ResidualExponent::Exact) {
  const double res = pb.residual(x).norm();
  if (res == 0.0) return kPosInf;
  const double m = static_cast<double>(pb.m());
  const double n = static_cast<double>(pb.n());
  const double power = exponent == ResidualExponent::Exact ? m : 0.5 * m;
  return -power * std::log(res) - (pb.hyper_a() + n) * std::log(pb.hyper_b() + n * linf_norm(x));
}

/// sigma2 | y, x ~ IG(M / 2, ||y - Hx||^2 / 2).
inline double sample_sigma2(VectorCRef x, const CodingProblem& pb, RngStream& rng) {
  const double rss = std::max(pb.residual(x).squaredNorm(), kResidualFloor);
  return 1.0 / rng.gamma(0.5 * static_cast<double>(pb.m()), 0.5 * rss);
}

/// mu | x ~ G(a + N, b + N ||x||_inf).
inline double sample_mu(VectorCRef x, const CodingProblem& pb, RngStream& rng) {
  const double n = static_cast<double>(pb.n());
  check_dim(x, static_cast<std::size_t>(pb.n()), "sample_mu");
  return rng.gamma(pb.hyper_a() + n, pb.hyper_b() + n * linf_norm(x));
}

namespace detail {

// Conditional of x_n given h_n^T e_n (e_n = y - sum_{i != n} x_i h_i), m = ||x_{\n}||_inf.
// The truncated-Gaussian weights are taken relative to the middle piece's
// exp(mu_2^2 / 2 s^2) factor so no exp(mu^2 / 2 s^2) is ever formed.
inline ConditionalMixture coef_mixture_from_stats(double hte, double h_sq, double m, double sigma2,
                                                  double lambda) {
  const double s2 = sigma2 / h_sq;
  const double s = std::sqrt(s2);
  const double mu2 = hte / h_sq;
  const double mu1 = mu2 + s2 * lambda;
  const double mu3 = mu2 - s2 * lambda;
  const double tail_common = 0.5 * s2 * lambda * lambda + lambda * m;
  const double log_u1 = lambda * mu2 + tail_common + log_normal_cdf((-m - mu1) / s);
  const double log_u2 = m > 0.0 ? log_normal_mass((-m - mu2) / s, (m - mu2) / s) : kNegInf;
  const double log_u3 = -lambda * mu2 + tail_common + log_normal_sf((m - mu3) / s);
  std::vector<MixturePiece> pieces{TruncNormalPiece{mu1, s2, kNegInf, -m},
                                   TruncNormalPiece{mu2, s2, -m, m},
                                   TruncNormalPiece{mu3, s2, m, kPosInf}};
  return ConditionalMixture(std::move(pieces), {log_u1, log_u2, log_u3});
}

inline double linf_excluding(VectorCRef x, Eigen::Index skip) {
  double m = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (i != skip) m = std::max(m, std::abs(x[i]));
  return m;
}

}  // namespace detail

/// Law of x_n | x_{\n}, sigma2, mu, y: a 3-piece truncated-Gaussian mixture on
/// (-inf, -m), (-m, m), (m, inf). The value x[n] itself is ignored.
inline ConditionalMixture coef_conditional_mixture(Eigen::Index n, VectorCRef x, double sigma2,
                                                   double mu, const CodingProblem& pb) {
  check_dim(x, static_cast<std::size_t>(pb.n()), "coef_conditional_mixture");
  if (n < 0 || n >= pb.n()) throw std::out_of_range("coef_conditional_mixture: index out of range");
  check_positive(sigma2, "coef_conditional_mixture: sigma2");
  check_positive(mu, "coef_conditional_mixture: mu");
  const auto& h = pb.h();
  const double h_sq = pb.col_sq_norms()[n];
  const double hte = h.col(n).dot(pb.residual(x)) + x[n] * h_sq;
  const double lambda = static_cast<double>(pb.n()) * mu;
  return detail::coef_mixture_from_stats(hte, h_sq, detail::linf_excluding(x, n), sigma2, lambda);
}

/// One systematic-scan sweep over all coefficients; returns the updated vector.
inline Vector gibbs_coef_sweep(VectorCRef x_in, double sigma2, double mu, const CodingProblem& pb,
                               RngStream& rng) {
  check_dim(x_in, static_cast<std::size_t>(pb.n()), "gibbs_coef_sweep");
  check_positive(sigma2, "gibbs_coef_sweep: sigma2");
  check_positive(mu, "gibbs_coef_sweep: mu");
  const auto& h = pb.h();
  const double lambda = static_cast<double>(pb.n()) * mu;
  Vector x = x_in;
  Vector r = pb.residual(x);
  for (Eigen::Index n = 0; n < pb.n(); ++n) {
    const double h_sq = pb.col_sq_norms()[n];
    const double hte = h.col(n).dot(r) + x[n] * h_sq;
    const auto mix =
        detail::coef_mixture_from_stats(hte, h_sq, detail::linf_excluding(x, n), sigma2, lambda);
    const double fresh = mix.sample(rng);
    r.noalias() -= (fresh - x[n]) * h.col(n);
    x[n] = fresh;
  }
  return x;
}

struct PmalaStepResult {
  Vector x;
  std::size_t accept_count = 0;
  /// Mean MH acceptance probability over the moves (drives step adaptation).
  double mean_alpha = 0.0;
};

/// n_moves proximal-MALA moves on x | sigma2, mu, y with proposal variance delta.
inline PmalaStepResult pmala_coef_step(VectorCRef x_in, double sigma2, double mu,
                                       const CodingProblem& pb, double delta, std::size_t n_moves,
                                       RngStream& rng) {
  check_dim(x_in, static_cast<std::size_t>(pb.n()), "pmala_coef_step");
  check_positive(sigma2, "pmala_coef_step: sigma2");
  check_positive(mu, "pmala_coef_step: mu");
  check_positive(delta, "pmala_coef_step: delta");
  if (n_moves < 1) throw std::invalid_argument("pmala_coef_step: n_moves must be >= 1");
  const double lambda = static_cast<double>(pb.n()) * mu;
  const auto log_target = [&](const Vector& v) {
    return -pb.residual(v).squaredNorm() / (2.0 * sigma2) - lambda * linf_norm(v);
  };
  PmalaStepResult out;
  out.x = x_in;
  Vector mean_cur = gradient_step_prox(out.x, pb, sigma2, lambda, delta);
  double lt_cur = log_target(out.x);
  const double sd = std::sqrt(delta);
  Vector cand(pb.n());
  double alpha_sum = 0.0;
  for (std::size_t k = 0; k < n_moves; ++k) {
    for (Eigen::Index i = 0; i < cand.size(); ++i) cand[i] = mean_cur[i] + sd * rng.normal();
    const Vector mean_cand = gradient_step_prox(cand, pb, sigma2, lambda, delta);
    const double lt_cand = log_target(cand);
    const double log_q = -((out.x - mean_cand).squaredNorm() - (cand - mean_cur).squaredNorm()) /
                         (2.0 * delta);
    const double log_alpha = std::min(0.0, lt_cand - lt_cur + log_q);
    alpha_sum += std::isfinite(log_alpha) ? std::exp(log_alpha) : 0.0;
    if (std::log(rng.uniform()) < log_alpha) {
      out.x = cand;
      mean_cur = mean_cand;
      lt_cur = lt_cand;
      ++out.accept_count;
    }
  }
  out.mean_alpha = alpha_sum / static_cast<double>(n_moves);
  return out;
}

struct PosteriorConfig {
  ChainConfig chain;
  CoefStepKind kind = CoefStepKind::PMala;
  std::size_t mh_moves_per_iter = 20;
  /// When set, the P-MALA proposal variance is chain.step_size * sigma2 / ||H||_2^2,
  /// following the current noise level; otherwise it is chain.step_size itself,
  /// adapted during burn-in and then fixed.
  bool step_relative_to_noise = false;
  std::optional<Vector> init;
};

struct PosteriorChain {
  std::vector<Vector> x_samples;
  std::vector<double> sigma2_samples;
  std::vector<double> mu_samples;
  std::size_t burn_in = 0;
  CoefStepKind kind = CoefStepKind::PMala;
  std::size_t mh_moves_per_iter = 1;
  /// Post-burn-in MH acceptance rate (P-MALA), 1 for Gibbs.
  double acceptance_rate = 1.0;
  /// Adapted step (relative or absolute, see PosteriorConfig) after burn-in.
  double final_step = 0.0;

  std::size_t size() const { return x_samples.size(); }
};

inline double spectral_norm_sq(const Matrix& h, std::size_t iters = 200) {
  Vector v = Vector::Ones(h.cols()).normalized();
  double est = 0.0;
  for (std::size_t k = 0; k < iters; ++k) {
    Vector w = h.transpose() * (h * v);
    const double nrm = w.norm();
    if (nrm == 0.0) return 0.0;
    v = w / nrm;
    if (std::abs(nrm - est) <= 1e-12 * nrm) return nrm;
    est = nrm;
  }
  return est;
}

/// Starting point: an exact prior draw at the scale of the minimum-norm
/// least-squares fit, mu0 = 1 / ||H^+ y||_inf.
inline Vector default_init(const CodingProblem& pb, RngStream& rng) {
  const Vector ls = pb.h().completeOrthogonalDecomposition().solve(pb.y());
  const double scale = linf_norm(ls);
  const double mu0 = scale > 0.0 ? 1.0 / scale : 1.0;
  return sample_exact(DemocraticParams::from_hyper(static_cast<std::size_t>(pb.n()), mu0), rng);
}

/// Gibbs sampler over (sigma2, mu, x): sigma2 | x, then mu | x, then the x-step.
inline PosteriorChain run_chain(const CodingProblem& pb, const PosteriorConfig& cfg, RngStream& rng) {
  cfg.chain.validate();
  if (cfg.kind == CoefStepKind::PMala && cfg.mh_moves_per_iter < 1)
    throw std::invalid_argument("run_chain: mh_moves_per_iter must be >= 1");
  Vector x = cfg.init ? *cfg.init : default_init(pb, rng);
  check_dim(x, static_cast<std::size_t>(pb.n()), "run_chain init");

  PosteriorChain out;
  out.burn_in = cfg.chain.burn_in;
  out.kind = cfg.kind;
  out.mh_moves_per_iter = cfg.kind == CoefStepKind::PMala ? cfg.mh_moves_per_iter : 1;
  out.x_samples.reserve(cfg.chain.total_iters);
  out.sigma2_samples.reserve(cfg.chain.total_iters);
  out.mu_samples.reserve(cfg.chain.total_iters);

  const double lip = cfg.step_relative_to_noise ? spectral_norm_sq(pb.h()) : 1.0;
  double log_step = std::log(cfg.chain.step_size);
  std::size_t kept_accepts = 0;
  std::size_t kept_moves = 0;
  for (std::size_t t = 0; t < cfg.chain.total_iters; ++t) {
    const double sigma2 = sample_sigma2(x, pb, rng);
    const double mu = sample_mu(x, pb, rng);
    if (cfg.kind == CoefStepKind::Gibbs) {
      x = gibbs_coef_sweep(x, sigma2, mu, pb, rng);
    } else {
      const double step = std::exp(log_step);
      const double delta = cfg.step_relative_to_noise ? step * sigma2 / lip : step;
      auto res = pmala_coef_step(x, sigma2, mu, pb, delta, cfg.mh_moves_per_iter, rng);
      x = std::move(res.x);
      if (t < cfg.chain.burn_in) {
        if (cfg.chain.adapt)
          log_step = detail::adapt_log_step(log_step, res.mean_alpha, cfg.chain.target(), t);
      } else {
        kept_accepts += res.accept_count;
        kept_moves += cfg.mh_moves_per_iter;
      }
    }
    out.x_samples.push_back(x);
    out.sigma2_samples.push_back(sigma2);
    out.mu_samples.push_back(mu);
  }
  out.final_step = std::exp(log_step);
  if (cfg.kind == CoefStepKind::PMala)
    out.acceptance_rate = kept_moves == 0 ? 0.0 : static_cast<double>(kept_accepts) /
                                                      static_cast<double>(kept_moves);
  return out;
}

}  // namespace democ
