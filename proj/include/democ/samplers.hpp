#pragma once

// Random variate generators for D_N(lambda): the exact chain-rule sampler, a
// component-wise Gibbs chain and a proximal MALA chain, plus ACF diagnostics.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "democ/democratic.hpp"
#include "democ/prox.hpp"
#include "democ/rng.hpp"

namespace democ {

struct ChainConfig {
  std::size_t total_iters = 1000;
  std::size_t burn_in = 0;
  /// Proposal variance delta of the MALA kernels.
  double step_size = 0.1;
  double target_lo = 0.4;
  double target_hi = 0.6;
  /// Step-size adaptation during burn-in; frozen afterward.
  bool adapt = true;
  /// Gibbs only: visit coordinates in a fresh random order every sweep.
  bool random_scan = false;

  void validate() const {
    if (total_iters < 1) throw std::invalid_argument("ChainConfig: total_iters must be >= 1");
    if (burn_in >= total_iters) throw std::invalid_argument("ChainConfig: burn_in must be < total_iters");
    if (!(step_size > 0.0)) throw std::invalid_argument("ChainConfig: step_size must be > 0");
    if (!(target_lo < target_hi)) throw std::invalid_argument("ChainConfig: bad target interval");
  }
  double target() const { return 0.5 * (target_lo + target_hi); }
};

struct Chain {
  std::vector<Vector> samples;
  ChainConfig config;
  /// Accepted MH moves over the whole run and after burn-in.
  std::size_t accept_count = 0;
  std::size_t kept_accept_count = 0;
  std::size_t kept_proposals = 0;
  /// Step size in force after burn-in.
  double final_step_size = 0.0;

  double acceptance_rate() const {
    return kept_proposals == 0 ? 0.0
                               : static_cast<double>(kept_accept_count) /
                                     static_cast<double>(kept_proposals);
  }
  std::vector<Vector> kept() const {
    return {samples.begin() + static_cast<std::ptrdiff_t>(config.burn_in), samples.end()};
  }
};

namespace detail {

/// Robbins-Monro update of log(step) toward the target acceptance.
inline double adapt_log_step(double log_step, double alpha, double target, std::size_t iter) {
  const double gain = 1.0 / std::pow(static_cast<double>(iter) + 1.0, 0.6);
  return log_step + gain * (alpha - target);
}

}  // namespace detail

inline double sample_double_gamma(const DoubleGammaParams& p, RngStream& rng) {
  const double g = rng.gamma(p.shape, p.rate);
  return rng.coin() ? g : -g;
}

/// Exact draw: uniform cone, dG(N, lambda) dominant, uniform non-dominant coordinates.
inline Vector sample_exact(const DemocraticParams& p, RngStream& rng) {
  const auto n = static_cast<Eigen::Index>(p.dim());
  Vector x(n);
  const auto dom = static_cast<Eigen::Index>(rng.index(p.dim()));
  const double xd = sample_double_gamma(dominant_given_cone_law(p), rng);
  const double bound = std::abs(xd);
  for (Eigen::Index j = 0; j < n; ++j) {
    if (j != dom) x[j] = rng.uniform(-bound, bound);
  }
  x[dom] = xd;
  return x;
}

inline std::vector<Vector> sample_exact_many(const DemocraticParams& p, std::size_t count,
                                             RngStream& rng) {
  std::vector<Vector> out;
  out.reserve(count);
  for (std::size_t t = 0; t < count; ++t) out.push_back(sample_exact(p, rng));
  return out;
}

/// Component-wise Gibbs chain on the prior conditionals.
inline Chain gibbs_prior_chain(const DemocraticParams& p, const ChainConfig& cfg, VectorCRef init,
                               RngStream& rng) {
  cfg.validate();
  check_dim(init, p.dim(), "gibbs_prior_chain");
  const auto n = static_cast<Eigen::Index>(p.dim());
  Chain chain;
  chain.config = cfg;
  chain.samples.reserve(cfg.total_iters);
  Vector x = init;
  Vector rest(n > 0 ? n - 1 : 0);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  for (std::size_t t = 0; t < cfg.total_iters; ++t) {
    if (cfg.random_scan) std::shuffle(order.begin(), order.end(), rng.engine());
    for (Eigen::Index k : order) {
      rest.head(k) = x.head(k);
      rest.tail(n - 1 - k) = x.tail(n - 1 - k);
      x[k] = conditional_mixture_prior(rest, p).sample(rng);
    }
    chain.samples.push_back(x);
  }
  return chain;
}

/// Proximal MALA chain targeting D_N(lambda): proposal N(prox_{lambda delta / 2}(x), delta I).
inline Chain pmala_prior_chain(const DemocraticParams& p, const ChainConfig& cfg, VectorCRef init,
                               RngStream& rng) {
  cfg.validate();
  check_dim(init, p.dim(), "pmala_prior_chain");
  const double lam = p.rate();
  const auto n = static_cast<Eigen::Index>(p.dim());
  Chain chain;
  chain.config = cfg;
  chain.samples.reserve(cfg.total_iters);
  Vector x = init;
  double log_step = std::log(cfg.step_size);
  Vector noise(n);
  for (std::size_t t = 0; t < cfg.total_iters; ++t) {
    const double delta = std::exp(log_step);
    const Vector mean_fwd = prox_linf(x, 0.5 * lam * delta);
    for (Eigen::Index i = 0; i < n; ++i) noise[i] = rng.normal();
    const Vector cand = mean_fwd + std::sqrt(delta) * noise;
    const Vector mean_bwd = prox_linf(cand, 0.5 * lam * delta);
    const double log_target = -lam * (linf_norm(cand) - linf_norm(x));
    const double log_q = -((x - mean_bwd).squaredNorm() - (cand - mean_fwd).squaredNorm()) /
                         (2.0 * delta);
    const double log_alpha = std::min(0.0, log_target + log_q);
    const bool accept = std::log(rng.uniform()) < log_alpha;
    if (accept) {
      x = cand;
      ++chain.accept_count;
    }
    if (t < cfg.burn_in) {
      if (cfg.adapt) log_step = detail::adapt_log_step(log_step, std::exp(log_alpha), cfg.target(), t);
    } else {
      ++chain.kept_proposals;
      if (accept) ++chain.kept_accept_count;
    }
    chain.samples.push_back(x);
  }
  chain.final_step_size = std::exp(log_step);
  return chain;
}

/// Biased empirical autocorrelation at lags 1..max_lag.
inline std::vector<double> acf(std::span<const double> series, std::size_t max_lag) {
  const std::size_t n = series.size();
  if (n < 2 || max_lag >= n) throw std::invalid_argument("acf: series too short for requested lag");
  const double mean = std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(n);
  double var = 0.0;
  for (double s : series) var += (s - mean) * (s - mean);
  if (!(var > 0.0)) throw std::domain_error("acf: zero-variance series");
  std::vector<double> out(max_lag);
  for (std::size_t k = 1; k <= max_lag; ++k) {
    double c = 0.0;
    for (std::size_t t = 0; t + k < n; ++t) c += (series[t] - mean) * (series[t + k] - mean);
    out[k - 1] = c / var;
  }
  return out;
}

/// ACF of a per-sample scalar statistic over the post-burn-in part of a chain.
inline std::vector<double> acf(const Chain& chain, std::size_t max_lag,
                               const std::function<double(const Vector&)>& statistic) {
  std::vector<double> series;
  series.reserve(chain.samples.size() - chain.config.burn_in);
  for (std::size_t t = chain.config.burn_in; t < chain.samples.size(); ++t)
    series.push_back(statistic(chain.samples[t]));
  return acf(series, max_lag);
}

}  // namespace democ
