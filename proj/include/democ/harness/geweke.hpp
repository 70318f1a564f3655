#pragma once

// Successive conditional sampling: alternate y ~ N(Hx, sigma2 I) and a
// coefficient step on x | y. If the step leaves x | y invariant, the x draws
// follow the prior D_N(N mu) marginally.

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "democ/coder.hpp"
#include "democ/democratic.hpp"
#include "democ/harness/gof.hpp"
#include "democ/rng.hpp"
#include "democ/samplers.hpp"

namespace democ::harness {

struct GewekeConfig {
  Eigen::Index m = 3;
  Eigen::Index n = 3;
  double sigma2 = 0.25;
  double mu = 2.0;
  std::size_t iters = 20000;
  CoefStepKind kind = CoefStepKind::Gibbs;
  std::size_t mh_moves = 20;
  /// P-MALA proposal variance as a multiple of sigma2 / ||H||_2^2 (fixed, no adaptation).
  double relative_step = 0.5;
};

struct GewekeRun {
  Matrix h;
  std::vector<Vector> x_samples;
  double acceptance_rate = 1.0;
};

inline GewekeRun geweke_run(const GewekeConfig& cfg, RngStream& rng) {
  if (cfg.m < 1 || cfg.n < 1 || cfg.iters < 1) throw std::invalid_argument("geweke_run: bad sizes");
  check_positive(cfg.sigma2, "geweke_run: sigma2");
  check_positive(cfg.mu, "geweke_run: mu");
  GewekeRun out;
  out.h.resize(cfg.m, cfg.n);
  for (Eigen::Index j = 0; j < cfg.n; ++j)
    for (Eigen::Index i = 0; i < cfg.m; ++i) out.h(i, j) = rng.normal();
  const auto prior = DemocraticParams::from_hyper(static_cast<std::size_t>(cfg.n), cfg.mu);
  const double delta = cfg.relative_step * cfg.sigma2 / spectral_norm_sq(out.h);
  const double sd = std::sqrt(cfg.sigma2);

  Vector x = sample_exact(prior, rng);
  Vector y(cfg.m);
  std::size_t accepts = 0;
  out.x_samples.reserve(cfg.iters);
  for (std::size_t t = 0; t < cfg.iters; ++t) {
    const Vector hx = out.h * x;
    for (Eigen::Index i = 0; i < cfg.m; ++i) y[i] = hx[i] + sd * rng.normal();
    const CodingProblem pb(y, out.h);
    if (cfg.kind == CoefStepKind::Gibbs) {
      x = gibbs_coef_sweep(x, cfg.sigma2, cfg.mu, pb, rng);
    } else {
      auto res = pmala_coef_step(x, cfg.sigma2, cfg.mu, pb, delta, cfg.mh_moves, rng);
      x = std::move(res.x);
      accepts += res.accept_count;
    }
    out.x_samples.push_back(x);
  }
  if (cfg.kind == CoefStepKind::PMala)
    out.acceptance_rate = static_cast<double>(accepts) /
                          static_cast<double>(cfg.iters * cfg.mh_moves);
  return out;
}

struct GewekeReport {
  GammaGof dominant;
  TestResult cones;
  std::vector<std::size_t> cone_counts;
  /// Mean over components of the empirical variance, and the prior value.
  double variance = 0.0;
  double variance_expected = 0.0;
};

/// Successive draws are autocorrelated; the KS and chi-square tests use every
/// `thin`-th draw so their independence assumption roughly holds. Moments use all draws.
inline GewekeReport geweke_report(const GewekeRun& run, double mu, std::size_t thin = 20) {
  if (thin < 1) throw std::invalid_argument("geweke_report: thin must be >= 1");
  if (run.x_samples.empty()) throw std::invalid_argument("geweke_report: no samples");
  const auto n = run.x_samples.front().size();
  const auto prior = DemocraticParams::from_hyper(static_cast<std::size_t>(n), mu);
  GewekeReport rep;
  rep.cone_counts.assign(static_cast<std::size_t>(n), 0);
  std::vector<double> dom;
  dom.reserve(run.x_samples.size());
  Vector sum = Vector::Zero(n);
  Vector sum_sq = Vector::Zero(n);
  for (std::size_t t = 0; t < run.x_samples.size(); ++t) {
    const auto& x = run.x_samples[t];
    if (t % thin == 0) {
      const auto c = cone_index(x);
      ++rep.cone_counts[c.index];
      dom.push_back(std::abs(c.dominant_value));
    }
    sum += x;
    sum_sq += x.cwiseProduct(x);
  }
  const double t = static_cast<double>(run.x_samples.size());
  const Vector var = sum_sq / t - (sum / t).cwiseProduct(sum / t);
  rep.variance = var.mean();
  rep.variance_expected = moments(prior).variance;
  const auto law = dominant_given_cone_law(prior);
  rep.dominant = gamma_gof(std::move(dom), law.shape, law.rate);
  rep.cones = n >= 2 ? chi_square_uniform(rep.cone_counts) : TestResult{};
  return rep;
}

}  // namespace democ::harness
