#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "democ/harness/gof.hpp"
#include "democ/samplers.hpp"

using namespace democ;

namespace {

std::vector<double> dominant_abs(const std::vector<Vector>& xs) {
  std::vector<double> out;
  out.reserve(xs.size());
  for (const auto& x : xs) out.push_back(linf_norm(x));
  return out;
}

double mean_component_variance(const std::vector<Vector>& xs) {
  const auto n = xs.front().size();
  Vector s = Vector::Zero(n), s2 = Vector::Zero(n);
  for (const auto& x : xs) {
    s += x;
    s2 += x.cwiseProduct(x);
  }
  const double t = static_cast<double>(xs.size());
  return (s2 / t - (s / t).cwiseProduct(s / t)).mean();
}

}  // namespace

TEST(ExactSampler, DominantFollowsGammaAndConesUniform) {
  const DemocraticParams p(4, 3.0);
  RngStream rng(1);
  const auto xs = sample_exact_many(p, 20000, rng);
  const auto gof = harness::gamma_gof(dominant_abs(xs), 4.0, 3.0);
  EXPECT_GT(gof.p_value, 0.01);
  std::vector<std::size_t> counts(4, 0);
  for (const auto& x : xs) ++counts[cone_index(x).index];
  EXPECT_GT(harness::chi_square_uniform(counts).p_value, 0.01);
}

TEST(ExactSampler, VarianceMatchesClosedForm) {
  const DemocraticParams p(50, 3.0);
  RngStream rng(2);
  const auto xs = sample_exact_many(p, 20000, rng);
  EXPECT_NEAR(mean_component_variance(xs) / moments(p).variance, 1.0, 0.03);
}

TEST(ExactSampler, SingleCoordinateMarginalKs) {
  const DemocraticParams p(3, 1.0);
  RngStream rng(3);
  const auto xs = sample_exact_many(p, 20000, rng);
  std::vector<double> first;
  for (const auto& x : xs) first.push_back(x[0]);
  // CDF of the equal mixture of dG(j, lambda)
  auto cdf = [&](double v) {
    double acc = 0.0;
    for (int j = 1; j <= 3; ++j) {
      const double g = boost::math::gamma_p(static_cast<double>(j), std::abs(v));
      acc += v >= 0 ? 0.5 + 0.5 * g : 0.5 - 0.5 * g;
    }
    return acc / 3.0;
  };
  EXPECT_GT(harness::ks_one_sample(first, cdf).p_value, 0.01);
}

TEST(GibbsPrior, DominantFollowsGammaAndStaysFinite) {
  const DemocraticParams p(2, 3.0);
  RngStream rng(4);
  ChainConfig cfg;
  cfg.total_iters = 21000;
  cfg.burn_in = 1000;
  const auto chain = gibbs_prior_chain(p, cfg, Vector::Zero(2), rng);
  for (const auto& x : chain.samples) ASSERT_TRUE(x.allFinite());
  // thin by 5 to tame autocorrelation in the KS test
  std::vector<double> dom;
  const auto kept = chain.kept();
  for (std::size_t t = 0; t < kept.size(); t += 5) dom.push_back(linf_norm(kept[t]));
  EXPECT_GT(harness::gamma_gof(dom, 2.0, 3.0).p_value, 0.01);
}

TEST(PmalaPrior, AdaptedAcceptanceInRangeAndVariance) {
  const DemocraticParams p(10, 3.0);
  RngStream rng(5);
  ChainConfig cfg;
  cfg.total_iters = 105000;
  cfg.burn_in = 5000;
  cfg.step_size = 0.01;
  const auto chain = pmala_prior_chain(p, cfg, Vector::Zero(10), rng);
  EXPECT_GT(chain.acceptance_rate(), 0.3);
  EXPECT_LT(chain.acceptance_rate(), 0.7);
  EXPECT_NEAR(mean_component_variance(chain.kept()) / moments(p).variance, 1.0, 0.05);
}

TEST(PmalaPrior, TinyStepAcceptsAlmostEverything) {
  const DemocraticParams p(5, 3.0);
  RngStream rng(6);
  ChainConfig cfg;
  cfg.total_iters = 2000;
  cfg.burn_in = 0;
  cfg.step_size = 1e-10;
  cfg.adapt = false;
  Vector init = Vector::Constant(5, 0.2);
  const auto chain = pmala_prior_chain(p, cfg, init, rng);
  EXPECT_GT(chain.acceptance_rate(), 0.99);
}

TEST(PmalaPrior, MirroredStartsAgree) {
  const DemocraticParams p(3, 2.0);
  ChainConfig cfg;
  cfg.total_iters = 40000;
  cfg.burn_in = 2000;
  const Vector init = Vector::Constant(3, 0.8);
  RngStream r1(7), r2(8);
  const auto a = pmala_prior_chain(p, cfg, init, r1);
  const auto b = pmala_prior_chain(p, cfg, -init, r2);
  EXPECT_NEAR(mean_component_variance(a.kept()), mean_component_variance(b.kept()),
              0.1 * moments(p).variance);
}

TEST(Chains, ReplayIsBitExact) {
  const DemocraticParams p(4, 1.5);
  ChainConfig cfg;
  cfg.total_iters = 300;
  cfg.burn_in = 100;
  for (int kind = 0; kind < 2; ++kind) {
    RngStream a(42, 3), b(42, 3);
    const auto ca = kind ? pmala_prior_chain(p, cfg, Vector::Ones(4), a) : gibbs_prior_chain(p, cfg, Vector::Ones(4), a);
    const auto cb = kind ? pmala_prior_chain(p, cfg, Vector::Ones(4), b) : gibbs_prior_chain(p, cfg, Vector::Ones(4), b);
    for (std::size_t t = 0; t < ca.samples.size(); ++t) ASSERT_TRUE((ca.samples[t].array() == cb.samples[t].array()).all());
  }
  RngStream c(42, 3), d(42, 4);
  EXPECT_NE(sample_exact(p, c)[0], sample_exact(p, d)[0]);
}

TEST(Chains, RejectBadConfig) {
  const DemocraticParams p(3, 1.0);
  RngStream rng(1);
  ChainConfig cfg;
  cfg.total_iters = 10;
  cfg.burn_in = 10;
  EXPECT_THROW(gibbs_prior_chain(p, cfg, Vector::Zero(3), rng), std::invalid_argument);
  cfg.burn_in = 0;
  EXPECT_THROW(pmala_prior_chain(p, cfg, Vector::Zero(2), rng), std::invalid_argument);
}

TEST(Acf, WhiteNoiseAndErrors) {
  RngStream rng(10);
  std::vector<double> s(100000);
  for (auto& v : s) v = rng.normal();
  for (double r : acf(s, 5)) EXPECT_LT(std::abs(r), 0.02);
  const std::vector<double> flat(10, 1.0);
  EXPECT_THROW(acf(flat, 2), std::domain_error);
  EXPECT_THROW(acf(std::vector<double>{1.0, 2.0}, 2), std::invalid_argument);
}

TEST(Acf, LagOneOrderingExactGibbsPmala) {
  const DemocraticParams p(50, 3.0);
  ChainConfig cfg;
  cfg.total_iters = 22000;
  cfg.burn_in = 2000;
  RngStream r0(11), r1(12), r2(13);
  const auto init = sample_exact(p, r0);
  Chain exact;
  exact.config = cfg;
  exact.samples = sample_exact_many(p, cfg.total_iters, r0);
  const auto gibbs = gibbs_prior_chain(p, cfg, init, r1);
  const auto pmala = pmala_prior_chain(p, cfg, init, r2);
  auto peak = [](const Vector& x) { return linf_norm(x); };
  const double a0 = acf(exact, 1, peak)[0];
  const double a1 = acf(gibbs, 1, peak)[0];
  const double a2 = acf(pmala, 1, peak)[0];
  EXPECT_LT(a0, a1);
  EXPECT_LT(a1, a2);
}
