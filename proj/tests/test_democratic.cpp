#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "democ/democratic.hpp"
#include "oracles.hpp"

using namespace democ;

namespace {

using oracle::integrate_symmetric;

struct Setting {
  std::size_t n;
  double lam;
};

std::vector<Setting> settings() {
  std::vector<Setting> out;
  for (std::size_t n : {1, 2, 3})
    for (double lam : {0.5, 3.0}) out.push_back({n, lam});
  return out;
}

double radius(double lam) { return 80.0 / lam; }

Vector random_vec(std::size_t n, double scale, unsigned seed) {
  RngStream rng(seed);
  Vector v(static_cast<Eigen::Index>(n));
  for (auto& e : v) e = scale * rng.uniform(-1.0, 1.0);
  return v;
}

}  // namespace

TEST(Democratic, JointDensityIntegratesToOne) {
  for (auto s : settings()) {
    const DemocraticParams p(s.n, s.lam);
    const double z = integrate_symmetric([&](const Vector& x) { return pdf(x, p); },
                                         static_cast<int>(s.n), radius(s.lam));
    EXPECT_NEAR(z, 1.0, 1e-6) << "N=" << s.n << " lam=" << s.lam;
  }
}

TEST(Democratic, MarginalsIntegrateToOneAndMatchQuadrature) {
  for (auto s : settings()) {
    const DemocraticParams p(s.n, s.lam);
    for (std::size_t removed = 1; removed < s.n; ++removed) {
      const int keep = static_cast<int>(s.n - removed);
      const double z = integrate_symmetric(
          [&](const Vector& x) { return std::exp(marginal_logpdf(x, removed, p)); }, keep, radius(s.lam));
      EXPECT_NEAR(z, 1.0, 1e-6) << "N=" << s.n << " removed=" << removed;

      // Slice check: integrate the joint over the removed coordinates.
      for (unsigned seed = 1; seed <= 5; ++seed) {
        const Vector xk = random_vec(static_cast<std::size_t>(keep), 2.0 / s.lam, seed);
        const double ref = integrate_symmetric(
            [&](const Vector& xr) {
              Vector full(static_cast<Eigen::Index>(s.n));
              full << xk, xr;
              return pdf(full, p);
            },
            static_cast<int>(removed), radius(s.lam), linf_norm(xk));
        EXPECT_NEAR(std::exp(marginal_logpdf(xk, removed, p)), ref, 1e-7 * std::max(1.0, ref));
      }
    }
  }
}

TEST(Democratic, SingleCoordinateMarginal) {
  for (auto s : settings()) {
    const DemocraticParams p(s.n, s.lam);
    const double r = radius(s.lam);
    const double z = oracle::integrate([&](double v) { return std::exp(single_marginal_logpdf(v, p)); },
                                       -r, r, {0.0});
    EXPECT_NEAR(z, 1.0, 1e-6);
    if (s.n >= 2) {
      for (double v : {-1.3, 0.05, 0.4, 2.0}) {
        Vector one(1);
        one << v;
        EXPECT_NEAR(single_marginal_logpdf(v, p), marginal_logpdf(one, s.n - 1, p), 1e-10);
      }
    } else {
      EXPECT_NEAR(single_marginal_logpdf(0.7, p), log_pdf(Vector::Constant(1, 0.7), p), 1e-12);
    }
  }
}

TEST(Democratic, LeaveOneOutMatchesGeneralMarginal) {
  for (auto s : settings()) {
    if (s.n < 2) continue;
    const DemocraticParams p(s.n, s.lam);
    for (unsigned seed = 1; seed <= 10; ++seed) {
      const Vector xr = random_vec(s.n - 1, 3.0 / s.lam, seed);
      EXPECT_NEAR(leave_one_out_logpdf(xr, p), marginal_logpdf(xr, 1, p), 1e-10);
    }
  }
}

TEST(Democratic, ConditionalMixtureIntegratesAndMatchesJointSlice) {
  for (auto s : settings()) {
    if (s.n < 2) continue;
    const DemocraticParams p(s.n, s.lam);
    for (unsigned seed = 1; seed <= 10; ++seed) {
      const Vector rest = random_vec(s.n - 1, 2.0 / s.lam, seed);
      const double m = linf_norm(rest);
      const auto mix = conditional_mixture_prior(rest, p);
      const double r = m + radius(s.lam);
      const double z = oracle::integrate([&](double v) { return mix.pdf(v); }, -r, r, {-m, m});
      EXPECT_NEAR(z, 1.0, 1e-6);
      const double tv = oracle::grid_tv(
          [&](double v) { return mix.pdf(v); },
          [&](double v) {
            Vector full(static_cast<Eigen::Index>(s.n));
            full << v, rest;
            return log_pdf(full, p);
          },
          -(m + 40.0 / s.lam), m + 40.0 / s.lam);
      EXPECT_LT(tv, 1e-3);
      // P(cone) is the mass beyond +-m.
      const double tails = oracle::integrate([&](double v) { return mix.pdf(v); }, m, r) +
                           oracle::integrate([&](double v) { return mix.pdf(v); }, -r, -m);
      EXPECT_NEAR(tails, prob_cone_given_rest(rest, p), 1e-9);
      // and it equals 1 - (mass inside), computed from the joint
      const double inside = oracle::integrate(
          [&](double v) {
            Vector full(static_cast<Eigen::Index>(s.n));
            full << v, rest;
            return pdf(full, p);
          },
          -m, m);
      EXPECT_NEAR(1.0 - inside / std::exp(leave_one_out_logpdf(rest, p)), prob_cone_given_rest(rest, p), 1e-9);
    }
  }
}

TEST(Democratic, ConditionalAtZeroRestIsLaplace) {
  const DemocraticParams p(3, 2.0);
  const auto mix = conditional_mixture_prior(Vector::Zero(2), p);
  EXPECT_EQ(mix.weights()[1], 0.0);
  for (double v : {-1.0, 0.3, 2.5}) EXPECT_NEAR(mix.logpdf(v), std::log(1.0) - 2.0 * std::abs(v), 1e-12);
  RngStream rng(5);
  for (int i = 0; i < 1000; ++i) EXPECT_TRUE(std::isfinite(mix.sample(rng)));
}

TEST(Democratic, RestGivenNotConeIntegratesToOne) {
  for (auto s : settings()) {
    if (s.n < 2) continue;
    const DemocraticParams p(s.n, s.lam);
    const double z = integrate_symmetric(
        [&](const Vector& x) { return std::exp(rest_given_not_cone_logpdf(x, p)); },
        static_cast<int>(s.n - 1), radius(s.lam));
    EXPECT_NEAR(z, 1.0, 1e-6);
  }
}

TEST(Democratic, VarianceMatchesQuadrature) {
  for (auto s : settings()) {
    const DemocraticParams p(s.n, s.lam);
    const double v = integrate_symmetric([&](const Vector& x) { return x[0] * x[0] * pdf(x, p); },
                                         static_cast<int>(s.n), radius(s.lam));
    EXPECT_NEAR(v, moments(p).variance, 1e-6 * moments(p).variance);
  }
}

TEST(Democratic, LogPdfInvariantToPermutationAndSign) {
  const DemocraticParams p(5, 1.7);
  RngStream rng(9);
  for (int rep = 0; rep < 100; ++rep) {
    Vector x(5);
    for (auto& e : x) e = rng.normal();
    Vector y = x.reverse();
    y[2] = -y[2];
    std::swap(y[0], y[3]);
    EXPECT_EQ(log_pdf(x, p), log_pdf(y, p));
  }
}

TEST(Democratic, ConeIndexAndErrors) {
  Vector x(4);
  x << 0.5, -2.0, 2.0, 1.0;
  const auto c = cone_index(x);
  EXPECT_EQ(c.index, 1u);
  EXPECT_EQ(c.dominant_value, -2.0);
  EXPECT_THROW(cone_index(Vector::Zero(3)), std::domain_error);
  EXPECT_THROW(DemocraticParams(0, 1.0), std::invalid_argument);
  EXPECT_THROW(DemocraticParams(2, 0.0), std::invalid_argument);
  EXPECT_THROW(log_pdf(Vector::Zero(3), DemocraticParams(2, 1.0)), std::invalid_argument);
  EXPECT_THROW(marginal_logpdf(Vector::Zero(1), 0, DemocraticParams(2, 1.0)), std::invalid_argument);
}

TEST(Democratic, MixtureLogWeightsNormalized) {
  RngStream rng(21);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t n = 2 + rng.index(10);
    const DemocraticParams p(n, rng.uniform(0.1, 20.0));
    Vector rest(static_cast<Eigen::Index>(n - 1));
    for (auto& e : rest) e = rng.normal() * rng.uniform(0.0, 5.0);
    const auto mix = conditional_mixture_prior(rest, p);
    double sum = 0.0;
    for (double w : mix.weights()) sum += w;
    EXPECT_NEAR(sum, 1.0, 1e-12);
    EXPECT_NEAR(log_sum_exp(mix.log_weights()), 0.0, 1e-12);
  }
}
