#include <gtest/gtest.h>

#include <boost/math/distributions/gamma.hpp>

#include <cmath>
#include <limits>
#include <sstream>

#include "democ/harness/dct.hpp"
#include "democ/harness/geweke.hpp"
#include "democ/harness/gof.hpp"
#include "democ/harness/io.hpp"
#include "democ/harness/metrics.hpp"
#include "democ/harness/scenario.hpp"

using namespace democ;
using namespace democ::harness;

TEST(Dct, TightFrameAndDeterminism) {
  RngStream a(5), b(5), c(6);
  const Matrix full = build_dct_frame(16, 16, a);
  EXPECT_LT((full * full.transpose() - Matrix::Identity(16, 16)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((full.transpose() * full - Matrix::Identity(16, 16)).cwiseAbs().maxCoeff(), 1e-12);
  const Matrix h1 = build_dct_frame(50, 70, b);
  EXPECT_LT((h1 * h1.transpose() - Matrix::Identity(50, 50)).cwiseAbs().maxCoeff(), 1e-12);
  RngStream b2(5);
  EXPECT_EQ(build_dct_frame(50, 70, b2), h1);
  EXPECT_NE(build_dct_frame(50, 70, c), h1);
  EXPECT_THROW(build_dct_frame(5, 4, a), std::invalid_argument);
}

TEST(Metrics, DefinitionsAndMarkers) {
  const Vector flat = Vector::Constant(16, -0.25);
  EXPECT_NEAR(papr(flat), 1.0, 1e-15);
  Vector e1 = Vector::Zero(16);
  e1[0] = 1.0;
  EXPECT_NEAR(papr(e1), 16.0, 1e-15);
  EXPECT_THROW(papr(Vector::Zero(3)), std::domain_error);
  const Matrix h = Matrix::Identity(16, 16);
  const Vector y = flat + 0.01 * e1;
  const auto m = evaluate_metrics(Vector(flat), flat, y, h);
  ASSERT_TRUE(m.snr_x.has_value());
  EXPECT_TRUE(std::isinf(*m.snr_x));
  EXPECT_NEAR(m.snr_y, 10.0 * std::log10(y.squaredNorm() / 1e-4), 1e-9);
  EXPECT_FALSE(evaluate_metrics(std::nullopt, flat, y, h).snr_x.has_value());
}

TEST(Gof, KolmogorovTailValues) {
  // reference values of the Kolmogorov distribution
  EXPECT_NEAR(kolmogorov_sf(1.0), 0.26999967, 1e-7);
  EXPECT_NEAR(kolmogorov_sf(1.358), 0.05, 5e-4);
  EXPECT_NEAR(kolmogorov_sf(0.5), 0.96394524, 1e-7);
  EXPECT_EQ(kolmogorov_sf(0.0), 1.0);
}

TEST(Gof, GammaSelfConsistencyMismatchAndQq) {
  RngStream rng(1);
  std::vector<double> good, bad;
  for (int i = 0; i < 5000; ++i) {
    good.push_back(rng.gamma(3.0, 6.0));
    bad.push_back(rng.gamma(3.0, 1.0));
  }
  EXPECT_GT(gamma_gof(good, 3.0, 6.0).p_value, 0.01);
  EXPECT_LT(gamma_gof(bad, 3.0, 6.0).p_value, 0.001);
  const boost::math::gamma_distribution<double> law(3.0, 1.0 / 6.0);
  std::vector<double> exact;
  for (int i = 0; i < 400; ++i) exact.push_back(boost::math::quantile(law, (i + 0.5) / 400.0));
  const auto g = gamma_gof(exact, 3.0, 6.0);
  for (const auto& [t, e] : g.qq) EXPECT_NEAR(e, t, 0.02 * t);
  EXPECT_THROW(gamma_gof({}, 3.0, 6.0), std::invalid_argument);
}

TEST(Gof, TwoSampleAndChiSquare) {
  RngStream rng(2);
  std::vector<double> a, b, c;
  for (int i = 0; i < 4000; ++i) {
    a.push_back(rng.normal());
    b.push_back(rng.normal());
    c.push_back(rng.normal() + 0.3);
  }
  EXPECT_GT(ks_two_sample(a, b).p_value, 0.01);
  EXPECT_LT(ks_two_sample(a, c).p_value, 1e-6);
  EXPECT_GT(chi_square_uniform({100, 98, 105, 97}).p_value, 0.5);
  EXPECT_LT(chi_square_uniform({100, 10, 100, 100}).p_value, 1e-6);
  // 1 df: statistic 3.841 has p = 0.05; counts (60, 40) give statistic 4
  EXPECT_NEAR(chi_square_uniform({60, 40}).p_value, 0.0455, 1e-4);
}

TEST(Gof, ChiSquareErrors) {
  EXPECT_THROW(chi_square_uniform({5}), std::invalid_argument);
  EXPECT_THROW(chi_square_uniform({0, 0}), std::invalid_argument);
}

TEST(Geweke, ShortRunGibbsMatchesPrior) {
  RngStream rng(3);
  GewekeConfig cfg;
  cfg.iters = 10000;
  const auto run = geweke_run(cfg, rng);
  const auto rep = geweke_report(run, cfg.mu);
  EXPECT_GT(rep.dominant.p_value, 0.01);
  EXPECT_GT(rep.cones.p_value, 0.01);
}

TEST(Io, ShortestRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 1e308, 5e-324, 0.0, -0.0, 123456789.125}) {
    EXPECT_EQ(parse_double(format_double(v)), v);
  }
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_TRUE(std::isinf(parse_double("inf")));
  EXPECT_THROW(parse_double("1.5x"), std::invalid_argument);
}

TEST(Io, TableAndProblemRoundTrip) {
  RngStream rng(4);
  ProblemData p;
  p.h = build_dct_frame(3, 5, rng);
  p.y = Vector::Random(3);
  p.x_true = Vector::Random(5);
  p.header["seed"] = 4;
  std::stringstream ss;
  write_table(ss, problem_table(p));
  const auto back = problem_from_table(read_table(ss));
  EXPECT_EQ(back.h, p.h);
  EXPECT_EQ(back.y, p.y);
  ASSERT_TRUE(back.x_true.has_value());
  EXPECT_EQ(*back.x_true, *p.x_true);
  EXPECT_EQ(back.header["seed"], 4);

  std::vector<Vector> xs{Vector::Random(2), Vector::Random(2)};
  std::stringstream s2;
  write_table(s2, samples_table(xs, Json{{"kind", "chain"}}, {{"sigma2", {0.5, 0.25}}}));
  const auto t = read_table(s2);
  EXPECT_EQ(t.column("sigma2")[1], 0.25);
  const auto ys = samples_from_table(t);
  EXPECT_EQ(ys[1], xs[1]);
  std::stringstream bad("{}\na,b\n1,2,3\n");
  EXPECT_THROW(read_table(bad), std::runtime_error);
}

TEST(Io, ConfigHashStable) {
  const Json a{{"b", 1}, {"a", 2}};
  const Json b{{"a", 2}, {"b", 1}};
  EXPECT_EQ(config_hash(a), config_hash(b));
  EXPECT_EQ(fnv1a_hex(""), "cbf29ce484222325");
}

TEST(Scenario, ConfigJsonRoundTripAndReplay) {
  ScenarioConfig cfg = ScenarioConfig::toy();
  cfg.m = 8;
  cfg.n = 10;
  cfg.trials = 3;
  cfg.total_iters = 60;
  cfg.burn_in = 30;
  cfg.mh_moves = 3;
  cfg.bisection_steps = 8;
  cfg.fitra_max_iters = 50;
  const auto back = scenario_from_json(to_json(cfg));
  EXPECT_EQ(to_json(back), to_json(cfg));
  cfg.threads = 1;
  const auto r1 = run_scenario(cfg);
  cfg.threads = 3;
  const auto r2 = run_scenario(cfg);
  EXPECT_EQ(to_json(r1, false).dump(), to_json(r2, false).dump());
  for (const auto& t : r1.trials) {
    EXPECT_FALSE(t.error.has_value());
    // A large plug-in beta may shrink FITRA-1 to zero, where PAPR is undefined.
    for (const auto& [name, msg] : t.estimator_errors) {
      EXPECT_EQ(name, "fitra1");
      EXPECT_NE(msg.find("zero"), std::string::npos) << msg;
      EXPECT_FALSE(t.estimates.count(name));
    }
    for (const auto& [name, e] : t.estimates) {
      EXPECT_GE(e.metrics.papr, 1.0 - 1e-12) << name;
      EXPECT_LE(e.metrics.papr, 10.0 + 1e-12) << name;
    }
  }
  EXPECT_TRUE(r1.aggregate.count("fitra2"));
  EXPECT_THROW(scenario_from_json(Json{{"kinds", {"hmc"}}}), std::invalid_argument);
}

// Residuals grow with beta for exact minimizers; PAPR usually falls but is not
// monotone in general, so one inversion is tolerated.
TEST(Scenario, BetaPathTradeOff) {
  RngStream rng(9);
  ScenarioConfig cfg;
  cfg.m = 20;
  cfg.n = 28;
  const auto d = draw_trial_data(cfg, rng);
  const CodingProblem pb(d.y, d.h);
  const auto path = beta_path(pb, cfg, spectral_norm_sq(d.h), 21);
  int inversions = 0;
  for (std::size_t k = 1; k < path.size(); ++k) {
    if (path[k].papr > path[k - 1].papr + 1e-6) ++inversions;
    EXPECT_LE(path[k].snr_y, path[k - 1].snr_y + 1e-6);
  }
  EXPECT_LE(inversions, 1);
  EXPECT_GT(path.front().papr, 2.0 * path.back().papr);
}
