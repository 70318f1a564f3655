#pragma once

// Goodness-of-fit: Kolmogorov-Smirnov (one and two sample), chi-square
// uniformity over categories, and a gamma check with Q-Q coordinates.

#include <boost/math/distributions/gamma.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace democ::harness {

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// P(K > t) for the Kolmogorov distribution.
inline double kolmogorov_sf(double t) {
  if (t <= 0.0) return 1.0;
  if (t < 0.2) return 1.0;  // series converges slowly here; the value is 1 to 1e-15
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * t * t);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-18) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

// Stephens' finite-sample correction.
inline double ks_p_value(double d, double en) {
  return kolmogorov_sf((en + 0.12 + 0.11 / en) * d);
}

inline TestResult ks_one_sample(std::vector<double> xs, const std::function<double(double)>& cdf) {
  if (xs.empty()) throw std::invalid_argument("ks_one_sample: empty sample");
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return {d, ks_p_value(d, std::sqrt(n))};
}

inline TestResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return {d, ks_p_value(d, std::sqrt(na * nb / (na + nb)))};
}

/// Pearson chi-square against equal cell probabilities.
inline TestResult chi_square_uniform(const std::vector<std::size_t>& counts) {
  if (counts.size() < 2) throw std::invalid_argument("chi_square_uniform: need >= 2 cells");
  double total = 0.0;
  for (auto c : counts) total += static_cast<double>(c);
  if (total == 0.0) throw std::invalid_argument("chi_square_uniform: no observations");
  const double expect = total / static_cast<double>(counts.size());
  double stat = 0.0;
  for (auto c : counts) stat += (static_cast<double>(c) - expect) * (static_cast<double>(c) - expect) / expect;
  const double df = static_cast<double>(counts.size() - 1);
  return {stat, boost::math::gamma_q(0.5 * df, 0.5 * stat)};
}

struct GammaGof {
  double ks_statistic = 0.0;
  double p_value = 1.0;
  /// (theoretical quantile, empirical quantile) at probabilities (i - 0.5) / n.
  std::vector<std::pair<double, double>> qq;
};

/// KS test of positive samples against Gamma(shape, rate), plus Q-Q points
/// (at most max_qq of them, evenly spread over the order statistics).
inline GammaGof gamma_gof(std::vector<double> samples, double shape, double rate,
                          std::size_t max_qq = 200) {
  if (samples.empty()) throw std::invalid_argument("gamma_gof: empty input");
  if (!(shape > 0.0) || !(rate > 0.0)) throw std::invalid_argument("gamma_gof: bad parameters");
  const boost::math::gamma_distribution<double> law(shape, 1.0 / rate);
  std::sort(samples.begin(), samples.end());
  const auto ks = ks_one_sample(samples, [&](double v) { return v <= 0.0 ? 0.0 : boost::math::cdf(law, v); });
  GammaGof out{ks.statistic, ks.p_value, {}};
  const std::size_t n = samples.size();
  const std::size_t count = std::min(n, std::max<std::size_t>(max_qq, 1));
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t i = count == 1 ? 0 : k * (n - 1) / (count - 1);
    const double prob = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    out.qq.emplace_back(boost::math::quantile(law, prob), samples[i]);
  }
  return out;
}

}  // namespace democ::harness
