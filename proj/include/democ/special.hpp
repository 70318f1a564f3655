#pragma once

// Log-domain helpers for normal tail masses and mixture weights.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>

namespace democ {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kPosInf = std::numeric_limits<double>::infinity();

inline double log_sum_exp(std::span<const double> v) {
  double hi = kNegInf;
  for (double a : v) hi = std::max(hi, a);
  if (hi == kNegInf || !std::isfinite(hi)) return hi;
  double acc = 0.0;
  for (double a : v) acc += std::exp(a - hi);
  return hi + std::log(acc);
}

/// log(1 - exp(a)) for a <= 0.
inline double log1mexp(double a) {
  if (a > -std::numbers::ln2) return std::log(-std::expm1(a));
  return std::log1p(-std::exp(a));
}

/// log of the standard normal density.
inline double log_normal_pdf(double z) {
  return -0.5 * z * z - 0.5 * std::log(2.0 * std::numbers::pi);
}

/// log Phi(z), accurate deep into the lower tail.
inline double log_normal_cdf(double z) {
  if (z == kNegInf) return kNegInf;
  if (z > 5.0) return std::log1p(-0.5 * std::erfc(z / std::numbers::sqrt2));
  if (z > -30.0) return std::log(0.5 * std::erfc(-z / std::numbers::sqrt2));
  // Asymptotic Mills-ratio expansion; five terms are exact to double precision here.
  const double w = 1.0 / (z * z);
  const double series = 1.0 - w * (1.0 - 3.0 * w * (1.0 - 5.0 * w * (1.0 - 7.0 * w)));
  return log_normal_pdf(z) - std::log(-z) + std::log(series);
}

/// log(1 - Phi(z)).
inline double log_normal_sf(double z) { return log_normal_cdf(-z); }

/// log P(lo < Z < hi) for a standard normal Z.
inline double log_normal_mass(double lo, double hi) {
  if (!(lo < hi)) return kNegInf;
  if (lo >= 0.0) {
    const double a = log_normal_sf(lo);
    const double b = log_normal_sf(hi);
    return a + log1mexp(b - a);
  }
  if (hi <= 0.0) {
    const double a = log_normal_cdf(hi);
    const double b = log_normal_cdf(lo);
    return a + log1mexp(b - a);
  }
  // Interval straddles zero: the mass is at least min(Phi(hi), 1 - Phi(lo)) - 1/2.
  const double tails = 0.5 * std::erfc(hi / std::numbers::sqrt2) +
                       0.5 * std::erfc(-lo / std::numbers::sqrt2);
  return std::log1p(-tails);
}

}  // namespace democ
