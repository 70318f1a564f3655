#pragma once

// Exact rejection sampler for the normal law restricted to an interval.
// Proposal is picked per region: plain normal, uniform on narrow boxes, or a
// translated exponential (optimal rate) for tails far from the mean.

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

#include "democ/rng.hpp"
#include "democ/special.hpp"

namespace democ {

namespace detail {

// Standard normal restricted to [a, b] with 0 <= a < b (b may be +inf).
inline double std_truncnorm_right(double a, double b, RngStream& rng) {
  const double width = b - a;
  if (width <= 1.0 && a * width <= 1.0) {
    // Narrow box: density ratio exp((a^2 - z^2) / 2) >= e^{-3/2}.
    for (;;) {
      const double z = a + width * rng.uniform();
      if (std::log(rng.uniform()) <= 0.5 * (a * a - z * z)) return z;
    }
  }
  if (a < 0.5) {
    for (;;) {
      const double z = std::abs(rng.normal());
      if (z >= a && z <= b) return z;
    }
  }
  const double rate = 0.5 * (a + std::sqrt(a * a + 4.0));
  for (;;) {
    const double z = a + rng.exponential(rate);
    if (z > b) continue;
    const double d = z - rate;
    if (std::log(rng.uniform()) <= -0.5 * d * d) return z;
  }
}

inline double std_truncnorm(double a, double b, RngStream& rng) {
  if (a >= 0.0) return std_truncnorm_right(a, b, rng);
  if (b <= 0.0) return -std_truncnorm_right(-b, -a, rng);
  // Interval contains the mode.
  if (b - a >= 2.5) {
    for (;;) {
      const double z = rng.normal();
      if (z >= a && z <= b) return z;
    }
  }
  for (;;) {
    const double z = rng.uniform(a, b);
    if (std::log(rng.uniform()) <= -0.5 * z * z) return z;
  }
}

}  // namespace detail

/// Draw from N(mean, var) restricted to (lo, hi). Either bound may be infinite.
inline double sample_truncated_normal(double mean, double var, double lo, double hi,
                                      RngStream& rng) {
  if (!(var > 0.0)) throw std::invalid_argument("sample_truncated_normal: variance must be > 0");
  if (!(lo < hi)) throw std::invalid_argument("sample_truncated_normal: empty interval");
  const double sd = std::sqrt(var);
  const double a = (lo - mean) / sd;
  const double b = (hi - mean) / sd;
  double x = mean + sd * detail::std_truncnorm(a, b, rng);
  // Guard against rounding pushing a boundary draw outside the support.
  if (x <= lo) x = std::nextafter(lo, hi);
  if (x >= hi) x = std::nextafter(hi, lo);
  return x;
}

/// Log-density of N(mean, var) restricted to (lo, hi).
inline double truncated_normal_logpdf(double x, double mean, double var, double lo, double hi) {
  if (!(x > lo && x < hi)) return kNegInf;
  const double sd = std::sqrt(var);
  const double z = (x - mean) / sd;
  return log_normal_pdf(z) - std::log(sd) - log_normal_mass((lo - mean) / sd, (hi - mean) / sd);
}

}  // namespace democ
