#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

#include "democ/democratic.hpp"

namespace democ::harness {

struct Metrics {
  /// +inf on exact recovery; empty without a ground truth.
  std::optional<double> snr_x;
  double snr_y = 0.0;
  double papr = 0.0;
};

inline double snr_db(double signal_sq, double error_sq) {
  if (error_sq == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(signal_sq / error_sq);
}

inline double papr(VectorCRef x) {
  const double e = x.squaredNorm();
  if (!(e > 0.0)) throw std::domain_error("papr: zero vector");
  const double peak = linf_norm(x);
  return static_cast<double>(x.size()) * peak * peak / e;
}

inline Metrics evaluate_metrics(const std::optional<Vector>& x_true, VectorCRef x_hat, VectorCRef y,
                                const Matrix& h) {
  if (h.cols() != x_hat.size() || h.rows() != y.size())
    throw std::invalid_argument("evaluate_metrics: dimension mismatch");
  Metrics out;
  if (x_true) {
    if (x_true->size() != x_hat.size()) throw std::invalid_argument("evaluate_metrics: x_true size");
    out.snr_x = snr_db(x_true->squaredNorm(), (*x_true - x_hat).squaredNorm());
  }
  out.snr_y = snr_db(y.squaredNorm(), (y - h * x_hat).squaredNorm());
  out.papr = papr(x_hat);
  return out;
}

}  // namespace democ::harness
