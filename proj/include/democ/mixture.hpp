#pragma once

// Law of one coordinate given the others: a finite mixture of uniform,
// shifted-exponential and truncated-normal pieces on disjoint intervals.

#include <cmath>
#include <stdexcept>
#include <type_traits>
#include <variant>
#include <vector>

#include "democ/rng.hpp"
#include "democ/special.hpp"
#include "democ/truncated_normal.hpp"

namespace democ {

struct UniformPiece {
  double lo;
  double hi;
};

/// Exponential with the given rate, shifted to start at |x| = shift, on one side
/// of the origin: (shift, inf) when side > 0, (-inf, -shift) otherwise.
struct ExpTailPiece {
  double shift;
  double rate;
  int side;
};

struct TruncNormalPiece {
  double mean;
  double var;
  double lo;
  double hi;
};

using MixturePiece = std::variant<UniformPiece, ExpTailPiece, TruncNormalPiece>;

inline double piece_logpdf(const MixturePiece& piece, double x) {
  return std::visit(
      [x](const auto& p) -> double {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, UniformPiece>) {
          return (x > p.lo && x < p.hi) ? -std::log(p.hi - p.lo) : kNegInf;
        } else if constexpr (std::is_same_v<T, ExpTailPiece>) {
          const double t = p.side > 0 ? x - p.shift : -x - p.shift;
          return t > 0.0 ? std::log(p.rate) - p.rate * t : kNegInf;
        } else {
          return truncated_normal_logpdf(x, p.mean, p.var, p.lo, p.hi);
        }
      },
      piece);
}

inline double piece_sample(const MixturePiece& piece, RngStream& rng) {
  return std::visit(
      [&rng](const auto& p) -> double {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, UniformPiece>) {
          return rng.uniform(p.lo, p.hi);
        } else if constexpr (std::is_same_v<T, ExpTailPiece>) {
          const double mag = p.shift + rng.exponential(p.rate);
          return p.side > 0 ? mag : -mag;
        } else {
          return sample_truncated_normal(p.mean, p.var, p.lo, p.hi, rng);
        }
      },
      piece);
}

class ConditionalMixture {
 public:
  ConditionalMixture() = default;

  /// Builds from unnormalized log-weights. Pieces with log-weight -inf are kept
  /// (so indices stay stable) but are never sampled.
  ConditionalMixture(std::vector<MixturePiece> pieces, std::vector<double> log_weights)
      : pieces_(std::move(pieces)), log_weights_(std::move(log_weights)) {
    if (pieces_.size() != log_weights_.size() || pieces_.empty())
      throw std::invalid_argument("ConditionalMixture: pieces/weights size mismatch");
    const double total = log_sum_exp(log_weights_);
    if (!std::isfinite(total)) throw std::domain_error("ConditionalMixture: degenerate weights");
    weights_.resize(log_weights_.size());
    for (std::size_t k = 0; k < log_weights_.size(); ++k) {
      log_weights_[k] -= total;
      weights_[k] = std::exp(log_weights_[k]);
    }
  }

  std::size_t size() const { return pieces_.size(); }
  const std::vector<MixturePiece>& pieces() const { return pieces_; }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<double>& log_weights() const { return log_weights_; }

  double logpdf(double x) const {
    std::vector<double> terms;
    terms.reserve(pieces_.size());
    for (std::size_t k = 0; k < pieces_.size(); ++k) {
      if (log_weights_[k] == kNegInf) continue;
      terms.push_back(log_weights_[k] + piece_logpdf(pieces_[k], x));
    }
    return log_sum_exp(terms);
  }

  double pdf(double x) const { return std::exp(logpdf(x)); }

  /// Categorical draw of the piece, then a draw from it.
  double sample(RngStream& rng) const { return piece_sample(pieces_[pick(rng)], rng); }

  std::size_t pick(RngStream& rng) const {
    double u = rng.uniform();
    std::size_t last = 0;
    for (std::size_t k = 0; k < weights_.size(); ++k) {
      if (weights_[k] <= 0.0) continue;
      last = k;
      if (u < weights_[k]) return k;
      u -= weights_[k];
    }
    return last;
  }

 private:
  std::vector<MixturePiece> pieces_;
  std::vector<double> log_weights_;
  std::vector<double> weights_;
};

}  // namespace democ
