#pragma once

// Closed-form calculus of the democratic distribution D_N(lambda), the law with
// density exp(-lambda * ||x||_inf) / C_N(lambda) on R^N, C_N = N! (2 / lambda)^N.
//
// Everything is returned in log-domain; the binomial sums of the marginals and
// the normalizing constant overflow quickly otherwise.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "democ/mixture.hpp"
#include "democ/special.hpp"

namespace democ {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using VectorCRef = Eigen::Ref<const Vector>;

class DemocraticParams {
 public:
  DemocraticParams(std::size_t dim, double rate) : dim_(dim), rate_(rate) {
    if (dim_ < 1) throw std::invalid_argument("DemocraticParams: dimension must be >= 1");
    if (!(rate_ > 0.0) || !std::isfinite(rate_))
      throw std::invalid_argument("DemocraticParams: rate must be positive and finite");
  }

  /// lambda = N * mu, the dimension-scaled parametrization of the coder prior.
  static DemocraticParams from_hyper(std::size_t dim, double mu) {
    return DemocraticParams(dim, static_cast<double>(dim) * mu);
  }

  std::size_t dim() const { return dim_; }
  double rate() const { return rate_; }

 private:
  std::size_t dim_;
  double rate_;
};

/// Symmetric extension of Gamma(shape, rate) to the real line.
struct DoubleGammaParams {
  double shape;
  double rate;

  DoubleGammaParams(double a, double b) : shape(a), rate(b) {
    if (!(a > 0.0) || !(b > 0.0))
      throw std::invalid_argument("DoubleGammaParams: shape and rate must be > 0");
  }

  double logpdf(double x) const {
    const double ax = std::abs(x);
    if (ax == 0.0 && shape < 1.0) return kPosInf;
    if (ax == 0.0 && shape > 1.0) return kNegInf;
    const double logx = ax == 0.0 ? 0.0 : std::log(ax);
    return shape * std::log(rate) - std::lgamma(shape) - std::numbers::ln2 +
           (shape - 1.0) * logx - rate * ax;
  }
};

/// Zero-based index of the dominant coordinate and its signed value.
struct ConeIndex {
  std::size_t index;
  double dominant_value;
};

struct DemocraticMoments {
  Vector mean;
  double variance;
  double covariance;
};

inline double linf_norm(VectorCRef x) {
  return x.size() == 0 ? 0.0 : x.cwiseAbs().maxCoeff();
}

inline void check_dim(VectorCRef x, std::size_t expected, const char* what) {
  if (static_cast<std::size_t>(x.size()) != expected)
    throw std::invalid_argument(std::string(what) + ": dimension mismatch");
}

/// log C_N(lambda) = log N! + N log(2 / lambda).
inline double log_norm_const(const DemocraticParams& p) {
  const double n = static_cast<double>(p.dim());
  return std::lgamma(n + 1.0) + n * std::log(2.0 / p.rate());
}

inline double log_pdf(VectorCRef x, const DemocraticParams& p) {
  check_dim(x, p.dim(), "log_pdf");
  return -p.rate() * linf_norm(x) - log_norm_const(p);
}

inline double pdf(VectorCRef x, const DemocraticParams& p) { return std::exp(log_pdf(x, p)); }

inline DemocraticMoments moments(const DemocraticParams& p) {
  const double n = static_cast<double>(p.dim());
  const double lam = p.rate();
  return {Vector::Zero(static_cast<Eigen::Index>(p.dim())), (n + 1.0) * (n + 2.0) / (3.0 * lam * lam),
          0.0};
}

/// Density of the sub-vector left after removing `removed` coordinates (any
/// `removed` of them, by exchangeability).
inline double marginal_logpdf(VectorCRef x_keep, std::size_t removed, const DemocraticParams& p) {
  if (removed == 0 || removed >= p.dim())
    throw std::invalid_argument("marginal_logpdf: removed count must lie in (0, N)");
  check_dim(x_keep, p.dim() - removed, "marginal_logpdf");
  const double lam = p.rate();
  const double m = linf_norm(x_keep);
  const std::size_t big_j = removed;
  const double log_jfact = std::lgamma(static_cast<double>(big_j) + 1.0);
  std::vector<double> terms;
  terms.reserve(big_j + 1);
  // binom(J, j) (J - j)! = J! / j!
  for (std::size_t j = 0; j <= big_j; ++j) {
    if (j > 0 && m == 0.0) break;
    const double dj = static_cast<double>(j);
    const double log_m_pow = j == 0 ? 0.0 : dj * std::log(m);
    terms.push_back(log_jfact - std::lgamma(dj + 1.0) -
                    static_cast<double>(big_j - j) * std::log(lam) + log_m_pow);
  }
  return static_cast<double>(big_j) * std::numbers::ln2 - log_norm_const(p) + log_sum_exp(terms) -
         lam * m;
}

/// Marginal of a single coordinate: the equal-weight mixture of dG(j, lambda), j = 1..N.
inline double single_marginal_logpdf(double x, const DemocraticParams& p) {
  std::vector<double> terms;
  terms.reserve(p.dim());
  for (std::size_t j = 1; j <= p.dim(); ++j)
    terms.push_back(DoubleGammaParams(static_cast<double>(j), p.rate()).logpdf(x));
  return log_sum_exp(terms) - std::log(static_cast<double>(p.dim()));
}

/// Marginal of x with one coordinate removed: (1 + lambda m) exp(-lambda m) / (N C_{N-1}).
inline double leave_one_out_logpdf(VectorCRef x_rest, const DemocraticParams& p) {
  if (p.dim() < 2) throw std::invalid_argument("leave_one_out_logpdf: needs N >= 2");
  check_dim(x_rest, p.dim() - 1, "leave_one_out_logpdf");
  const double m = linf_norm(x_rest);
  const DemocraticParams sub(p.dim() - 1, p.rate());
  return std::log1p(p.rate() * m) - p.rate() * m - std::log(static_cast<double>(p.dim())) -
         log_norm_const(sub);
}

/// Index of the dominant coordinate; exact ties go to the lowest index.
inline ConeIndex cone_index(VectorCRef x) {
  if (x.size() == 0) throw std::invalid_argument("cone_index: empty vector");
  Eigen::Index best = 0;
  double best_abs = std::abs(x[0]);
  for (Eigen::Index i = 1; i < x.size(); ++i) {
    if (std::abs(x[i]) > best_abs) {
      best_abs = std::abs(x[i]);
      best = i;
    }
  }
  if (best_abs == 0.0) throw std::domain_error("cone_index: all-zero vector has no dominant cone");
  return {static_cast<std::size_t>(best), x[best]};
}

/// The dominant coordinate given its cone follows dG(N, lambda).
inline DoubleGammaParams dominant_given_cone_law(const DemocraticParams& p) {
  return {static_cast<double>(p.dim()), p.rate()};
}

/// P[x in C_n | x_{\n}] = 1 / (1 + lambda ||x_{\n}||_inf).
inline double prob_cone_given_rest(VectorCRef x_rest, const DemocraticParams& p) {
  check_dim(x_rest, p.dim() - 1, "prob_cone_given_rest");
  return 1.0 / (1.0 + p.rate() * linf_norm(x_rest));
}

/// Density of x_{\n} given that coordinate n is not dominant.
inline double rest_given_not_cone_logpdf(VectorCRef x_rest, const DemocraticParams& p) {
  if (p.dim() < 2) throw std::invalid_argument("rest_given_not_cone_logpdf: needs N >= 2");
  check_dim(x_rest, p.dim() - 1, "rest_given_not_cone_logpdf");
  const double m = linf_norm(x_rest);
  if (m == 0.0) return kNegInf;
  const DemocraticParams sub(p.dim() - 1, p.rate());
  return std::log(p.rate() / static_cast<double>(p.dim() - 1)) + std::log(m) -
         log_norm_const(sub) - p.rate() * m;
}

/// Law of x_n given the other coordinates: uniform on (-m, m) with weight 1 - c
/// and two exponential tails of rate lambda beyond +-m with weight c / 2 each.
/// With m = 0 the uniform piece carries zero weight and the law is Laplace(lambda).
inline ConditionalMixture conditional_mixture_prior(VectorCRef x_rest, const DemocraticParams& p) {
  check_dim(x_rest, p.dim() - 1, "conditional_mixture_prior");
  const double m = linf_norm(x_rest);
  const double lam = p.rate();
  // log c = -log1p(lam m), log(1 - c) = log(lam m) - log1p(lam m)
  const double log_c = -std::log1p(lam * m);
  const double log_uniform = m > 0.0 ? std::log(lam * m) + log_c : kNegInf;
  const double log_tail = log_c - std::numbers::ln2;
  std::vector<MixturePiece> pieces{ExpTailPiece{m, lam, -1},
                                   UniformPiece{-m, m},
                                   ExpTailPiece{m, lam, +1}};
  return ConditionalMixture(std::move(pieces), {log_tail, log_uniform, log_tail});
}

}  // namespace democ
