#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <utility>

#include "democ/democratic.hpp"

namespace democ {

/// Linear Gaussian inverse problem y = H x + e with a Gamma(a, b) hyperprior on
/// the democratic scale mu (lambda = N mu). Immutable once built.
class CodingProblem {
 public:
  CodingProblem(Vector y, Matrix h, double hyper_a = 1e-3, double hyper_b = 1e-3)
      : y_(std::move(y)), h_(std::move(h)), hyper_a_(hyper_a), hyper_b_(hyper_b) {
    if (h_.rows() < 1 || h_.cols() < 1) throw std::invalid_argument("CodingProblem: empty H");
    if (y_.size() != h_.rows()) throw std::invalid_argument("CodingProblem: y/H row mismatch");
    if (!(hyper_a_ > 0.0) || !(hyper_b_ > 0.0))
      throw std::invalid_argument("CodingProblem: hyperparameters must be > 0");
    col_sq_norms_ = h_.colwise().squaredNorm().transpose();
    if ((col_sq_norms_.array() <= 0.0).any())
      throw std::invalid_argument("CodingProblem: H has an all-zero column");
  }

  const Vector& y() const { return y_; }
  const Matrix& h() const { return h_; }
  double hyper_a() const { return hyper_a_; }
  double hyper_b() const { return hyper_b_; }
  Eigen::Index m() const { return h_.rows(); }
  Eigen::Index n() const { return h_.cols(); }
  /// ||h_n||^2 for every column.
  const Vector& col_sq_norms() const { return col_sq_norms_; }

  Vector residual(VectorCRef x) const {
    check_dim(x, static_cast<std::size_t>(n()), "CodingProblem::residual");
    return y_ - h_ * x;
  }

 private:
  Vector y_;
  Matrix h_;
  double hyper_a_;
  double hyper_b_;
  Vector col_sq_norms_;
};

}  // namespace democ
