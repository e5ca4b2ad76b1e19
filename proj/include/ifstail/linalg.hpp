#pragma once

#include <cmath>
#include <cstddef>
#include <limits>

#include <Eigen/Dense>

#include "ifstail/error.hpp"

namespace ifstail {

using Matrix = Eigen::MatrixXd;
using Point = Eigen::VectorXd;

inline constexpr std::size_t kMaxDimension = 64;

// Largest singular value, taken as sqrt of the top eigenvalue of the
// symmetric matrix A^T A.
inline double operator_norm(const Matrix &a) {
  if (a.size() == 0) {
    return 0.0;
  }
  if (a.rows() == 1 && a.cols() == 1) {
    return std::abs(a(0, 0));
  }
  const Matrix gram = a.transpose() * a;
  Eigen::SelfAdjointEigenSolver<Matrix> solver(gram, Eigen::EigenvaluesOnly);
  require(solver.info() == Eigen::Success, ErrorCode::NonConvergence,
          "eigen-decomposition of A^T A did not converge");
  const double top = solver.eigenvalues().maxCoeff();
  return std::sqrt(std::max(0.0, top));
}

/*
 * Running product M_1 M_2 ... M_n of square matrices, stored as
 * exp(log_scale) * product. Every `rescale_every` multiplications the product
 * is divided by its largest absolute entry and the factor moves into
 * log_scale, so products of thousands of factors stay representable.
 */
class ScaledProduct {
 public:
  explicit ScaledProduct(Eigen::Index dim, int rescale_every = 32)
      : product_(Matrix::Identity(dim, dim)),
        scratch_(dim, dim),
        rescale_every_(rescale_every) {}

  void right_multiply(const Matrix &factor) {
    scratch_.noalias() = product_ * factor;
    product_.swap(scratch_);
    if (++since_rescale_ >= rescale_every_) {
      rescale();
    }
  }

  // log of the operator norm of the full product; -inf for a zero product.
  double log_norm() {
    rescale();
    if (zero_) {
      return -std::numeric_limits<double>::infinity();
    }
    return log_scale_ + std::log(operator_norm(product_));
  }

  double log_scale() const noexcept { return log_scale_; }

 private:
  void rescale() {
    since_rescale_ = 0;
    if (zero_) {
      return;
    }
    const double peak = product_.cwiseAbs().maxCoeff();
    require(std::isfinite(peak), ErrorCode::Overflow,
            "matrix product overflowed between rescalings");
    if (peak == 0.0) {
      zero_ = true;
      return;
    }
    product_ /= peak;
    log_scale_ += std::log(peak);
  }

  Matrix product_;
  Matrix scratch_;
  double log_scale_ = 0.0;
  int rescale_every_;
  int since_rescale_ = 0;
  bool zero_ = false;
};

}  // namespace ifstail
