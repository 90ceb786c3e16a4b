#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "flr/datagen.hpp"
#include "flr/linalg.hpp"

namespace flr {

/// Empirical second-order statistics of a sample, with factorizations of
/// every leading principal submatrix of the covariance matrix. Immutable
/// after accumulate(); all queries are read-only and safe to run
/// concurrently.
class NestedGram {
 public:
  /// One pass over the sample: cov (i,j) = n^{-1} sum_i X_ij X_ik,
  /// cross j = n^{-1} sum_i Y_i X_ij, sigma_y_sq = n^{-1} sum_i Y_i^2,
  /// followed by the incremental Cholesky over m = 1..m_cap.
  static NestedGram accumulate(const Sample& sample, std::size_t m_cap);

  std::size_t m_cap() const { return cov_.rows(); }
  std::size_t n() const { return n_; }
  double sigma_y_sq() const { return sigma_y_sq_; }
  const Matrix& cov() const { return cov_; }
  std::span<const double> cross() const { return cross_; }

  /// Largest m whose leading block factorized; the first failing pivot
  /// index (0 when all succeeded).
  std::size_t factor_ok_upto() const { return chol_.ok_upto; }
  std::size_t failed_pivot() const { return chol_.failed_pivot; }
  bool nonsingular(std::size_t m) const { return m <= chol_.ok_upto; }

  /// Smallest eigenvalue of the leading m x m block by cyclic Jacobi;
  /// clamped to 0 when the factorization flagged the block singular and
  /// Jacobi confirms it below tolerance.
  double min_eigenvalue(std::size_t m) const;

  /// cross_m^t [cov]_m^{-1} cross_m; throws singular_error when the block
  /// is singular.
  double quad_form_g(std::size_t m) const;

  /// Solve [cov]_m x = rhs through the stored factor.
  std::vector<double> solve(std::size_t m, std::span<const double> rhs) const;

  /// Largest eigenvalue of D^{1/2} [cov]_m^{-1} D^{1/2} with D =
  /// diag(omega_1..omega_m).
  double weighted_inv_spectral_norm(std::size_t m, std::span<const double> omega) const;

 private:
  Matrix cov_;
  std::vector<double> cross_;
  double sigma_y_sq_ = 0.0;
  std::size_t n_ = 0;
  NestedCholesky chol_;
};

/// Same weighted inverse norm for an arbitrary SPD matrix (the theory
/// machinery applies it to population covariance blocks).
double weighted_inv_spectral_norm(const Matrix& spd, std::span<const double> omega);

}  // namespace flr
