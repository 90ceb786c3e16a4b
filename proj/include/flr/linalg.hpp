#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace flr {

/// Dense row-major matrix. Dimensions stay small (the selection machinery
/// never exceeds floor(n^{1/4})), so everything downstream is O(m^3) dense.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), a_(rows * cols, fill) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

  std::span<const double> data() const { return a_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> a_;
};

/// Factorizations of every leading principal submatrix of a symmetric
/// matrix, built in one pass: the leading m x m block of `lower` is the
/// Cholesky factor of [A]_m for every m <= ok_upto. A pivot below
/// rel_tol * (max diagonal entry seen so far) flags [A]_m singular at
/// m = failed_pivot, and every larger submatrix with it.
struct NestedCholesky {
  Matrix lower;
  std::size_t ok_upto = 0;
  std::size_t failed_pivot = 0;  // 0 = all leading blocks factorized
};

NestedCholesky nested_cholesky(const Matrix& a, double rel_tol = 1e-12);

/// In-place triangular solves against the leading m x m block of `lower`.
void forward_solve(const Matrix& lower, std::size_t m, std::span<double> x);
void backward_solve(const Matrix& lower, std::size_t m, std::span<double> x);

/// Solve [A]_m x = rhs through the nested factor. Requires m <= ok_upto.
std::vector<double> spd_solve(const NestedCholesky& chol, std::size_t m,
                              std::span<const double> rhs);

/// All eigenvalues (ascending) of a symmetric matrix by cyclic Jacobi
/// sweeps. Converged when every off-diagonal entry is at most
/// rel_tol * ||A||_F; throws std::runtime_error if max_sweeps sweeps do
/// not get there (never observed for the dimensions used here).
std::vector<double> jacobi_eigenvalues(Matrix a, double rel_tol = 1e-12,
                                       int max_sweeps = 64);

/// y = [A]_m x on the leading block.
std::vector<double> mat_vec(const Matrix& a, std::size_t m,
                            std::span<const double> x);

double dot(std::span<const double> x, std::span<const double> y);
double norm2(std::span<const double> x);

}  // namespace flr
