#include "flr/gram.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "flr/errors.hpp"

namespace flr {

namespace {

constexpr double kPivotRelTol = 1e-12;

[[noreturn]] void throw_singular(std::size_t m) {
  std::ostringstream os;
  os << "empirical covariance block singular at m = " << m;
  throw singular_error(m, os.str());
}

double weighted_inv_norm_impl(const Matrix& lower, std::size_t m,
                              std::span<const double> omega) {
  // Form S = D^{1/2} K^{-1} D^{1/2} column by column via triangular solves,
  // symmetrize against roundoff, then take the top of the spectrum.
  std::vector<double> sqrt_w(m);
  for (std::size_t j = 0; j < m; ++j) {
    if (!(omega[j] > 0.0)) throw std::invalid_argument("weights must be positive");
    sqrt_w[j] = std::sqrt(omega[j]);
  }
  Matrix s(m, m);
  std::vector<double> col(m);
  for (std::size_t j = 0; j < m; ++j) {
    std::fill(col.begin(), col.end(), 0.0);
    col[j] = sqrt_w[j];
    forward_solve(lower, m, col);
    backward_solve(lower, m, col);
    for (std::size_t i = 0; i < m; ++i) s(i, j) = sqrt_w[i] * col[i];
  }
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) {
      const double v = 0.5 * (s(i, j) + s(j, i));
      s(i, j) = v;
      s(j, i) = v;
    }
  const std::vector<double> eig = jacobi_eigenvalues(std::move(s));
  return eig.back();
}

}  // namespace

NestedGram NestedGram::accumulate(const Sample& sample, std::size_t m_cap) {
  if (m_cap == 0) throw std::invalid_argument("m_cap must be >= 1");
  if (m_cap > sample.width) {
    std::ostringstream os;
    os << "m_cap = " << m_cap << " exceeds sample coefficient width "
       << sample.width;
    throw std::invalid_argument(os.str());
  }
  NestedGram g;
  g.n_ = sample.n;
  g.cov_ = Matrix(m_cap, m_cap);
  g.cross_.assign(m_cap, 0.0);
  const double inv_n = 1.0 / static_cast<double>(sample.n);
  for (std::size_t i = 0; i < sample.n; ++i) {
    const double* row = sample.x.data() + i * sample.width;
    const double yi = sample.y[i];
    g.sigma_y_sq_ += yi * yi;
    for (std::size_t j = 0; j < m_cap; ++j) {
      g.cross_[j] += yi * row[j];
      for (std::size_t k = j; k < m_cap; ++k) g.cov_(j, k) += row[j] * row[k];
    }
  }
  g.sigma_y_sq_ *= inv_n;
  for (std::size_t j = 0; j < m_cap; ++j) {
    g.cross_[j] *= inv_n;
    for (std::size_t k = j; k < m_cap; ++k) {
      g.cov_(j, k) *= inv_n;
      g.cov_(k, j) = g.cov_(j, k);
    }
  }
  g.chol_ = nested_cholesky(g.cov_, kPivotRelTol);
  return g;
}

double NestedGram::min_eigenvalue(std::size_t m) const {
  if (m == 0 || m > m_cap()) throw std::invalid_argument("min_eigenvalue: m out of range");
  Matrix block(m, m);
  double frob = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      block(i, j) = cov_(i, j);
      frob += block(i, j) * block(i, j);
    }
  const std::vector<double> eig = jacobi_eigenvalues(std::move(block));
  double lambda = eig.front();
  const double tol = 1e-12 * std::sqrt(frob);
  if (!nonsingular(m) && lambda <= tol) return 0.0;
  return lambda < 0.0 ? 0.0 : lambda;
}

double NestedGram::quad_form_g(std::size_t m) const {
  if (m == 0 || m > m_cap()) throw std::invalid_argument("quad_form_g: m out of range");
  if (!nonsingular(m)) throw_singular(m);
  // ||L^{-1} g||^2 equals g^t K^{-1} g and is nonnegative by construction.
  std::vector<double> y(cross_.begin(), cross_.begin() + m);
  forward_solve(chol_.lower, m, y);
  return dot(y, y);
}

std::vector<double> NestedGram::solve(std::size_t m, std::span<const double> rhs) const {
  if (m == 0 || m > m_cap()) throw std::invalid_argument("solve: m out of range");
  if (!nonsingular(m)) throw_singular(m);
  return spd_solve(chol_, m, rhs);
}

double NestedGram::weighted_inv_spectral_norm(std::size_t m,
                                              std::span<const double> omega) const {
  if (m == 0 || m > m_cap())
    throw std::invalid_argument("weighted_inv_spectral_norm: m out of range");
  if (!nonsingular(m)) throw_singular(m);
  if (omega.size() < m) throw std::invalid_argument("need at least m weights");
  return weighted_inv_norm_impl(chol_.lower, m, omega);
}

double weighted_inv_spectral_norm(const Matrix& spd, std::span<const double> omega) {
  const std::size_t m = spd.rows();
  if (m == 0 || omega.size() < m)
    throw std::invalid_argument("weighted_inv_spectral_norm: bad dimensions");
  const NestedCholesky chol = nested_cholesky(spd, kPivotRelTol);
  if (chol.ok_upto < m) {
    std::ostringstream os;
    os << "matrix block flagged singular at m = " << chol.failed_pivot;
    throw singular_error(chol.failed_pivot, os.str());
  }
  return weighted_inv_norm_impl(chol.lower, m, omega);
}

}  // namespace flr
