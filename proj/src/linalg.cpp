#include "flr/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace flr {

NestedCholesky nested_cholesky(const Matrix& a, double rel_tol) {
  const std::size_t n = a.rows();
  NestedCholesky out;
  out.lower = Matrix(n, n);
  double max_diag = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    max_diag = std::max(max_diag, a(k, k));
    // Row k of the factor; entries left of the pivot first.
    for (std::size_t j = 0; j < k; ++j) {
      double s = a(k, j);
      for (std::size_t i = 0; i < j; ++i) s -= out.lower(k, i) * out.lower(j, i);
      out.lower(k, j) = s / out.lower(j, j);
    }
    double pivot = a(k, k);
    for (std::size_t i = 0; i < k; ++i) pivot -= out.lower(k, i) * out.lower(k, i);
    if (!(pivot > rel_tol * max_diag)) {
      out.failed_pivot = k + 1;
      return out;
    }
    out.lower(k, k) = std::sqrt(pivot);
    out.ok_upto = k + 1;
  }
  return out;
}

void forward_solve(const Matrix& lower, std::size_t m, std::span<double> x) {
  for (std::size_t i = 0; i < m; ++i) {
    double s = x[i];
    for (std::size_t j = 0; j < i; ++j) s -= lower(i, j) * x[j];
    x[i] = s / lower(i, i);
  }
}

void backward_solve(const Matrix& lower, std::size_t m, std::span<double> x) {
  for (std::size_t ii = m; ii-- > 0;) {
    double s = x[ii];
    for (std::size_t j = ii + 1; j < m; ++j) s -= lower(j, ii) * x[j];
    x[ii] = s / lower(ii, ii);
  }
}

std::vector<double> spd_solve(const NestedCholesky& chol, std::size_t m,
                              std::span<const double> rhs) {
  if (m > chol.ok_upto) throw std::invalid_argument("spd_solve beyond factorized prefix");
  std::vector<double> x(rhs.begin(), rhs.begin() + m);
  forward_solve(chol.lower, m, x);
  backward_solve(chol.lower, m, x);
  return x;
}

std::vector<double> jacobi_eigenvalues(Matrix a, double rel_tol, int max_sweeps) {
  const std::size_t n = a.rows();
  if (n == 0) return {};
  if (n == 1) return {a(0, 0)};

  double frob = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) frob += a(i, j) * a(i, j);
  frob = std::sqrt(frob);
  const double threshold = rel_tol * frob;

  auto max_offdiag = [&]() {
    double m = 0.0;
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) m = std::max(m, std::abs(a(p, q)));
    return m;
  };

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    if (max_offdiag() <= threshold) {
      std::vector<double> eig(n);
      for (std::size_t i = 0; i < n; ++i) eig[i] = a(i, i);
      std::sort(eig.begin(), eig.end());
      return eig;
    }
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) <= threshold) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        const double tau = s / (1.0 + c);
        const double app = a(p, p);
        const double aqq = a(q, q);
        a(p, p) = app - t * apq;
        a(q, q) = aqq + t * apq;
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          if (i == p || i == q) continue;
          const double aip = a(i, p);
          const double aiq = a(i, q);
          a(i, p) = aip - s * (aiq + tau * aip);
          a(p, i) = a(i, p);
          a(i, q) = aiq + s * (aip - tau * aiq);
          a(q, i) = a(i, q);
        }
      }
    }
  }
  if (max_offdiag() <= threshold) {
    std::vector<double> eig(n);
    for (std::size_t i = 0; i < n; ++i) eig[i] = a(i, i);
    std::sort(eig.begin(), eig.end());
    return eig;
  }
  throw std::runtime_error("jacobi_eigenvalues: no convergence within sweep limit");
}

std::vector<double> mat_vec(const Matrix& a, std::size_t m,
                            std::span<const double> x) {
  std::vector<double> y(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < m; ++j) s += a(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

double dot(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

double norm2(std::span<const double> x) { return std::sqrt(dot(x, x)); }

}  // namespace flr
