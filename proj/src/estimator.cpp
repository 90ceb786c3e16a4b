#include "flr/estimator.hpp"

#include <cmath>
#include <stdexcept>

namespace flr {

namespace {

double residual_norm(const NestedGram& gram, std::size_t m,
                     std::span<const double> x) {
  double sq = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    double r = gram.cross()[i];
    for (std::size_t j = 0; j < m; ++j) r -= gram.cov()(i, j) * x[j];
    sq += r * r;
  }
  return std::sqrt(sq);
}

}  // namespace

std::vector<double> galerkin_solve(const NestedGram& gram, std::size_t m) {
  std::vector<double> x =
      gram.solve(m, std::span<const double>(gram.cross().data(), m));
  const double bound =
      1e-10 * (1.0 + norm2(std::span<const double>(gram.cross().data(), m)));
  if (residual_norm(gram, m, x) > bound) {
    // One refinement step; the systems here are tiny and well inside the
    // threshold's conditioning bound, so this is already more than needed.
    std::vector<double> r(m);
    for (std::size_t i = 0; i < m; ++i) {
      r[i] = gram.cross()[i];
      for (std::size_t j = 0; j < m; ++j) r[i] -= gram.cov()(i, j) * x[j];
    }
    const std::vector<double> dx = gram.solve(m, r);
    for (std::size_t i = 0; i < m; ++i) x[i] += dx[i];
    if (residual_norm(gram, m, x) > bound)
      throw std::runtime_error("galerkin_solve: residual bound not met");
  }
  return x;
}

GalerkinEstimate threshold_estimate(const NestedGram& gram, std::size_t m) {
  GalerkinEstimate est;
  est.m = m;
  est.lambda_min = gram.min_eigenvalue(m);
  const double cutoff = 1.0 / static_cast<double>(gram.n());
  if (gram.nonsingular(m) && est.lambda_min >= cutoff) {
    est.coeffs = galerkin_solve(gram, m);
    est.thresholded = false;
  } else {
    est.coeffs.assign(m, 0.0);
    est.thresholded = true;
  }
  return est;
}

double omega_risk_sq(const GalerkinEstimate& est, const SlopeSpec& truth,
                     const WeightConfig& config) {
  const std::size_t j_total = truth.truncation();
  if (est.m > j_total)
    throw std::invalid_argument("estimate dimension exceeds truth truncation");
  double sum = 0.0;
  for (std::size_t j = 1; j <= j_total; ++j) {
    const double diff =
        (j <= est.m ? est.coeffs[j - 1] : 0.0) - truth.coeffs[j - 1];
    if (diff == 0.0) continue;
    sum += weight_at(config, Seq::Omega, j) * diff * diff;
  }
  return sum;
}

}  // namespace flr
