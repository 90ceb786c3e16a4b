#pragma once

#include <cstddef>
#include <vector>

#include "flr/gram.hpp"
#include "flr/sequences.hpp"

namespace flr {

/// Galerkin solution at dimension m, zeroed out when the empirical
/// covariance block is singular or its smallest eigenvalue falls below
/// 1/n. thresholded == true exactly when the coefficients are all zero.
struct GalerkinEstimate {
  std::size_t m = 0;
  std::vector<double> coeffs;
  bool thresholded = false;
  double lambda_min = 0.0;  // diagnostic
};

/// Solves [cov]_m x = cross_m through the stored factorization, with one
/// refinement pass keeping the residual below 1e-10 (1 + ||cross||).
/// Throws singular_error when the block is singular.
std::vector<double> galerkin_solve(const NestedGram& gram, std::size_t m);

/// The thresholded projection estimator: the Galerkin solution when the
/// block is nonsingular with min eigenvalue >= 1/n, the zero vector
/// otherwise. Never throws for singular blocks.
GalerkinEstimate threshold_estimate(const NestedGram& gram, std::size_t m);

/// Squared omega-distance to the truth:
///   sum_{j<=m} omega_j (est_j - beta_j)^2 + sum_{m<j<=J} omega_j beta_j^2.
double omega_risk_sq(const GalerkinEstimate& est, const SlopeSpec& truth,
                     const WeightConfig& config);

}  // namespace flr
