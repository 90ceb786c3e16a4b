#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "flr/linalg.hpp"
#include "flr/sequences.hpp"

namespace flr {

/// Mean-zero unit-variance laws for the error term and the regressor
/// coordinates. All three satisfy the moment bounds the selection rule's
/// constants assume (Gaussian additionally the joint-normal assumption).
enum class Law { Gaussian, ScaledUniform, ScaledLaplace };

/// Truncated slope coefficient vector, a member of the ellipsoid
/// {h : sum b_j [h]_j^2 <= r} of its companion WeightConfig.
struct SlopeSpec {
  std::vector<double> coeffs;
  std::string note;        // how it was generated
  double b_norm_sq = 0.0;  // sum b_j coeffs_j^2 at construction

  std::size_t truncation() const { return coeffs.size(); }
};

enum class SlopeProfile { SmoothPoly, Analytic };

/// Givens rotation mixing coordinates i < j (1-based) by angle theta.
struct GivensRotation {
  std::size_t i = 1;
  std::size_t j = 2;
  double theta = 0.0;
};

/// Covariance operator on the first J coordinates: eigenvalues lambda
/// conjugated by an orthogonal mixing Q (a product of Givens rotations),
/// so [Gamma] = Q diag(lambda) Q^t. Empty mixing keeps Gamma diagonal in
/// the computation basis, in which case the population Galerkin solution
/// is plain truncation -- the diagonal oracle the tests lean on.
struct CovSpec {
  std::vector<double> eigenvalues;
  std::vector<GivensRotation> mixing;
  double d_factor = 1.0;  // class membership factor measured on basis vectors
  Law regressor_law = Law::Gaussian;

  std::size_t truncation() const { return eigenvalues.size(); }
  bool diagonal() const { return mixing.empty(); }
};

struct NoiseSpec {
  Law law = Law::Gaussian;
  double sigma = 1.0;  // >= 0; zero admitted for noiseless oracle checks
};

/// n observations: responses and regressor coefficient rows [X_i]_j,
/// j = 1..width, stored row-major.
struct Sample {
  std::size_t n = 0;
  std::size_t width = 0;
  std::vector<double> y;
  std::vector<double> x;

  double xc(std::size_t i, std::size_t j) const { return x[i * width + j]; }
  std::span<const double> row(std::size_t i) const {
    return {x.data() + i * width, width};
  }
};

/// Slope with coefficients c * j^{-p-1} (SmoothPoly) or c * exp(-j)
/// (Analytic), with c normalizing the truncated b-norm to 0.9 r. Throws
/// std::invalid_argument when the profile cannot be normalized (the
/// truncated norm overflows for exp-family b).
SlopeSpec make_slope(const WeightConfig& config, SlopeProfile profile, std::size_t j_total);

/// User coefficients, validated against the ellipsoid (sum b_j c_j^2 <= r).
SlopeSpec make_slope_custom(const WeightConfig& config, std::vector<double> coeffs,
                            std::string note = "custom");

/// Diagonal covariance lambda_j = gamma_j (d_factor = 1).
CovSpec make_cov_diagonal(const WeightConfig& config, std::size_t j_total,
                          Law regressor_law = Law::Gaussian);

/// Rotated covariance Q diag(gamma) Q^t. The membership factor is measured
/// on basis vectors (max_j of ||Gamma e_j|| / gamma_j and its inverse) and
/// must not exceed declared_d.
CovSpec make_cov_mixed(const WeightConfig& config, std::size_t j_total,
                       std::vector<GivensRotation> mixing, double declared_d,
                       Law regressor_law = Law::Gaussian);

/// Leading m x m block of [Gamma].
Matrix cov_matrix(const CovSpec& cov, std::size_t m);

/// Gamma v over the full truncation.
std::vector<double> cov_apply(const CovSpec& cov, std::span<const double> v);

/// Draws Y_i = <beta, X_i> + sigma eps_i with X_i = Q (sqrt(lambda_j) Z_ij)
/// and eps independent of X. Deterministic given the seed.
Sample draw_sample(const SlopeSpec& slope, const CovSpec& cov, const NoiseSpec& noise,
                   std::size_t n, std::uint64_t seed);

/// Reads curves (first row = grid points, then one curve per row) and a
/// single-column "y" responses file, projects every curve to m_project
/// coefficients and centers the responses by their mean.
Sample load_sample(const std::string& curves_path, const std::string& responses_path,
                   std::size_t m_project);

/// Upper bound on the fraction of Var(Y) carried by coordinates beyond the
/// truncation, had the slope profile and eigenvalue decay continued past
/// it. Study setup requires this below 1e-6.
double truncation_tail_bound(const SlopeSpec& slope, const CovSpec& cov,
                             const NoiseSpec& noise, const WeightConfig& config);

}  // namespace flr
