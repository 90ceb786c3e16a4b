#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "flr/datagen.hpp"
#include "flr/sequences.hpp"

namespace flr {

/// How a reported quantity with an infinite definition was obtained.
enum class Rigor { Exact, BoundedTail, TruncatedSup };

struct OracleDimension {
  std::size_t m_star = 1;
  double rate = 0.0;  // value of the bias/variance compromise at m_star
};

/// Smallest minimizer over 1..m_max of
///   max(omega_m / b_m, sum_{j<=m} omega_j / (n gamma_j)).
/// A minimizer sitting at m_max is inconclusive and throws.
OracleDimension oracle_mstar(std::size_t n, const WeightConfig& config,
                             std::size_t m_max);

struct DiamondQuantities {
  std::size_t lower_bound = 1;   // cutoff with a_m = 16 d^3 / gamma_m
  std::size_t upper_bound = 1;   // cutoff with a_m = 1 / (4 d gamma_m)
  std::size_t m_diamond = 1;     // penalty/bias compromise over 1..lower_bound
  double rate_diamond = 0.0;
};

DiamondQuantities diamond_quantities(std::size_t n, const WeightConfig& config);

/// log of Delta^gamma_m = max_{k<=m} omega_k / gamma_k, its log factor and
/// log dim factor; everything stays in logs because the exp families leave
/// double range almost immediately.
struct GammaTriplet {
  double log_norm_max = 0.0;
  double log_factor = 1.0;
  double log_dim_factor = 0.0;
};

GammaTriplet gamma_triplet(const WeightConfig& config, std::size_t m);

/// Upper bound for the summed eigenvalue weights: the truncated series
/// plus an integral-comparison tail for polynomial decay, a geometric tail
/// for exponential decay. Throws std::invalid_argument for non-summable
/// gamma.
double gamma_series_bound(const WeightConfig& config, std::size_t m_tail);

/// An upper bound for the class constant: the larger of the summed
/// eigenvalue weights and the damped norm series, both truncated at m_tail
/// with documented tail bounds (integral comparison for polynomial decay,
/// geometric for exponential). Throws std::range_error when the value
/// exceeds double range and std::invalid_argument for non-summable gamma.
double sigma_constant(const WeightConfig& config, std::size_t m_tail);

/// Population penalties kappa sigma_m^2 delta_m / n for m = 1..m_max,
/// built from the exact covariance blocks of the spec (no factor 14; that
/// belongs to the empirical counterpart).
std::vector<double> population_penalty_prefix(std::size_t m_max, const SlopeSpec& slope,
                                              const CovSpec& cov, const NoiseSpec& noise,
                                              const WeightConfig& config, double kappa,
                                              std::size_t n);

double population_penalty(std::size_t m, const SlopeSpec& slope, const CovSpec& cov,
                          const NoiseSpec& noise, const WeightConfig& config,
                          double kappa, std::size_t n);

/// sigma_m^2 = 2 (E Y^2 + g_m^t Gamma_m^{-1} g_m).
double population_sigma_sq(std::size_t m, const SlopeSpec& slope, const CovSpec& cov,
                           const NoiseSpec& noise);

/// Population Galerkin solution Gamma_k^{-1} g_k (plain truncation of the
/// slope when the covariance is diagonal).
std::vector<double> population_galerkin(std::size_t k, const SlopeSpec& slope,
                                        const CovSpec& cov);

struct BiasValue {
  double value = 0.0;
  Rigor rigor = Rigor::Exact;
};

/// Squared approximation error sup_{k>=m} ||beta^k - beta||_omega^2.
/// Diagonal covariance: the sup is attained at k = m and the value is the
/// exact tail sum. Mixed covariance: maximum over k = m..k_max, flagged as
/// a truncated sup.
BiasValue bias_sq(std::size_t m, const SlopeSpec& slope, const CovSpec& cov,
                  const WeightConfig& config, std::size_t k_max);

enum class RateKind {
  NPower,        // R ~ n^{exponent}
  NPowerLog,     // R ~ log(n) / n
  NInvLogPower,  // R ~ n^{-1} (log n)^{log_exponent}
  LogPower,      // R ~ (log n)^{log_exponent}
  LogLogOverN,   // R ~ log(log n) / n
};

struct RateDescriptor {
  RateKind kind = RateKind::NPower;
  double n_exponent = 0.0;
  double log_exponent = 0.0;
  double m_star_exponent = 0.0;  // growth exponent of the oracle dimension, where polynomial
  std::string pretty() const;
};

/// Closed-form minimax rate of the configured family, including the
/// parametric branches (s + a below / at the -1/2 boundary).
RateDescriptor rate_exponent(const WeightConfig& config);

struct TheoryRow {
  std::size_t m = 0;
  double omega_over_b = 0.0;
  double variance_sum = 0.0;      // sum_{j<=m} omega_j / (n gamma_j)
  double log_Delta_gamma = 0.0;
  double Lambda_gamma = 1.0;
  double log_delta_gamma = 0.0;
  double pen = 0.0;
  double sigma_sq = 0.0;
  double bias_sq = 0.0;
};

struct TheoryReport {
  std::size_t n = 0;
  std::size_t m_star = 1;
  double R_star = 0.0;
  std::size_t m_diamond = 1;
  double R_diamond = 0.0;
  std::size_t M_minus = 1;
  std::size_t M_plus = 1;
  double Sigma = 0.0;
  std::string sigma_rigor;
  std::string bias_rigor;
  std::vector<TheoryRow> rows;

  std::string to_json() const;
  static TheoryReport from_json(const std::string& text);
};

TheoryReport theory_report(std::size_t n, const WeightConfig& config,
                           const SlopeSpec& slope, const CovSpec& cov,
                           const NoiseSpec& noise, double kappa,
                           std::size_t m_rows, std::size_t m_star_max = 512);

}  // namespace flr
