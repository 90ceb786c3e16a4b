#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace flr {

/// Closed-form weight families. The tag names the decay pattern of the
/// smoothness sequence b and the eigenvalue sequence gamma in that order:
/// P = polynomial, E = exponential.
enum class Family { PP, EP, PE, Custom };

enum class Seq { Omega, B, Gamma };

/// Finite user-supplied weight tables (strictly positive, first entry 1).
struct CustomTables {
  std::vector<double> omega;
  std::vector<double> b;
  std::vector<double> gamma;
};

/// One of the three closed-form families, or finite tables.
///
/// Closed forms (all with omega_j = j^{2s}):
///   PP: b_j = j^{2p},        gamma_j = j^{-2a}        (p > 0, a > 1/2, p > s > -2a)
///   EP: b_j = exp(j^{2p}-1), gamma_j = j^{-2a}        (p > 0, a > 1/2, s > -2a)
///   PE: b_j = j^{2p},        gamma_j = exp(-j^{2a}+1) (p > 0, a > 0, p > s)
struct WeightFamily {
  Family kind = Family::PP;
  double s = 0.0;
  double p = 0.0;
  double a = 0.0;
  CustomTables tables;  // Custom only
};

/// Weight family together with the class constants: ellipsoid radius r for
/// the slope class and operator constant d for the covariance class.
struct WeightConfig {
  WeightFamily family;
  double r = 1.0;
  double d = 1.0;
};

/// Validated constructors; throw std::invalid_argument outside the
/// admissible parameter range. The plain aggregates stay open so that
/// diagnostic code (check_regularity) can probe invalid combinations.
WeightConfig make_pp(double s, double p, double a, double r = 1.0, double d = 1.0);
WeightConfig make_ep(double s, double p, double a, double r = 1.0, double d = 1.0);
WeightConfig make_pe(double s, double p, double a, double r = 1.0, double d = 1.0);
WeightConfig make_custom(CustomTables tables, double r = 1.0, double d = 1.0);

/// Same checks as the make_* constructors, usable on a parsed aggregate.
void validate(const WeightConfig& config);

/// Closed-form weight value. j is 1-based; the first element of every
/// sequence is 1. exp-family values outside double range raise
/// std::range_error (never a silent infinity or zero); Custom lookups
/// beyond the table raise std::out_of_range.
double weight_at(const WeightConfig& config, Seq which, std::size_t j);

/// Natural log of weight_at, evaluated in closed form. Stays finite for
/// the exp families far beyond the range of the weights themselves; the
/// regularity checks and the theory machinery work on these.
double log_weight_at(const WeightConfig& config, Seq which, std::size_t j);

struct RegularityCheck {
  std::string name;
  bool pass = true;
  std::size_t first_fail = 0;  // first offending index, 0 when passing
  std::string note;
};

struct RegularityReport {
  std::vector<RegularityCheck> checks;
  std::string limitation;
  bool all_pass() const;
  const RegularityCheck* find(const std::string& name) const;
};

/// Verifies on the prefix 1..m_max: first elements equal 1; b^{-1},
/// omega*b^{-1}, gamma and gamma^2*omega^{-1} nonincreasing; gamma
/// summable (parameter condition for the closed forms). Violations are
/// reported with the first offending index, never thrown. Monotonicity is
/// checked on logs, so exp families work on prefixes where the weights
/// themselves leave double range.
RegularityReport check_regularity(const WeightConfig& config, std::size_t m_max);

/// Sum of weight_j * coeff_j^2 over the provided indices (which = Omega or
/// B). Zero coefficients contribute zero regardless of the weight's
/// representability.
double weighted_norm_sq(std::span<const double> coeffs, const WeightConfig& config,
                        Seq which);

/// Weights 1..m as a dense vector.
std::vector<double> weight_prefix(const WeightConfig& config, Seq which, std::size_t m);

}  // namespace flr
