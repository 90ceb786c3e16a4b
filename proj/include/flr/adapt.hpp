#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "flr/estimator.hpp"
#include "flr/gram.hpp"
#include "flr/sequences.hpp"

namespace flr {

/// The three derived quantities of a weighted-inverse-norm sequence:
///   norm_max  = max_{k<=m} ||D^{1/2} [K]_k^{-1} D^{1/2}||_s
///   log_factor = log(norm_max v (m+2)) / log(m+2)   (>= 1, natural logs)
///   dim_factor = m * norm_max * log_factor
struct DeltaTriplet {
  double norm_max = 0.0;
  double log_factor = 1.0;
  double dim_factor = 0.0;
};

DeltaTriplet delta_triplet(std::span<const double> norm_values, std::size_t m);

/// Largest integer k with k^4 <= n.
std::size_t fourth_root_floor(std::size_t n);

/// Deterministic dimension cap: the largest m <= floor(n^{1/4}) whose
/// running-max omega weight stays below n.
std::size_t omega_upper_bound(std::size_t n, const WeightConfig& config);

/// The cutoff rule shared by the random bound and its theoretical
/// counterparts: one less than the first m in 2..omega_upper_bound with
/// m * max_{k<=m} omega_k * a_m > n / (1 + log n), or the cap itself when
/// no m qualifies. The sequence enters through its natural log so that
/// astronomically large entries (or +infinity for singular blocks)
/// trigger the condition without overflow.
std::size_t dimension_cutoff(std::size_t n, const WeightConfig& config,
                             const std::function<double(std::size_t)>& log_a);

struct UpperBounds {
  std::size_t omega_bound = 1;  // deterministic cap
  std::size_t data_bound = 1;   // random bound from the empirical covariance
};

/// data_bound applies the cutoff rule to a_m = 1 / min_eigenvalue of the
/// empirical covariance block, with singular blocks treated as infinite.
UpperBounds random_upper_bound(const NestedGram& gram, const WeightConfig& config);

struct PenaltyRow {
  double norm_max = 0.0;    // running max of weighted inverse norms
  double log_factor = 1.0;
  double dim_factor = 0.0;
  double sigma_sq = 0.0;    // 2 (sigma_y_sq + quad_form_g)
  double pen = 0.0;         // 14 kappa sigma_sq dim_factor / n
};

struct PenaltyTable {
  std::vector<PenaltyRow> rows;  // m = 1..selection_bound
  double kappa = 0.0;
  std::size_t n = 0;
  std::size_t omega_bound = 1;
  std::size_t rule_bound = 0;       // data bound per the cutoff rule
  std::size_t selection_bound = 0;  // rows.size(), rule bound after truncation
  bool truncated_by_singularity = false;

  double pen(std::size_t m) const { return rows[m - 1].pen; }
};

/// Penalty rows for m = 1..data_bound; a singular block below the data
/// bound truncates the table (recorded, never silent). The rows are
/// checked nondecreasing in pen to 1e-10 slack.
PenaltyTable penalty_table(const NestedGram& gram, const WeightConfig& config,
                           double kappa);

/// Same rows up to an explicit bound (diagnostics want penalties past the
/// selection bound); stops early at singular blocks.
PenaltyTable penalty_table_upto(const NestedGram& gram, const WeightConfig& config,
                                double kappa, std::size_t m_upper);

/// Contrasts Psi_m = max_{m<=k<=bound} (||est_k - est_m||_omega^2 - pen_k),
/// estimates zero-padded to the longer length; the k = m term makes
/// Psi_m >= -pen_m.
std::vector<double> contrast_values(const std::vector<GalerkinEstimate>& estimates,
                                    const PenaltyTable& table,
                                    const WeightConfig& config);

struct SelectionResult {
  PenaltyTable table;
  std::vector<double> contrasts;
  std::size_t selected_m = 1;
  GalerkinEstimate estimate;
  std::vector<GalerkinEstimate> per_m;  // diagnostics
};

/// The full data-driven pipeline: accumulate moments, determine the random
/// collection 1..data_bound, build penalties and contrasts, and return the
/// smallest minimizer of contrast + penalty together with the estimate.
SelectionResult select_dimension(const Sample& sample, const WeightConfig& config,
                                 double kappa);

/// Same pipeline on pre-accumulated moments (the Monte Carlo harness
/// shares one accumulation across the estimators it compares).
SelectionResult select_dimension_on(const NestedGram& gram, const WeightConfig& config,
                                    double kappa);

/// Theoretical default penalty constants.
constexpr double kKappaGaussian = 96.0;
constexpr double kKappaMoment = 288.0;

}  // namespace flr
