#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "flr/datagen.hpp"
#include "flr/sequences.hpp"
#include "flr/theory.hpp"

namespace flr {

enum class CovKind { Diagonal, Mixed };

/// Everything a Monte Carlo study needs, serializable to JSON so a study
/// can be rerun bit-identically from its own output.
struct StudySpec {
  WeightConfig config;

  std::string slope_profile = "smooth_poly";  // smooth_poly | analytic | custom
  std::vector<double> slope_coeffs;           // custom profile only

  CovKind cov_kind = CovKind::Diagonal;
  std::vector<GivensRotation> rotations;  // mixed only
  double declared_d = 1.0;
  Law regressor_law = Law::Gaussian;

  NoiseSpec noise{Law::Gaussian, 0.5};

  std::vector<std::size_t> n_grid;
  std::size_t replications = 2;
  double kappa = 96.0;
  std::uint64_t seed = 1;
  std::size_t threads = 0;     // 0 = hardware concurrency
  std::size_t truncation = 0;  // coefficient truncation; 0 = automatic
  std::string out_dir = "out";
};

void validate(const StudySpec& spec);

/// max(4 * omega bound at the largest n, 128), and never below the
/// coefficient width the selection rule needs.
std::size_t resolve_truncation(const StudySpec& spec);

SlopeSpec build_slope(const StudySpec& spec, std::size_t j_total);
CovSpec build_cov(const StudySpec& spec, std::size_t j_total);

struct RiskRow {
  std::size_t n = 0;
  std::string method;  // adaptive | oracle_mstar | best_fixed_empirical
  double mean_risk = 0.0;
  double std_error = 0.0;
  double mean_mhat = 0.0;
  double median_mhat = 0.0;
  double threshold_fail_rate = 0.0;
};

struct RiskTable {
  std::vector<RiskRow> rows;
  const RiskRow* find(std::size_t n, const std::string& method) const;
};

struct EventRow {
  std::size_t n = 0;
  double freq_m_sandwich = 0.0;    // M_minus <= data bound <= M_plus
  double freq_pen_sandwich = 0.0;  // pen_k <= empirical pen_k <= 72 pen_k, k <= M_plus
  double freq_threshold_fail = 0.0;
};

struct EventDiagnostics {
  std::vector<EventRow> rows;
};

struct StudyResult {
  RiskTable risks;
  EventDiagnostics events;
};

/// Runs replications over a worker pool. For every (n, rep) the same
/// substream seed produces the same sample, estimates are aggregated in
/// fixed index order with pairwise sums, so the outputs do not depend on
/// the thread count.
StudyResult run_study(const StudySpec& spec);

enum class RateAxis { LogN, LogLogN };

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double std_error = 0.0;
};

/// Ordinary least squares of log mean risk on log n (or log log n for the
/// exponentially ill-posed family). Requires >= 4 grid points and positive
/// risks.
RateFit fit_rate(const RiskTable& table, const std::string& method, RateAxis axis);

/// Dimension-jump calibration: walking the grid from its largest value,
/// returns the last kappa before the median selected dimension (over 50
/// preliminary replications on the middle grid n, common random numbers
/// across kappa) jumps by more than 1; the smallest grid value when no
/// jump occurs, the largest when the first step already jumps.
double calibrate_kappa(const StudySpec& spec, std::span<const double> kappa_grid);

// ---- persistence ---------------------------------------------------------

void write_risk_table(const std::string& path, const RiskTable& table);
RiskTable read_risk_table(const std::string& path);

void write_events(const std::string& path, const EventDiagnostics& events);
EventDiagnostics read_events(const std::string& path);

std::string study_to_json(const StudySpec& spec);
StudySpec study_from_json(const std::string& text);
StudySpec load_study_file(const std::string& path);

/// Writes risk_table.csv, events.csv, study.json (fully resolved spec),
/// risk_plot.dat and risk_plot.svg into spec.out_dir.
void write_study_outputs(const StudySpec& spec, const StudyResult& result);

/// Deterministic pairwise summation in index order.
double pairwise_sum(std::span<const double> values);

}  // namespace flr
