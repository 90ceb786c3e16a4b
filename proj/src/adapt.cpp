#include "flr/adapt.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace flr {

DeltaTriplet delta_triplet(std::span<const double> norm_values, std::size_t m) {
  if (m == 0 || norm_values.size() < m)
    throw std::invalid_argument("delta_triplet: need m >= 1 norm values");
  DeltaTriplet t;
  t.norm_max = norm_values[0];
  for (std::size_t k = 1; k < m; ++k) t.norm_max = std::max(t.norm_max, norm_values[k]);
  const double floor_arg = static_cast<double>(m) + 2.0;
  t.log_factor = std::log(std::max(t.norm_max, floor_arg)) / std::log(floor_arg);
  t.dim_factor = static_cast<double>(m) * t.norm_max * t.log_factor;
  return t;
}

std::size_t fourth_root_floor(std::size_t n) {
  std::size_t k = 1;
  while ((k + 1) * (k + 1) * (k + 1) * (k + 1) <= n) ++k;
  return k;
}

std::size_t omega_upper_bound(std::size_t n, const WeightConfig& config) {
  if (n == 0) throw std::invalid_argument("n must be >= 1");
  const std::size_t cap = fourth_root_floor(n);
  const double log_n = std::log(static_cast<double>(n));
  std::size_t bound = 1;  // omega_1 = 1 <= n always
  double log_running_max = -std::numeric_limits<double>::infinity();
  for (std::size_t m = 1; m <= cap; ++m) {
    log_running_max = std::max(log_running_max, log_weight_at(config, Seq::Omega, m));
    if (log_running_max <= log_n) bound = m;
    else break;
  }
  return bound;
}

std::size_t dimension_cutoff(std::size_t n, const WeightConfig& config,
                             const std::function<double(std::size_t)>& log_a) {
  const std::size_t cap = omega_upper_bound(n, config);
  const double nd = static_cast<double>(n);
  const double log_rhs = std::log(nd) - std::log1p(std::log(nd));
  double log_running_max = log_weight_at(config, Seq::Omega, 1);
  for (std::size_t m = 2; m <= cap; ++m) {
    log_running_max = std::max(log_running_max, log_weight_at(config, Seq::Omega, m));
    const double lhs = std::log(static_cast<double>(m)) + log_running_max + log_a(m);
    if (lhs > log_rhs) return m - 1;
  }
  return cap;
}

UpperBounds random_upper_bound(const NestedGram& gram, const WeightConfig& config) {
  const std::size_t n = gram.n();
  UpperBounds b;
  b.omega_bound = omega_upper_bound(n, config);
  if (b.omega_bound > gram.m_cap())
    throw std::invalid_argument("gram does not cover the omega bound");
  auto log_inv_min_eig = [&](std::size_t m) {
    if (!gram.nonsingular(m)) return std::numeric_limits<double>::infinity();
    const double lambda = gram.min_eigenvalue(m);
    if (lambda <= 0.0) return std::numeric_limits<double>::infinity();
    return -std::log(lambda);
  };
  b.data_bound = dimension_cutoff(n, config, log_inv_min_eig);
  return b;
}

PenaltyTable penalty_table_upto(const NestedGram& gram, const WeightConfig& config,
                                double kappa, std::size_t m_upper) {
  if (!(kappa > 0.0)) throw std::invalid_argument("kappa must be positive");
  PenaltyTable table;
  table.kappa = kappa;
  table.n = gram.n();
  table.omega_bound = omega_upper_bound(gram.n(), config);
  table.rule_bound = m_upper;

  const std::size_t usable = std::min(m_upper, gram.factor_ok_upto());
  table.truncated_by_singularity = usable < m_upper;
  const std::vector<double> omega = weight_prefix(config, Seq::Omega, usable);
  const double inv_n = 1.0 / static_cast<double>(gram.n());

  std::vector<double> norms(usable);
  for (std::size_t m = 1; m <= usable; ++m)
    norms[m - 1] = gram.weighted_inv_spectral_norm(m, omega);

  table.rows.resize(usable);
  for (std::size_t m = 1; m <= usable; ++m) {
    const DeltaTriplet t = delta_triplet(norms, m);
    PenaltyRow& row = table.rows[m - 1];
    row.norm_max = t.norm_max;
    row.log_factor = t.log_factor;
    row.dim_factor = t.dim_factor;
    row.sigma_sq = 2.0 * (gram.sigma_y_sq() + gram.quad_form_g(m));
    row.pen = 14.0 * kappa * row.sigma_sq * row.dim_factor * inv_n;
  }
  for (std::size_t m = 1; m < usable; ++m) {
    const double slack = 1e-10 * (1.0 + table.rows[m - 1].pen);
    if (table.rows[m].pen < table.rows[m - 1].pen - slack)
      throw std::logic_error("penalty sequence not nondecreasing");
  }
  table.selection_bound = usable;
  return table;
}

PenaltyTable penalty_table(const NestedGram& gram, const WeightConfig& config,
                           double kappa) {
  const UpperBounds bounds = random_upper_bound(gram, config);
  PenaltyTable table = penalty_table_upto(gram, config, kappa, bounds.data_bound);
  table.omega_bound = bounds.omega_bound;
  table.rule_bound = bounds.data_bound;
  return table;
}

std::vector<double> contrast_values(const std::vector<GalerkinEstimate>& estimates,
                                    const PenaltyTable& table,
                                    const WeightConfig& config) {
  const std::size_t bound = table.selection_bound;
  if (estimates.size() < bound)
    throw std::invalid_argument("contrast_values: need an estimate per dimension");
  const std::vector<double> omega = weight_prefix(config, Seq::Omega, bound);
  std::vector<double> psi(bound);
  for (std::size_t m = 1; m <= bound; ++m) {
    const std::vector<double>& em = estimates[m - 1].coeffs;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t k = m; k <= bound; ++k) {
      const std::vector<double>& ek = estimates[k - 1].coeffs;
      double dist = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        const double diff = ek[j] - (j < m ? em[j] : 0.0);
        dist += omega[j] * diff * diff;
      }
      best = std::max(best, dist - table.pen(k));
    }
    psi[m - 1] = best;
  }
  return psi;
}

SelectionResult select_dimension(const Sample& sample, const WeightConfig& config,
                                 double kappa) {
  const std::size_t cap = fourth_root_floor(sample.n);
  if (sample.width < cap)
    throw std::invalid_argument("sample coefficient width below floor(n^{1/4})");
  return select_dimension_on(NestedGram::accumulate(sample, cap), config, kappa);
}

SelectionResult select_dimension_on(const NestedGram& gram, const WeightConfig& config,
                                    double kappa) {
  SelectionResult result;
  result.table = penalty_table(gram, config, kappa);

  const std::size_t bound = result.table.selection_bound;
  if (bound == 0) {
    // Degenerate sample: even the 1x1 covariance block is singular. The
    // threshold absorbs it; the selection collapses to the zero estimate.
    result.selected_m = 1;
    result.estimate = threshold_estimate(gram, 1);
    result.per_m = {result.estimate};
    return result;
  }

  result.per_m.reserve(bound);
  for (std::size_t m = 1; m <= bound; ++m)
    result.per_m.push_back(threshold_estimate(gram, m));
  result.contrasts = contrast_values(result.per_m, result.table, config);

  std::size_t best_m = 1;
  double best = result.contrasts[0] + result.table.pen(1);
  for (std::size_t m = 2; m <= bound; ++m) {
    const double value = result.contrasts[m - 1] + result.table.pen(m);
    if (value < best) {
      best = value;
      best_m = m;
    }
  }
  result.selected_m = best_m;
  result.estimate = result.per_m[best_m - 1];
  return result;
}

}  // namespace flr
