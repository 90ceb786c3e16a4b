#include "flr/theory.hpp"

#include <cfloat>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "flr/adapt.hpp"
#include "flr/errors.hpp"
#include "flr/gram.hpp"
#include "flr/linalg.hpp"

namespace flr {

namespace {

double safe_exp(double lv) {
  if (lv > 709.0) return std::numeric_limits<double>::infinity();
  if (lv < -745.0) return 0.0;
  return std::exp(lv);
}

}  // namespace

OracleDimension oracle_mstar(std::size_t n, const WeightConfig& config,
                             std::size_t m_max) {
  if (n == 0 || m_max < 1) throw std::invalid_argument("oracle_mstar: bad arguments");
  const double nd = static_cast<double>(n);
  double variance = 0.0;
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_m = 0;
  for (std::size_t m = 1; m <= m_max; ++m) {
    variance +=
        safe_exp(log_weight_at(config, Seq::Omega, m) - log_weight_at(config, Seq::Gamma, m)) /
        nd;
    const double bias =
        safe_exp(log_weight_at(config, Seq::Omega, m) - log_weight_at(config, Seq::B, m));
    const double value = std::max(bias, variance);
    if (value < best) {
      best = value;
      best_m = m;
    }
  }
  if (best_m == m_max) {
    std::ostringstream os;
    os << "oracle dimension hit the scan boundary m_max = " << m_max
       << "; enlarge m_max";
    throw std::runtime_error(os.str());
  }
  return {best_m, best};
}

GammaTriplet gamma_triplet(const WeightConfig& config, std::size_t m) {
  if (m == 0) throw std::invalid_argument("gamma_triplet: m must be >= 1");
  GammaTriplet t;
  t.log_norm_max = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k <= m; ++k) {
    t.log_norm_max = std::max(t.log_norm_max, log_weight_at(config, Seq::Omega, k) -
                                                  log_weight_at(config, Seq::Gamma, k));
  }
  const double log_floor = std::log(static_cast<double>(m) + 2.0);
  t.log_factor = std::max(t.log_norm_max, log_floor) / log_floor;
  t.log_dim_factor =
      std::log(static_cast<double>(m)) + t.log_norm_max + std::log(t.log_factor);
  return t;
}

DiamondQuantities diamond_quantities(std::size_t n, const WeightConfig& config) {
  DiamondQuantities q;
  const double log_d = std::log(config.d);
  q.lower_bound = dimension_cutoff(n, config, [&](std::size_t m) {
    return std::log(16.0) + 3.0 * log_d - log_weight_at(config, Seq::Gamma, m);
  });
  q.upper_bound = dimension_cutoff(n, config, [&](std::size_t m) {
    return -std::log(4.0) - log_d - log_weight_at(config, Seq::Gamma, m);
  });
  const double log_n = std::log(static_cast<double>(n));
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_m = 1;
  for (std::size_t m = 1; m <= q.lower_bound; ++m) {
    const double log_bias =
        log_weight_at(config, Seq::Omega, m) - log_weight_at(config, Seq::B, m);
    const double log_var = gamma_triplet(config, m).log_dim_factor - log_n;
    const double value = std::max(log_bias, log_var);
    if (value < best) {
      best = value;
      best_m = m;
    }
  }
  q.m_diamond = best_m;
  q.rate_diamond = safe_exp(best);
  return q;
}

double gamma_series_bound(const WeightConfig& config, std::size_t m_tail) {
  if (m_tail < 8) throw std::invalid_argument("gamma_series_bound: m_tail too small");
  const WeightFamily& f = config.family;
  if ((f.kind == Family::PP || f.kind == Family::EP) && !(f.a > 0.5))
    throw std::invalid_argument("gamma is not summable (requires a > 1/2)");

  std::size_t limit = m_tail;
  if (f.kind == Family::Custom) limit = std::min(m_tail, f.tables.gamma.size());

  long double sum = 0.0L;
  for (std::size_t j = 1; j <= limit; ++j)
    sum += safe_exp(log_weight_at(config, Seq::Gamma, j));
  switch (f.kind) {
    case Family::PP:
    case Family::EP:
      // integral comparison: sum_{j>m} j^{-2a} <= m^{1-2a} / (2a - 1)
      sum += std::pow(static_cast<double>(m_tail), 1.0 - 2.0 * f.a) /
             (2.0 * f.a - 1.0);
      break;
    case Family::PE: {
      // super-geometric decay: tail <= gamma_{m+1} / (1 - ratio)
      const double lg1 = log_weight_at(config, Seq::Gamma, m_tail + 1);
      const double lg2 = log_weight_at(config, Seq::Gamma, m_tail + 2);
      const double ratio = safe_exp(lg2 - lg1);
      sum += safe_exp(lg1) / (1.0 - ratio);
      break;
    }
    case Family::Custom:
      break;  // the finite table is the whole sequence
  }
  return static_cast<double>(sum);
}

double sigma_constant(const WeightConfig& config, std::size_t m_tail) {
  if (m_tail < 8) throw std::invalid_argument("sigma_constant: m_tail too small");
  const WeightFamily& f = config.family;
  const long double first = gamma_series_bound(config, m_tail);

  std::size_t first_limit = m_tail;
  if (f.kind == Family::Custom)
    first_limit = std::min({m_tail, f.tables.gamma.size(), f.tables.omega.size()});

  // Damped series sum_m Delta^gamma_m exp(-m log(Delta v (m+2)) / (16 (1+log d) log(m+2))).
  const double c = 1.0 / (16.0 * (1.0 + std::log(config.d)));
  long double second = 0.0L;
  std::size_t second_limit = first_limit;
  for (std::size_t m = 1; m <= second_limit; ++m) {
    const GammaTriplet t = gamma_triplet(config, m);
    const double log_floor = std::log(static_cast<double>(m) + 2.0);
    const double log_term =
        t.log_norm_max -
        c * static_cast<double>(m) * std::max(t.log_norm_max, log_floor) / log_floor;
    second += expl(static_cast<long double>(log_term));
  }
  if (f.kind != Family::Custom) {
    // For m with c m / log(m+2) >= 2 each term is below exp(-c m / 2);
    // geometric tail from there.
    const double check = c * static_cast<double>(m_tail) /
                         std::log(static_cast<double>(m_tail) + 2.0);
    if (check < 2.0)
      throw std::invalid_argument("sigma_constant: m_tail too small for this d");
    second += std::exp(-c * static_cast<double>(m_tail + 1) / 2.0) /
              (1.0 - std::exp(-c / 2.0));
  }

  const long double result = std::max(first, second);
  if (result > static_cast<long double>(DBL_MAX))
    throw std::range_error("sigma constant exceeds double range");
  return static_cast<double>(result);
}

double population_sigma_sq(std::size_t m, const SlopeSpec& slope, const CovSpec& cov,
                           const NoiseSpec& noise) {
  if (m == 0 || m > cov.truncation())
    throw std::invalid_argument("population_sigma_sq: m out of range");
  const std::vector<double> g = cov_apply(cov, slope.coeffs);
  const double ey2 = noise.sigma * noise.sigma + dot(g, slope.coeffs);
  const Matrix gamma_m = cov_matrix(cov, m);
  const NestedCholesky chol = nested_cholesky(gamma_m);
  if (chol.ok_upto < m) throw singular_error(chol.failed_pivot, "population covariance block singular");
  std::vector<double> y(g.begin(), g.begin() + m);
  forward_solve(chol.lower, m, y);
  return 2.0 * (ey2 + dot(y, y));
}

std::vector<double> population_penalty_prefix(std::size_t m_max, const SlopeSpec& slope,
                                              const CovSpec& cov, const NoiseSpec& noise,
                                              const WeightConfig& config, double kappa,
                                              std::size_t n) {
  if (m_max == 0 || m_max > cov.truncation())
    throw std::invalid_argument("population_penalty_prefix: m_max out of range");
  const std::vector<double> omega = weight_prefix(config, Seq::Omega, m_max);
  std::vector<double> norms(m_max);
  for (std::size_t k = 1; k <= m_max; ++k)
    norms[k - 1] = weighted_inv_spectral_norm(cov_matrix(cov, k), omega);
  std::vector<double> pens(m_max);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t m = 1; m <= m_max; ++m) {
    const DeltaTriplet t = delta_triplet(norms, m);
    pens[m - 1] =
        kappa * population_sigma_sq(m, slope, cov, noise) * t.dim_factor * inv_n;
  }
  return pens;
}

double population_penalty(std::size_t m, const SlopeSpec& slope, const CovSpec& cov,
                          const NoiseSpec& noise, const WeightConfig& config,
                          double kappa, std::size_t n) {
  return population_penalty_prefix(m, slope, cov, noise, config, kappa, n).back();
}

std::vector<double> population_galerkin(std::size_t k, const SlopeSpec& slope,
                                        const CovSpec& cov) {
  if (k == 0 || k > cov.truncation())
    throw std::invalid_argument("population_galerkin: k out of range");
  if (cov.diagonal())
    return {slope.coeffs.begin(), slope.coeffs.begin() + k};
  const std::vector<double> g = cov_apply(cov, slope.coeffs);
  const Matrix gamma_k = cov_matrix(cov, k);
  const NestedCholesky chol = nested_cholesky(gamma_k);
  if (chol.ok_upto < k) throw singular_error(chol.failed_pivot, "population covariance block singular");
  return spd_solve(chol, k, std::span<const double>(g.data(), k));
}

BiasValue bias_sq(std::size_t m, const SlopeSpec& slope, const CovSpec& cov,
                  const WeightConfig& config, std::size_t k_max) {
  if (k_max < m) throw std::invalid_argument("bias_sq: k_max must be >= m");
  const std::size_t j_total = slope.truncation();
  if (cov.diagonal()) {
    // beta^k is plain truncation, the sup is attained at k = m.
    double tail = 0.0;
    for (std::size_t j = m + 1; j <= j_total; ++j) {
      const double c = slope.coeffs[j - 1];
      if (c == 0.0) continue;
      tail += weight_at(config, Seq::Omega, j) * c * c;
    }
    return {tail, Rigor::Exact};
  }
  const std::size_t k_hi = std::min(k_max, j_total);
  double worst = 0.0;
  for (std::size_t k = m; k <= k_hi; ++k) {
    const std::vector<double> bk = population_galerkin(k, slope, cov);
    double dist = 0.0;
    for (std::size_t j = 1; j <= j_total; ++j) {
      const double diff = (j <= k ? bk[j - 1] : 0.0) - slope.coeffs[j - 1];
      if (diff == 0.0) continue;
      dist += weight_at(config, Seq::Omega, j) * diff * diff;
    }
    worst = std::max(worst, dist);
  }
  return {worst, Rigor::TruncatedSup};
}

std::string RateDescriptor::pretty() const {
  std::ostringstream os;
  os.precision(6);
  switch (kind) {
    case RateKind::NPower: os << n_exponent << " (n-power)"; break;
    case RateKind::NPowerLog: os << "-1 (n-power, extra log n factor)"; break;
    case RateKind::NInvLogPower:
      os << "-1 (n-power) x (log n)^" << log_exponent;
      break;
    case RateKind::LogPower: os << log_exponent << " (log-power)"; break;
    case RateKind::LogLogOverN: os << "-1 (n-power, extra log log n factor)"; break;
  }
  return os.str();
}

RateDescriptor rate_exponent(const WeightConfig& config) {
  const WeightFamily& f = config.family;
  RateDescriptor r;
  const double sa = f.s + f.a;
  switch (f.kind) {
    case Family::PP:
      if (sa > -0.5) {
        r.kind = RateKind::NPower;
        r.n_exponent = -(2.0 * f.p - 2.0 * f.s) / (2.0 * f.a + 2.0 * f.p + 1.0);
        r.m_star_exponent = 1.0 / (2.0 * f.p + 2.0 * f.a + 1.0);
      } else if (sa < -0.5) {
        r.kind = RateKind::NPower;
        r.n_exponent = -1.0;
        r.m_star_exponent = 1.0 / (2.0 * (f.p - f.s));
      } else {
        r.kind = RateKind::NPowerLog;
        r.n_exponent = -1.0;
        r.log_exponent = 1.0;
        r.m_star_exponent = 1.0 / (2.0 * (f.p - f.s));
      }
      break;
    case Family::EP:
      if (sa > -0.5) {
        r.kind = RateKind::NInvLogPower;
        r.n_exponent = -1.0;
        r.log_exponent = (2.0 * f.a + 1.0 + 2.0 * f.s) / (2.0 * f.p);
      } else if (sa < -0.5) {
        r.kind = RateKind::NPower;
        r.n_exponent = -1.0;
      } else {
        r.kind = RateKind::LogLogOverN;
        r.n_exponent = -1.0;
      }
      break;
    case Family::PE:
      r.kind = RateKind::LogPower;
      r.log_exponent = -(f.p - f.s) / f.a;
      break;
    case Family::Custom:
      throw std::invalid_argument("no closed-form rate for custom weight tables");
  }
  return r;
}

TheoryReport theory_report(std::size_t n, const WeightConfig& config,
                           const SlopeSpec& slope, const CovSpec& cov,
                           const NoiseSpec& noise, double kappa,
                           std::size_t m_rows, std::size_t m_star_max) {
  TheoryReport rep;
  rep.n = n;
  const OracleDimension oracle = oracle_mstar(n, config, m_star_max);
  rep.m_star = oracle.m_star;
  rep.R_star = oracle.rate;
  const DiamondQuantities q = diamond_quantities(n, config);
  rep.m_diamond = q.m_diamond;
  rep.R_diamond = q.rate_diamond;
  rep.M_minus = q.lower_bound;
  rep.M_plus = q.upper_bound;
  rep.Sigma = sigma_constant(config, 2000);
  rep.sigma_rigor = "bounded-tail";
  rep.bias_rigor = cov.diagonal() ? "exact" : "truncated-sup";

  const std::size_t rows = std::min(m_rows, cov.truncation());
  const std::vector<double> pens =
      population_penalty_prefix(rows, slope, cov, noise, config, kappa, n);
  const double nd = static_cast<double>(n);
  double variance = 0.0;
  for (std::size_t m = 1; m <= rows; ++m) {
    TheoryRow row;
    row.m = m;
    row.omega_over_b =
        safe_exp(log_weight_at(config, Seq::Omega, m) - log_weight_at(config, Seq::B, m));
    variance += safe_exp(log_weight_at(config, Seq::Omega, m) -
                         log_weight_at(config, Seq::Gamma, m)) /
                nd;
    row.variance_sum = variance;
    const GammaTriplet t = gamma_triplet(config, m);
    row.log_Delta_gamma = t.log_norm_max;
    row.Lambda_gamma = t.log_factor;
    row.log_delta_gamma = t.log_dim_factor;
    row.pen = pens[m - 1];
    row.sigma_sq = population_sigma_sq(m, slope, cov, noise);
    row.bias_sq = bias_sq(m, slope, cov, config, cov.truncation()).value;
    rep.rows.push_back(row);
  }
  return rep;
}

std::string TheoryReport::to_json() const {
  nlohmann::json j;
  j["n"] = n;
  j["m_star"] = m_star;
  j["R_star"] = R_star;
  j["m_diamond"] = m_diamond;
  j["R_diamond"] = R_diamond;
  j["M_minus"] = M_minus;
  j["M_plus"] = M_plus;
  j["Sigma"] = Sigma;
  j["sigma_rigor"] = sigma_rigor;
  j["bias_rigor"] = bias_rigor;
  j["rows"] = nlohmann::json::array();
  for (const TheoryRow& r : rows) {
    j["rows"].push_back({{"m", r.m},
                         {"omega_over_b", r.omega_over_b},
                         {"variance_sum", r.variance_sum},
                         {"log_Delta_gamma", r.log_Delta_gamma},
                         {"Lambda_gamma", r.Lambda_gamma},
                         {"log_delta_gamma", r.log_delta_gamma},
                         {"pen", r.pen},
                         {"sigma_sq", r.sigma_sq},
                         {"bias_sq", r.bias_sq}});
  }
  return j.dump(2);
}

namespace {

// infinities serialize as null; read them back as such
double json_real(const nlohmann::json& j, const char* key) {
  const nlohmann::json& v = j.at(key);
  if (v.is_null()) return std::numeric_limits<double>::infinity();
  return v.get<double>();
}

}  // namespace

TheoryReport TheoryReport::from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  TheoryReport rep;
  rep.n = j.at("n").get<std::size_t>();
  rep.m_star = j.at("m_star").get<std::size_t>();
  rep.R_star = j.at("R_star").get<double>();
  rep.m_diamond = j.at("m_diamond").get<std::size_t>();
  rep.R_diamond = j.at("R_diamond").get<double>();
  rep.M_minus = j.at("M_minus").get<std::size_t>();
  rep.M_plus = j.at("M_plus").get<std::size_t>();
  rep.Sigma = j.at("Sigma").get<double>();
  rep.sigma_rigor = j.at("sigma_rigor").get<std::string>();
  rep.bias_rigor = j.at("bias_rigor").get<std::string>();
  for (const nlohmann::json& rj : j.at("rows")) {
    TheoryRow r;
    r.m = rj.at("m").get<std::size_t>();
    r.omega_over_b = json_real(rj, "omega_over_b");
    r.variance_sum = json_real(rj, "variance_sum");
    r.log_Delta_gamma = json_real(rj, "log_Delta_gamma");
    r.Lambda_gamma = json_real(rj, "Lambda_gamma");
    r.log_delta_gamma = json_real(rj, "log_delta_gamma");
    r.pen = json_real(rj, "pen");
    r.sigma_sq = json_real(rj, "sigma_sq");
    r.bias_sq = json_real(rj, "bias_sq");
    rep.rows.push_back(r);
  }
  return rep;
}

}  // namespace flr
