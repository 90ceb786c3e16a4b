#include "flr/datagen.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "flr/basis.hpp"
#include "flr/csv.hpp"
#include "flr/errors.hpp"
#include "flr/rng.hpp"

namespace flr {

namespace {

constexpr double kMembershipMargin = 0.9;

double draw_law(Rng& rng, Law law) {
  switch (law) {
    case Law::Gaussian: return rng.normal();
    case Law::ScaledUniform: return rng.scaled_uniform();
    case Law::ScaledLaplace: return rng.scaled_laplace();
  }
  return 0.0;
}

void apply_rotation(std::span<double> v, const GivensRotation& rot) {
  const double c = std::cos(rot.theta);
  const double s = std::sin(rot.theta);
  const double vi = v[rot.i - 1];
  const double vj = v[rot.j - 1];
  v[rot.i - 1] = c * vi - s * vj;
  v[rot.j - 1] = s * vi + c * vj;
}

void check_rotations(const std::vector<GivensRotation>& mixing, std::size_t j_total) {
  for (const GivensRotation& rot : mixing) {
    if (rot.i == 0 || rot.j == 0 || rot.i >= rot.j || rot.j > j_total)
      throw std::invalid_argument("givens rotation indices must satisfy 1 <= i < j <= J");
  }
}

// b_j * c_j^2 without forming b_j, which overflows for exp-family b.
double ellipsoid_term_log(const WeightConfig& config, std::size_t j, double coeff) {
  return log_weight_at(config, Seq::B, j) + 2.0 * std::log(std::abs(coeff));
}

}  // namespace

SlopeSpec make_slope(const WeightConfig& config, SlopeProfile profile,
                     std::size_t j_total) {
  if (j_total < 8) throw std::invalid_argument("slope truncation must be >= 8");
  std::vector<double> shape(j_total);
  std::string note;
  for (std::size_t j = 1; j <= j_total; ++j) {
    const double x = static_cast<double>(j);
    shape[j - 1] = (profile == SlopeProfile::SmoothPoly)
                       ? std::pow(x, -config.family.p - 1.0)
                       : std::exp(-x);
  }
  note = (profile == SlopeProfile::SmoothPoly) ? "smooth_poly" : "analytic";

  // Normalize the truncated b-norm to 0.9 r.
  double norm_sq = 0.0;
  for (std::size_t j = 1; j <= j_total; ++j) {
    if (shape[j - 1] == 0.0) continue;
    norm_sq += std::exp(ellipsoid_term_log(config, j, shape[j - 1]));
  }
  if (!std::isfinite(norm_sq) || norm_sq <= 0.0) {
    throw std::invalid_argument(
        "slope profile cannot be normalized for this b sequence; supply custom "
        "coefficients");
  }
  const double c = std::sqrt(kMembershipMargin * config.r / norm_sq);
  SlopeSpec spec;
  spec.coeffs.resize(j_total);
  for (std::size_t j = 0; j < j_total; ++j) spec.coeffs[j] = c * shape[j];
  spec.note = note;
  spec.b_norm_sq = kMembershipMargin * config.r;
  return spec;
}

SlopeSpec make_slope_custom(const WeightConfig& config, std::vector<double> coeffs,
                            std::string note) {
  if (coeffs.empty()) throw std::invalid_argument("custom slope has no coefficients");
  const double log_r = std::log(config.r);
  double norm_sq = 0.0;
  for (std::size_t j = 1; j <= coeffs.size(); ++j) {
    const double c = coeffs[j - 1];
    if (c == 0.0) continue;
    if (!std::isfinite(c)) throw std::invalid_argument("custom slope has non-finite entry");
    const double tl = ellipsoid_term_log(config, j, c);
    if (tl > log_r + 1e-9) {
      std::ostringstream os;
      os << "slope violates the ellipsoid: b_" << j << " [beta]_" << j
         << "^2 alone exceeds r";
      throw std::invalid_argument(os.str());
    }
    norm_sq += std::exp(tl);
  }
  if (norm_sq > config.r * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "slope violates the ellipsoid: ||beta||_b^2 = " << norm_sq << " > r = "
       << config.r;
    throw std::invalid_argument(os.str());
  }
  SlopeSpec spec;
  spec.coeffs = std::move(coeffs);
  spec.note = std::move(note);
  spec.b_norm_sq = norm_sq;
  return spec;
}

CovSpec make_cov_diagonal(const WeightConfig& config, std::size_t j_total,
                          Law regressor_law) {
  CovSpec cov;
  cov.eigenvalues.resize(j_total);
  for (std::size_t j = 1; j <= j_total; ++j) {
    // exp underflow beyond double range leaves exact zeros: coordinates
    // whose variance is below ~1e-308 carry no representable signal.
    cov.eigenvalues[j - 1] = std::exp(log_weight_at(config, Seq::Gamma, j));
  }
  cov.d_factor = 1.0;
  cov.regressor_law = regressor_law;
  return cov;
}

CovSpec make_cov_mixed(const WeightConfig& config, std::size_t j_total,
                       std::vector<GivensRotation> mixing, double declared_d,
                       Law regressor_law) {
  if (declared_d < 1.0) throw std::invalid_argument("declared d must be >= 1");
  check_rotations(mixing, j_total);
  CovSpec cov = make_cov_diagonal(config, j_total, regressor_law);
  cov.mixing = std::move(mixing);

  // Membership factor on basis vectors: ||Gamma e_j|| / gamma_j must sit in
  // [1/d, d] for every j. Rotations that couple representable coordinates
  // with underflowed ones leave the declared class and are rejected.
  double factor = 1.0;
  std::vector<double> e(j_total, 0.0);
  for (std::size_t j = 1; j <= j_total; ++j) {
    const double gamma_j = cov.eigenvalues[j - 1];
    bool touched = false;
    for (const GivensRotation& rot : cov.mixing)
      touched = touched || rot.i == j || rot.j == j;
    if (!touched) continue;  // untouched coordinates have ratio exactly 1
    e.assign(j_total, 0.0);
    e[j - 1] = 1.0;
    const std::vector<double> ge = cov_apply(cov, e);
    const double ratio = norm2(ge) / gamma_j;
    if (!std::isfinite(ratio) || ratio <= 0.0) {
      std::ostringstream os;
      os << "mixing couples coordinate " << j
         << " across unrepresentable eigenvalue scales";
      throw std::invalid_argument(os.str());
    }
    factor = std::max({factor, ratio, 1.0 / ratio});
  }
  if (factor > declared_d * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "measured class factor " << factor << " exceeds declared d = " << declared_d;
    throw std::invalid_argument(os.str());
  }
  cov.d_factor = factor;
  return cov;
}

Matrix cov_matrix(const CovSpec& cov, std::size_t m) {
  const std::size_t j_total = cov.truncation();
  if (m > j_total) throw std::invalid_argument("cov_matrix: m beyond truncation");
  Matrix full(j_total, j_total);
  for (std::size_t j = 0; j < j_total; ++j) full(j, j) = cov.eigenvalues[j];
  // Conjugate by each rotation in mixing order: Gamma = Q Lambda Q^t.
  for (const GivensRotation& rot : cov.mixing) {
    const double c = std::cos(rot.theta);
    const double s = std::sin(rot.theta);
    const std::size_t p = rot.i - 1;
    const std::size_t q = rot.j - 1;
    for (std::size_t k = 0; k < j_total; ++k) {  // rows
      const double vp = full(p, k);
      const double vq = full(q, k);
      full(p, k) = c * vp - s * vq;
      full(q, k) = s * vp + c * vq;
    }
    for (std::size_t k = 0; k < j_total; ++k) {  // columns
      const double vp = full(k, p);
      const double vq = full(k, q);
      full(k, p) = c * vp - s * vq;
      full(k, q) = s * vp + c * vq;
    }
  }
  Matrix lead(m, m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) lead(i, j) = full(i, j);
  return lead;
}

std::vector<double> cov_apply(const CovSpec& cov, std::span<const double> v) {
  if (v.size() != cov.truncation())
    throw std::invalid_argument("cov_apply: vector length differs from truncation");
  std::vector<double> w(v.begin(), v.end());
  // Q^t: inverse rotations in reverse order.
  for (auto it = cov.mixing.rbegin(); it != cov.mixing.rend(); ++it) {
    GivensRotation inv = *it;
    inv.theta = -inv.theta;
    apply_rotation(w, inv);
  }
  for (std::size_t j = 0; j < w.size(); ++j) w[j] *= cov.eigenvalues[j];
  for (const GivensRotation& rot : cov.mixing) apply_rotation(w, rot);
  return w;
}

Sample draw_sample(const SlopeSpec& slope, const CovSpec& cov, const NoiseSpec& noise,
                   std::size_t n, std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("sample size must be >= 1");
  if (slope.truncation() != cov.truncation())
    throw std::invalid_argument("slope and covariance truncations differ");
  if (noise.sigma < 0.0) throw std::invalid_argument("sigma must be >= 0");
  const std::size_t j_total = cov.truncation();

  std::vector<double> sqrt_lambda(j_total);
  for (std::size_t j = 0; j < j_total; ++j)
    sqrt_lambda[j] = std::sqrt(cov.eigenvalues[j]);

  Sample sample;
  sample.n = n;
  sample.width = j_total;
  sample.y.resize(n);
  sample.x.resize(n * j_total);

  Rng rng(seed);
  std::vector<double> v(j_total);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < j_total; ++j)
      v[j] = sqrt_lambda[j] * draw_law(rng, cov.regressor_law);
    for (const GivensRotation& rot : cov.mixing) apply_rotation(v, rot);
    double yi = 0.0;
    for (std::size_t j = 0; j < j_total; ++j) {
      sample.x[i * j_total + j] = v[j];
      yi += slope.coeffs[j] * v[j];
    }
    sample.y[i] = yi + noise.sigma * draw_law(rng, noise.law);
  }
  return sample;
}

Sample load_sample(const std::string& curves_path, const std::string& responses_path,
                   std::size_t m_project) {
  const csv::Table curves = csv::read(curves_path);
  const csv::Table responses = csv::read(responses_path);

  if (responses.header.size() != 1 || responses.header[0] != "y")
    throw ingest_error(responses_path + ": expected a single column named 'y'");
  if (curves.rows.size() != responses.rows.size()) {
    std::ostringstream os;
    os << "row count mismatch: " << curves.rows.size() << " curves in "
       << curves_path << " vs " << responses.rows.size() << " responses in "
       << responses_path;
    throw ingest_error(os.str());
  }
  if (curves.rows.empty()) throw ingest_error(curves_path + ": no curve rows");

  // The curves header carries the grid points themselves.
  std::vector<double> grid_points(curves.header.size());
  for (std::size_t c = 0; c < curves.header.size(); ++c) {
    try {
      std::size_t used = 0;
      grid_points[c] = std::stod(curves.header[c], &used);
      if (used != curves.header[c].size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw ingest_error(curves_path + ": header cell " + std::to_string(c + 1) +
                         " is not a grid point");
    }
  }
  Grid grid = Grid::from_points(std::move(grid_points));

  Sample sample;
  sample.n = curves.rows.size();
  sample.width = m_project;
  sample.x.resize(sample.n * m_project);
  sample.y.resize(sample.n);

  for (std::size_t i = 0; i < sample.n; ++i) {
    Curve curve{grid, curves.rows[i]};
    const std::vector<double> coeffs = project_curve(curve, m_project);
    for (std::size_t j = 0; j < m_project; ++j) sample.x[i * m_project + j] = coeffs[j];
    sample.y[i] = responses.rows[i][0];
  }
  double mean = 0.0;
  for (double v : sample.y) mean += v;
  mean /= static_cast<double>(sample.n);
  for (double& v : sample.y) v -= mean;
  return sample;
}

double truncation_tail_bound(const SlopeSpec& slope, const CovSpec& cov,
                             const NoiseSpec& noise, const WeightConfig& config) {
  const std::size_t j_total = slope.truncation();
  // Var(Y) carried by the truncation (exact for the truncated model).
  const std::vector<double> gb = cov_apply(cov, slope.coeffs);
  const double var_y = noise.sigma * noise.sigma + dot(gb, slope.coeffs);
  if (var_y <= 0.0) return 0.0;

  // Integral/geometric bound on sum_{j>J} gamma_j beta_j^2 for the closed
  // forms, treating the profile as if continued past the truncation.
  double tail = 0.0;
  const WeightFamily& f = config.family;
  const double j1 = static_cast<double>(j_total + 1);
  const double beta_edge = std::abs(slope.coeffs.back());
  if (f.kind == Family::PP || f.kind == Family::EP) {
    // gamma ~ x^{-2a}; profile bounded by its edge value times decay.
    const double expo = 2.0 * f.a + 2.0;  // beta_j^2 decays at least like j^{-2}
    tail = beta_edge * beta_edge * std::pow(j1, 1.0 - expo) / (expo - 1.0);
  } else if (f.kind == Family::PE) {
    const double lg = log_weight_at(config, Seq::Gamma, j_total + 1);
    const double g1 = (lg < -745.0) ? 0.0 : std::exp(lg);
    tail = beta_edge * beta_edge * g1 * 2.0;  // super-geometric decay
  }
  return tail / var_y;
}

}  // namespace flr
