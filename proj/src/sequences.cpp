#include "flr/sequences.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace flr {

namespace {

// exp arguments outside this window are not representable as positive
// doubles; reported as range errors rather than returning inf or 0.
constexpr double kExpOverflow = 700.0;
constexpr double kExpUnderflow = -745.0;

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

const std::vector<double>& table_for(const CustomTables& t, Seq which) {
  switch (which) {
    case Seq::Omega: return t.omega;
    case Seq::B: return t.b;
    default: return t.gamma;
  }
}

void validate_table(const std::vector<double>& t, const char* name) {
  std::ostringstream os;
  if (t.empty()) {
    os << "custom table " << name << " is empty";
    throw std::invalid_argument(os.str());
  }
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!(t[i] > 0.0) || !std::isfinite(t[i])) {
      os << "custom table " << name << " entry " << (i + 1)
         << " is not strictly positive and finite";
      throw std::invalid_argument(os.str());
    }
  }
}

}  // namespace

WeightConfig make_pp(double s, double p, double a, double r, double d) {
  WeightConfig c{{Family::PP, s, p, a, {}}, r, d};
  validate(c);
  return c;
}

WeightConfig make_ep(double s, double p, double a, double r, double d) {
  WeightConfig c{{Family::EP, s, p, a, {}}, r, d};
  validate(c);
  return c;
}

WeightConfig make_pe(double s, double p, double a, double r, double d) {
  WeightConfig c{{Family::PE, s, p, a, {}}, r, d};
  validate(c);
  return c;
}

WeightConfig make_custom(CustomTables tables, double r, double d) {
  WeightConfig c{{Family::Custom, 0.0, 0.0, 0.0, std::move(tables)}, r, d};
  validate(c);
  return c;
}

void validate(const WeightConfig& config) {
  require(std::isfinite(config.r) && config.r > 0.0, "r must be positive");
  require(std::isfinite(config.d) && config.d >= 1.0, "d must be >= 1");
  const WeightFamily& f = config.family;
  switch (f.kind) {
    case Family::PP:
      require(f.p > 0.0, "PP requires p > 0");
      require(f.a > 0.5, "PP requires a > 1/2");
      require(f.p > f.s && f.s > -2.0 * f.a, "PP requires p > s > -2a");
      break;
    case Family::EP:
      require(f.p > 0.0, "EP requires p > 0");
      require(f.a > 0.5, "EP requires a > 1/2");
      require(f.s > -2.0 * f.a, "EP requires s > -2a");
      break;
    case Family::PE:
      require(f.p > 0.0, "PE requires p > 0");
      require(f.a > 0.0, "PE requires a > 0");
      require(f.p > f.s, "PE requires p > s");
      break;
    case Family::Custom:
      validate_table(f.tables.omega, "omega");
      validate_table(f.tables.b, "b");
      validate_table(f.tables.gamma, "gamma");
      break;
  }
}

double log_weight_at(const WeightConfig& config, Seq which, std::size_t j) {
  if (j == 0) throw std::invalid_argument("weight index j must be >= 1");
  const WeightFamily& f = config.family;
  if (f.kind == Family::Custom) {
    const std::vector<double>& t = table_for(f.tables, which);
    if (j > t.size()) {
      std::ostringstream os;
      os << "custom weight table has " << t.size() << " entries, index " << j
         << " requested";
      throw std::out_of_range(os.str());
    }
    return std::log(t[j - 1]);
  }
  const double lj = std::log(static_cast<double>(j));
  switch (which) {
    case Seq::Omega:
      return 2.0 * f.s * lj;
    case Seq::B:
      if (f.kind == Family::EP) {
        const double power = std::pow(static_cast<double>(j), 2.0 * f.p);
        if (!std::isfinite(power)) throw std::range_error("b_j exponent overflows");
        return power - 1.0;
      }
      return 2.0 * f.p * lj;
    case Seq::Gamma:
      if (f.kind == Family::PE) {
        const double power = std::pow(static_cast<double>(j), 2.0 * f.a);
        if (!std::isfinite(power)) throw std::range_error("gamma_j exponent overflows");
        return 1.0 - power;
      }
      return -2.0 * f.a * lj;
  }
  return 0.0;  // unreachable
}

double weight_at(const WeightConfig& config, Seq which, std::size_t j) {
  if (j == 0) throw std::invalid_argument("weight index j must be >= 1");
  const WeightFamily& f = config.family;
  if (f.kind == Family::Custom) {
    const std::vector<double>& t = table_for(f.tables, which);
    if (j > t.size()) {
      std::ostringstream os;
      os << "custom weight table has " << t.size() << " entries, index " << j
         << " requested";
      throw std::out_of_range(os.str());
    }
    return t[j - 1];
  }
  const double x = static_cast<double>(j);
  // Polynomial forms go through pow directly; it is exact on the integer
  // cases the selection boundaries compare against.
  const bool exp_b = (which == Seq::B && f.kind == Family::EP);
  const bool exp_gamma = (which == Seq::Gamma && f.kind == Family::PE);
  if (!exp_b && !exp_gamma) {
    double e = 0.0;
    switch (which) {
      case Seq::Omega: e = 2.0 * f.s; break;
      case Seq::B: e = 2.0 * f.p; break;
      case Seq::Gamma: e = -2.0 * f.a; break;
    }
    const double v = std::pow(x, e);
    if (!std::isfinite(v)) throw std::range_error("weight overflows double range");
    if (v <= 0.0) throw std::range_error("weight underflows double range");
    return v;
  }
  const double lv = log_weight_at(config, which, j);
  if (lv > kExpOverflow) throw std::range_error("weight overflows double range");
  if (lv < kExpUnderflow) throw std::range_error("weight underflows double range");
  return std::exp(lv);
}

bool RegularityReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const RegularityCheck& c) { return c.pass; });
}

const RegularityCheck* RegularityReport::find(const std::string& name) const {
  for (const RegularityCheck& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

RegularityReport check_regularity(const WeightConfig& config, std::size_t m_max) {
  if (m_max < 2) throw std::invalid_argument("check_regularity needs m_max >= 2");
  const WeightFamily& f = config.family;
  if (f.kind == Family::Custom) {
    m_max = std::min({m_max, f.tables.omega.size(), f.tables.b.size(),
                      f.tables.gamma.size()});
  }

  std::vector<double> lw(m_max), lb(m_max), lg(m_max);
  for (std::size_t j = 1; j <= m_max; ++j) {
    lw[j - 1] = log_weight_at(config, Seq::Omega, j);
    lb[j - 1] = log_weight_at(config, Seq::B, j);
    lg[j - 1] = log_weight_at(config, Seq::Gamma, j);
  }

  RegularityReport report;
  constexpr double kTol = 1e-12;

  {
    RegularityCheck c{"first-element", true, 0, "b_1 = omega_1 = gamma_1 = 1"};
    if (std::abs(lb[0]) > kTol || std::abs(lw[0]) > kTol || std::abs(lg[0]) > kTol) {
      c.pass = false;
      c.first_fail = 1;
    }
    report.checks.push_back(c);
  }

  // value(j) must be nonincreasing in j; checked on logs.
  auto monotone = [&](std::string name, auto logval, std::string note) {
    RegularityCheck c{std::move(name), true, 0, std::move(note)};
    double prev = logval(std::size_t{0});
    for (std::size_t i = 1; i < m_max; ++i) {
      const double cur = logval(i);
      if (cur > prev + kTol) {
        c.pass = false;
        c.first_fail = i + 1;
        break;
      }
      prev = cur;
    }
    report.checks.push_back(c);
  };

  monotone("b-inv-nonincreasing", [&](std::size_t i) { return -lb[i]; },
           "1/b_j nonincreasing");
  monotone("omega-b-inv-nonincreasing", [&](std::size_t i) { return lw[i] - lb[i]; },
           "omega_j/b_j nonincreasing");
  monotone("gamma-nonincreasing", [&](std::size_t i) { return lg[i]; },
           "gamma_j nonincreasing");
  monotone("gamma-sq-omega-inv-nonincreasing",
           [&](std::size_t i) { return 2.0 * lg[i] - lw[i]; },
           "gamma_j^2/omega_j nonincreasing");

  {
    RegularityCheck c{"gamma-summable", true, 0, ""};
    double partial = 0.0;
    for (std::size_t i = 0; i < m_max; ++i) {
      partial += (lg[i] < kExpUnderflow) ? 0.0 : std::exp(lg[i]);
    }
    std::ostringstream os;
    os << "partial sum of gamma over 1.." << m_max << " = " << partial;
    switch (f.kind) {
      case Family::PP:
      case Family::EP:
        if (!(f.a > 0.5)) {
          c.pass = false;
          c.first_fail = 1;
          os << "; gamma_j = j^{-2a} requires a > 1/2";
        }
        break;
      case Family::PE:
        break;  // exponential decay, always summable
      case Family::Custom:
        os << "; finite table, summability not decidable from a prefix";
        break;
    }
    c.note = os.str();
    report.checks.push_back(c);
  }

  report.limitation =
      "convergence to zero is not verifiable on a finite prefix; only "
      "monotonicity on 1..m_max is checked";
  return report;
}

double weighted_norm_sq(std::span<const double> coeffs, const WeightConfig& config,
                        Seq which) {
  double sum = 0.0;
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    const double c = coeffs[i];
    if (c == 0.0) continue;  // zero terms never touch the weight
    sum += weight_at(config, which, i + 1) * c * c;
  }
  return sum;
}

std::vector<double> weight_prefix(const WeightConfig& config, Seq which,
                                  std::size_t m) {
  std::vector<double> w(m);
  for (std::size_t j = 1; j <= m; ++j) w[j - 1] = weight_at(config, which, j);
  return w;
}

}  // namespace flr
