#include "flr/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

#include "flr/adapt.hpp"
#include "flr/csv.hpp"
#include "flr/errors.hpp"
#include "flr/estimator.hpp"
#include "flr/gram.hpp"
#include "flr/rng.hpp"

namespace flr {

namespace {

constexpr std::size_t kOracleScanMax = 512;
constexpr std::uint64_t kCalibrationTag = 0x00c0ffee;
constexpr std::size_t kCalibrationReps = 50;

void run_tasks(std::size_t count, std::size_t threads,
               const std::function<void(std::size_t)>& task) {
  if (threads == 0) threads = std::max<std::size_t>(1, std::thread::hardware_concurrency());
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr first_error;
  std::mutex error_mutex;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&]() {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          task(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

double mean_of(std::span<const double> v) {
  return pairwise_sum(v) / static_cast<double>(v.size());
}

double std_error_of(std::span<const double> v, double mean) {
  if (v.size() < 2) return 0.0;
  std::vector<double> sq(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) sq[i] = (v[i] - mean) * (v[i] - mean);
  const double var = pairwise_sum(sq) / static_cast<double>(v.size() - 1);
  return std::sqrt(var / static_cast<double>(v.size()));
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t k = v.size();
  return (k % 2 == 1) ? v[k / 2] : 0.5 * (v[k / 2 - 1] + v[k / 2]);
}

// Per-replication raw outcome, aggregated after the pool joins.
struct RepOutcome {
  double adaptive_risk = 0.0;
  double adaptive_m = 0.0;
  bool adaptive_thresholded = false;
  double oracle_risk = 0.0;
  bool oracle_thresholded = false;
  std::vector<double> fixed_risks;       // m = 1..omega bound
  std::vector<char> fixed_thresholded;
  bool m_sandwich = false;
  bool pen_sandwich = false;
};

struct LevelTheory {
  std::size_t m_star = 1;
  std::size_t m_minus = 1;
  std::size_t m_plus = 1;
  std::vector<double> pens;  // population penalties 1..m_plus
};

}  // namespace

double pairwise_sum(std::span<const double> values) {
  const std::size_t k = values.size();
  if (k == 0) return 0.0;
  if (k <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = k / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

void validate(const StudySpec& spec) {
  validate(spec.config);
  if (spec.n_grid.empty()) throw std::invalid_argument("n grid is empty");
  for (std::size_t i = 0; i < spec.n_grid.size(); ++i) {
    if (spec.n_grid[i] < 2) throw std::invalid_argument("grid n must be >= 2");
    if (i > 0 && spec.n_grid[i] <= spec.n_grid[i - 1])
      throw std::invalid_argument("n grid must be strictly increasing");
  }
  if (spec.replications < 2) throw std::invalid_argument("need at least 2 replications");
  if (!(spec.kappa > 0.0)) throw std::invalid_argument("kappa must be positive");
  if (spec.noise.sigma < 0.0) throw std::invalid_argument("sigma must be >= 0");
  if (spec.slope_profile != "smooth_poly" && spec.slope_profile != "analytic" &&
      spec.slope_profile != "custom")
    throw std::invalid_argument("unknown slope profile '" + spec.slope_profile + "'");
  if (spec.slope_profile == "custom" && spec.slope_coeffs.empty())
    throw std::invalid_argument("custom slope profile needs coefficients");
  if (spec.cov_kind == CovKind::Mixed && spec.rotations.empty())
    throw std::invalid_argument("mixed covariance needs rotations");
}

std::size_t resolve_truncation(const StudySpec& spec) {
  if (spec.truncation != 0) return spec.truncation;
  const std::size_t n_max = spec.n_grid.back();
  const std::size_t bound = omega_upper_bound(n_max, spec.config);
  return std::max({std::size_t{128}, 4 * bound, fourth_root_floor(n_max)});
}

SlopeSpec build_slope(const StudySpec& spec, std::size_t j_total) {
  if (spec.slope_profile == "custom") {
    std::vector<double> c = spec.slope_coeffs;
    c.resize(j_total, 0.0);
    return make_slope_custom(spec.config, std::move(c));
  }
  const SlopeProfile profile = spec.slope_profile == "analytic"
                                   ? SlopeProfile::Analytic
                                   : SlopeProfile::SmoothPoly;
  return make_slope(spec.config, profile, j_total);
}

CovSpec build_cov(const StudySpec& spec, std::size_t j_total) {
  if (spec.cov_kind == CovKind::Diagonal)
    return make_cov_diagonal(spec.config, j_total, spec.regressor_law);
  return make_cov_mixed(spec.config, j_total, spec.rotations, spec.declared_d,
                        spec.regressor_law);
}

const RiskRow* RiskTable::find(std::size_t n, const std::string& method) const {
  for (const RiskRow& row : rows)
    if (row.n == n && row.method == method) return &row;
  return nullptr;
}

StudyResult run_study(const StudySpec& spec) {
  validate(spec);
  const std::size_t j_total = resolve_truncation(spec);
  const SlopeSpec slope = build_slope(spec, j_total);
  const CovSpec cov = build_cov(spec, j_total);
  if (truncation_tail_bound(slope, cov, spec.noise, spec.config) > 1e-6)
    throw std::invalid_argument("truncation too short: neglected tail above 1e-6 of Var(Y)");

  // Truth-side quantities, once per grid level.
  std::vector<LevelTheory> theory(spec.n_grid.size());
  for (std::size_t li = 0; li < spec.n_grid.size(); ++li) {
    const std::size_t n = spec.n_grid[li];
    theory[li].m_star = oracle_mstar(n, spec.config, kOracleScanMax).m_star;
    const DiamondQuantities q = diamond_quantities(n, spec.config);
    theory[li].m_minus = q.lower_bound;
    theory[li].m_plus = q.upper_bound;
    theory[li].pens = population_penalty_prefix(q.upper_bound, slope, cov, spec.noise,
                                                spec.config, spec.kappa, n);
  }

  const std::size_t reps = spec.replications;
  std::vector<std::vector<RepOutcome>> outcomes(spec.n_grid.size());
  for (auto& v : outcomes) v.resize(reps);

  run_tasks(spec.n_grid.size() * reps, spec.threads, [&](std::size_t task) {
    const std::size_t li = task / reps;
    const std::size_t rep = task % reps;
    const std::size_t n = spec.n_grid[li];
    const LevelTheory& th = theory[li];

    const Sample sample = draw_sample(slope, cov, spec.noise, n,
                                      substream_seed(spec.seed, n, rep));
    const std::size_t m_cap =
        std::min(std::max(fourth_root_floor(n), th.m_star), sample.width);
    const NestedGram gram = NestedGram::accumulate(sample, m_cap);

    RepOutcome& out = outcomes[li][rep];
    const SelectionResult sel = select_dimension_on(gram, spec.config, spec.kappa);
    out.adaptive_risk = omega_risk_sq(sel.estimate, slope, spec.config);
    out.adaptive_m = static_cast<double>(sel.selected_m);
    out.adaptive_thresholded = sel.estimate.thresholded;

    const GalerkinEstimate oracle =
        threshold_estimate(gram, std::min(th.m_star, m_cap));
    out.oracle_risk = omega_risk_sq(oracle, slope, spec.config);
    out.oracle_thresholded = oracle.thresholded;

    const std::size_t fixed_bound = sel.table.omega_bound;
    out.fixed_risks.resize(fixed_bound);
    out.fixed_thresholded.resize(fixed_bound);
    for (std::size_t m = 1; m <= fixed_bound; ++m) {
      const GalerkinEstimate est = threshold_estimate(gram, m);
      out.fixed_risks[m - 1] = omega_risk_sq(est, slope, spec.config);
      out.fixed_thresholded[m - 1] = est.thresholded ? 1 : 0;
    }

    out.m_sandwich =
        th.m_minus <= sel.table.rule_bound && sel.table.rule_bound <= th.m_plus;
    out.pen_sandwich = false;
    const PenaltyTable wide =
        penalty_table_upto(gram, spec.config, spec.kappa, th.m_plus);
    if (wide.selection_bound >= th.m_plus) {
      bool ok = true;
      for (std::size_t k = 1; k <= th.m_plus; ++k) {
        const double lo = th.pens[k - 1];
        const double hi = 72.0 * th.pens[k - 1];
        const double hat = wide.pen(k);
        if (!(lo <= hat && hat <= hi)) {
          ok = false;
          break;
        }
      }
      out.pen_sandwich = ok;
    }
  });

  StudyResult result;
  for (std::size_t li = 0; li < spec.n_grid.size(); ++li) {
    const std::size_t n = spec.n_grid[li];
    const std::vector<RepOutcome>& level = outcomes[li];

    std::vector<double> risk(reps), mhat(reps), fail(reps);
    for (std::size_t r = 0; r < reps; ++r) {
      risk[r] = level[r].adaptive_risk;
      mhat[r] = level[r].adaptive_m;
      fail[r] = level[r].adaptive_thresholded ? 1.0 : 0.0;
    }
    RiskRow adaptive{n, "adaptive", mean_of(risk), 0.0, mean_of(mhat),
                     median_of(mhat), mean_of(fail)};
    adaptive.std_error = std_error_of(risk, adaptive.mean_risk);
    result.risks.rows.push_back(adaptive);

    for (std::size_t r = 0; r < reps; ++r) {
      risk[r] = level[r].oracle_risk;
      fail[r] = level[r].oracle_thresholded ? 1.0 : 0.0;
    }
    const double m_star = static_cast<double>(theory[li].m_star);
    RiskRow oracle{n, "oracle_mstar", mean_of(risk), 0.0, m_star, m_star,
                   mean_of(fail)};
    oracle.std_error = std_error_of(risk, oracle.mean_risk);
    result.risks.rows.push_back(oracle);

    // Smallest fixed dimension with the best mean risk across replications.
    const std::size_t fixed_bound = level[0].fixed_risks.size();
    std::size_t best_m = 1;
    double best_mean = std::numeric_limits<double>::infinity();
    std::vector<double> per_m(reps);
    for (std::size_t m = 1; m <= fixed_bound; ++m) {
      for (std::size_t r = 0; r < reps; ++r) per_m[r] = level[r].fixed_risks[m - 1];
      const double mean = mean_of(per_m);
      if (mean < best_mean) {
        best_mean = mean;
        best_m = m;
      }
    }
    for (std::size_t r = 0; r < reps; ++r) {
      per_m[r] = level[r].fixed_risks[best_m - 1];
      fail[r] = level[r].fixed_thresholded[best_m - 1] ? 1.0 : 0.0;
    }
    RiskRow fixed{n,
                  "best_fixed_empirical",
                  best_mean,
                  std_error_of(per_m, best_mean),
                  static_cast<double>(best_m),
                  static_cast<double>(best_m),
                  mean_of(fail)};
    result.risks.rows.push_back(fixed);

    EventRow ev;
    ev.n = n;
    std::vector<double> ms(reps), ps(reps);
    for (std::size_t r = 0; r < reps; ++r) {
      ms[r] = level[r].m_sandwich ? 1.0 : 0.0;
      ps[r] = level[r].pen_sandwich ? 1.0 : 0.0;
      fail[r] = level[r].adaptive_thresholded ? 1.0 : 0.0;
    }
    ev.freq_m_sandwich = mean_of(ms);
    ev.freq_pen_sandwich = mean_of(ps);
    ev.freq_threshold_fail = mean_of(fail);
    result.events.rows.push_back(ev);
  }
  return result;
}

RateFit fit_rate(const RiskTable& table, const std::string& method, RateAxis axis) {
  std::vector<double> x, y;
  for (const RiskRow& row : table.rows) {
    if (row.method != method) continue;
    if (!(row.mean_risk > 0.0))
      throw std::invalid_argument("fit_rate: nonpositive mean risk at n = " +
                                  std::to_string(row.n));
    const double ln = std::log(static_cast<double>(row.n));
    x.push_back(axis == RateAxis::LogN ? ln : std::log(ln));
    y.push_back(std::log(row.mean_risk));
  }
  if (x.size() < 4) throw std::invalid_argument("fit_rate: need at least 4 grid points");
  const double n = static_cast<double>(x.size());
  const double mx = pairwise_sum(x) / n;
  const double my = pairwise_sum(y) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  RateFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - fit.intercept - fit.slope * x[i];
    rss += r * r;
  }
  fit.std_error = std::sqrt(rss / (n - 2.0) / sxx);
  return fit;
}

double calibrate_kappa(const StudySpec& spec, std::span<const double> kappa_grid) {
  validate(spec);
  if (kappa_grid.size() < 3)
    throw std::invalid_argument("calibration grid needs at least 3 values");
  for (std::size_t i = 0; i < kappa_grid.size(); ++i) {
    if (!(kappa_grid[i] > 0.0))
      throw std::invalid_argument("calibration kappas must be positive");
    if (i > 0 && !(kappa_grid[i] < kappa_grid[i - 1]))
      throw std::invalid_argument("calibration grid must be strictly decreasing");
  }
  const std::size_t j_total = resolve_truncation(spec);
  const SlopeSpec slope = build_slope(spec, j_total);
  const CovSpec cov = build_cov(spec, j_total);
  const std::size_t n = spec.n_grid[spec.n_grid.size() / 2];

  // Common random numbers across the grid: the medians move only with kappa.
  std::vector<NestedGram> grams;
  grams.reserve(kCalibrationReps);
  for (std::size_t rep = 0; rep < kCalibrationReps; ++rep) {
    const Sample sample = draw_sample(slope, cov, spec.noise, n,
                                      substream_seed(spec.seed, kCalibrationTag, rep));
    grams.push_back(NestedGram::accumulate(sample, fourth_root_floor(n)));
  }
  std::vector<double> medians(kappa_grid.size());
  for (std::size_t gi = 0; gi < kappa_grid.size(); ++gi) {
    std::vector<double> selected(kCalibrationReps);
    for (std::size_t rep = 0; rep < kCalibrationReps; ++rep) {
      selected[rep] = static_cast<double>(
          select_dimension_on(grams[rep], spec.config, kappa_grid[gi]).selected_m);
    }
    medians[gi] = median_of(std::move(selected));
  }
  for (std::size_t gi = 0; gi + 1 < kappa_grid.size(); ++gi) {
    if (std::abs(medians[gi + 1] - medians[gi]) > 1.0) return kappa_grid[gi];
  }
  return kappa_grid.back();
}

// ---- persistence -----------------------------------------------------------

namespace {

const std::vector<std::string> kRiskHeader = {
    "n",         "method",      "mean_risk",           "stderr",
    "mean_mhat", "median_mhat", "threshold_fail_rate"};
const std::vector<std::string> kEventHeader = {
    "n", "freq_M_sandwich", "freq_pen_sandwich", "freq_threshold_fail"};

void check_header(const std::vector<std::string>& have,
                  const std::vector<std::string>& want, const std::string& path) {
  for (const std::string& col : want) {
    if (std::find(have.begin(), have.end(), col) == have.end())
      throw ingest_error(path + ": missing column '" + col + "'");
  }
  if (have != want) throw ingest_error(path + ": unexpected column layout");
}

}  // namespace

void write_risk_table(const std::string& path, const RiskTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ingest_error("cannot write '" + path + "'");
  out << "n,method,mean_risk,stderr,mean_mhat,median_mhat,threshold_fail_rate\n";
  for (const RiskRow& r : table.rows) {
    out << r.n << ',' << r.method << ',' << csv::format_double(r.mean_risk) << ','
        << csv::format_double(r.std_error) << ',' << csv::format_double(r.mean_mhat)
        << ',' << csv::format_double(r.median_mhat) << ','
        << csv::format_double(r.threshold_fail_rate) << '\n';
  }
  if (!out) throw ingest_error("write failed for '" + path + "'");
}

RiskTable read_risk_table(const std::string& path) {
  const csv::RawTable raw = csv::read_raw(path);
  check_header(raw.header, kRiskHeader, path);
  RiskTable table;
  for (std::size_t i = 0; i < raw.rows.size(); ++i) {
    const std::vector<std::string>& cells = raw.rows[i];
    const std::size_t line = i + 2;
    RiskRow row;
    row.n = static_cast<std::size_t>(csv::parse_cell(cells[0], path, line, 1));
    row.method = cells[1];
    row.mean_risk = csv::parse_cell(cells[2], path, line, 3);
    row.std_error = csv::parse_cell(cells[3], path, line, 4);
    row.mean_mhat = csv::parse_cell(cells[4], path, line, 5);
    row.median_mhat = csv::parse_cell(cells[5], path, line, 6);
    row.threshold_fail_rate = csv::parse_cell(cells[6], path, line, 7);
    table.rows.push_back(std::move(row));
  }
  return table;
}

void write_events(const std::string& path, const EventDiagnostics& events) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ingest_error("cannot write '" + path + "'");
  out << "n,freq_M_sandwich,freq_pen_sandwich,freq_threshold_fail\n";
  for (const EventRow& r : events.rows) {
    out << r.n << ',' << csv::format_double(r.freq_m_sandwich) << ','
        << csv::format_double(r.freq_pen_sandwich) << ','
        << csv::format_double(r.freq_threshold_fail) << '\n';
  }
  if (!out) throw ingest_error("write failed for '" + path + "'");
}

EventDiagnostics read_events(const std::string& path) {
  const csv::RawTable raw = csv::read_raw(path);
  check_header(raw.header, kEventHeader, path);
  EventDiagnostics events;
  for (std::size_t i = 0; i < raw.rows.size(); ++i) {
    const std::vector<std::string>& cells = raw.rows[i];
    const std::size_t line = i + 2;
    EventRow row;
    row.n = static_cast<std::size_t>(csv::parse_cell(cells[0], path, line, 1));
    row.freq_m_sandwich = csv::parse_cell(cells[1], path, line, 2);
    row.freq_pen_sandwich = csv::parse_cell(cells[2], path, line, 3);
    row.freq_threshold_fail = csv::parse_cell(cells[3], path, line, 4);
    events.rows.push_back(row);
  }
  return events;
}

namespace {

std::string family_name(Family kind) {
  switch (kind) {
    case Family::PP: return "pp";
    case Family::EP: return "ep";
    case Family::PE: return "pe";
    case Family::Custom: return "custom";
  }
  return "pp";
}

Family family_from_name(const std::string& name) {
  if (name == "pp") return Family::PP;
  if (name == "ep") return Family::EP;
  if (name == "pe") return Family::PE;
  if (name == "custom") return Family::Custom;
  throw std::invalid_argument("unknown family '" + name + "'");
}

std::string law_name(Law law) {
  switch (law) {
    case Law::Gaussian: return "gaussian";
    case Law::ScaledUniform: return "scaled_uniform";
    case Law::ScaledLaplace: return "scaled_laplace";
  }
  return "gaussian";
}

Law law_from_name(const std::string& name) {
  if (name == "gaussian") return Law::Gaussian;
  if (name == "scaled_uniform") return Law::ScaledUniform;
  if (name == "scaled_laplace") return Law::ScaledLaplace;
  throw std::invalid_argument("unknown law '" + name + "'");
}

}  // namespace

std::string study_to_json(const StudySpec& spec) {
  nlohmann::json j;
  j["family"] = family_name(spec.config.family.kind);
  j["s"] = spec.config.family.s;
  j["p"] = spec.config.family.p;
  j["a"] = spec.config.family.a;
  if (spec.config.family.kind == Family::Custom) {
    j["tables"] = {{"omega", spec.config.family.tables.omega},
                   {"b", spec.config.family.tables.b},
                   {"gamma", spec.config.family.tables.gamma}};
  }
  j["r"] = spec.config.r;
  j["d"] = spec.config.d;
  j["slope_profile"] = spec.slope_profile;
  if (!spec.slope_coeffs.empty()) j["slope_coeffs"] = spec.slope_coeffs;
  j["cov"] = spec.cov_kind == CovKind::Diagonal ? "diagonal" : "mixed";
  if (spec.cov_kind == CovKind::Mixed) {
    j["rotations"] = nlohmann::json::array();
    for (const GivensRotation& rot : spec.rotations)
      j["rotations"].push_back({{"i", rot.i}, {"j", rot.j}, {"theta", rot.theta}});
    j["declared_d"] = spec.declared_d;
  }
  j["regressor_law"] = law_name(spec.regressor_law);
  j["noise_law"] = law_name(spec.noise.law);
  j["sigma"] = spec.noise.sigma;
  j["n_grid"] = spec.n_grid;
  j["replications"] = spec.replications;
  j["kappa"] = spec.kappa;
  j["seed"] = spec.seed;
  j["threads"] = spec.threads;
  j["truncation"] = spec.truncation;
  j["out_dir"] = spec.out_dir;
  return j.dump(2);
}

StudySpec study_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("study config: ") + e.what());
  }
  StudySpec spec;
  spec.config.family.kind = family_from_name(j.at("family").get<std::string>());
  spec.config.family.s = j.value("s", 0.0);
  spec.config.family.p = j.value("p", 0.0);
  spec.config.family.a = j.value("a", 0.0);
  if (spec.config.family.kind == Family::Custom) {
    const nlohmann::json& t = j.at("tables");
    spec.config.family.tables.omega = t.at("omega").get<std::vector<double>>();
    spec.config.family.tables.b = t.at("b").get<std::vector<double>>();
    spec.config.family.tables.gamma = t.at("gamma").get<std::vector<double>>();
  }
  spec.config.r = j.value("r", 1.0);
  spec.config.d = j.value("d", 1.0);
  validate(spec.config);
  spec.slope_profile = j.value("slope_profile", std::string("smooth_poly"));
  if (j.contains("slope_coeffs"))
    spec.slope_coeffs = j.at("slope_coeffs").get<std::vector<double>>();
  const std::string cov = j.value("cov", std::string("diagonal"));
  if (cov == "diagonal") {
    spec.cov_kind = CovKind::Diagonal;
  } else if (cov == "mixed") {
    spec.cov_kind = CovKind::Mixed;
    for (const nlohmann::json& rj : j.at("rotations")) {
      spec.rotations.push_back({rj.at("i").get<std::size_t>(),
                                rj.at("j").get<std::size_t>(),
                                rj.at("theta").get<double>()});
    }
    spec.declared_d = j.value("declared_d", spec.config.d);
  } else {
    throw std::invalid_argument("unknown covariance kind '" + cov + "'");
  }
  spec.regressor_law = law_from_name(j.value("regressor_law", std::string("gaussian")));
  spec.noise.law = law_from_name(j.value("noise_law", std::string("gaussian")));
  spec.noise.sigma = j.value("sigma", 0.5);
  spec.n_grid = j.at("n_grid").get<std::vector<std::size_t>>();
  spec.replications = j.at("replications").get<std::size_t>();
  spec.kappa = j.value("kappa", 96.0);
  spec.seed = j.value("seed", std::uint64_t{1});
  spec.threads = j.value("threads", std::size_t{0});
  spec.truncation = j.value("truncation", std::size_t{0});
  spec.out_dir = j.value("out_dir", std::string("out"));
  validate(spec);
  return spec;
}

StudySpec load_study_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ingest_error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return study_from_json(buf.str());
}

namespace {

void write_plot_dat(const std::string& path, const RiskTable& table,
                    const std::vector<std::size_t>& grid) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ingest_error("cannot write '" + path + "'");
  out << "# n adaptive oracle_mstar best_fixed_empirical\n";
  for (std::size_t n : grid) {
    out << n;
    for (const char* method : {"adaptive", "oracle_mstar", "best_fixed_empirical"}) {
      const RiskRow* row = table.find(n, method);
      out << ' ' << csv::format_double(row ? row->mean_risk : 0.0);
    }
    out << '\n';
  }
}

void write_plot_svg(const std::string& path, const RiskTable& table,
                    const std::vector<std::size_t>& grid) {
  const int w = 640, h = 480, margin = 60;
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const RiskRow& row : table.rows) {
    if (!(row.mean_risk > 0.0)) continue;
    xmin = std::min(xmin, std::log(static_cast<double>(row.n)));
    xmax = std::max(xmax, std::log(static_cast<double>(row.n)));
    ymin = std::min(ymin, std::log(row.mean_risk));
    ymax = std::max(ymax, std::log(row.mean_risk));
  }
  if (xmax <= xmin) xmax = xmin + 1.0;
  if (ymax <= ymin) ymax = ymin + 1.0;
  auto px = [&](double lx) {
    return margin + (lx - xmin) / (xmax - xmin) * (w - 2 * margin);
  };
  auto py = [&](double ly) {
    return h - margin - (ly - ymin) / (ymax - ymin) * (h - 2 * margin);
  };
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ingest_error("cannot write '" + path + "'");
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='" << h
      << "'>\n<rect width='100%' height='100%' fill='white'/>\n";
  out << "<line x1='" << margin << "' y1='" << h - margin << "' x2='" << w - margin
      << "' y2='" << h - margin << "' stroke='black'/>\n";
  out << "<line x1='" << margin << "' y1='" << margin << "' x2='" << margin
      << "' y2='" << h - margin << "' stroke='black'/>\n";
  out << "<text x='" << w / 2 << "' y='" << h - 15
      << "' text-anchor='middle' font-size='14'>log n</text>\n";
  out << "<text x='18' y='" << h / 2
      << "' text-anchor='middle' font-size='14' transform='rotate(-90 18 " << h / 2
      << ")'>log mean risk</text>\n";
  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c"};
  const char* methods[] = {"adaptive", "oracle_mstar", "best_fixed_empirical"};
  for (int s = 0; s < 3; ++s) {
    out << "<polyline fill='none' stroke='" << colors[s] << "' stroke-width='2' points='";
    for (std::size_t n : grid) {
      const RiskRow* row = table.find(n, methods[s]);
      if (!row || !(row->mean_risk > 0.0)) continue;
      out << px(std::log(static_cast<double>(n))) << ',' << py(std::log(row->mean_risk))
          << ' ';
    }
    out << "'/>\n";
    out << "<text x='" << w - margin + 4 << "' y='" << margin + 18 * (s + 1)
        << "' font-size='11' fill='" << colors[s] << "' text-anchor='end'>" << methods[s]
        << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace

void write_study_outputs(const StudySpec& spec, const StudyResult& result) {
  std::filesystem::create_directories(spec.out_dir);
  const std::filesystem::path dir(spec.out_dir);
  write_risk_table((dir / "risk_table.csv").string(), result.risks);
  write_events((dir / "events.csv").string(), result.events);
  std::ofstream js(dir / "study.json", std::ios::binary);
  if (!js) throw ingest_error("cannot write study.json");
  js << study_to_json(spec) << '\n';
  write_plot_dat((dir / "risk_plot.dat").string(), result.risks, spec.n_grid);
  write_plot_svg((dir / "risk_plot.svg").string(), result.risks, spec.n_grid);
}

}  // namespace flr
