#include "flr/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "flr/adapt.hpp"
#include "flr/basis.hpp"
#include "flr/csv.hpp"
#include "flr/datagen.hpp"
#include "flr/errors.hpp"
#include "flr/harness.hpp"
#include "flr/rng.hpp"
#include "flr/theory.hpp"

namespace flr::cli {

namespace {

struct FamilyFlags {
  std::string family = "pp";
  double s = 0.0, p = 2.0, a = 1.0, r = 1.0, d = 1.0;

  WeightConfig build() const {
    if (family == "pp") return make_pp(s, p, a, r, d);
    if (family == "ep") return make_ep(s, p, a, r, d);
    if (family == "pe") return make_pe(s, p, a, r, d);
    throw std::invalid_argument("unknown family '" + family +
                                "' (custom tables go through a config file)");
  }
};

void add_family_flags(CLI::App* cmd, FamilyFlags& flags) {
  cmd->add_option("--family", flags.family, "weight family: pp | ep | pe");
  cmd->add_option("--s", flags.s, "risk-norm exponent");
  cmd->add_option("--p", flags.p, "smoothness exponent");
  cmd->add_option("--a", flags.a, "ill-posedness exponent");
  cmd->add_option("--r", flags.r, "slope ellipsoid radius");
  cmd->add_option("--d", flags.d, "covariance class constant");
}

std::string fmt(double v) { return csv::format_double(v); }

// kappa_cal.json written by `calibrate`, consumed by `fit`.
struct Calibration {
  bool found = false;
  double kappa = 0.0;
};

Calibration read_calibration(const std::string& out_dir) {
  const std::filesystem::path path = std::filesystem::path(out_dir) / "kappa_cal.json";
  std::ifstream in(path);
  if (!in) return {};
  nlohmann::json j;
  try {
    in >> j;
    return {true, j.at("kappa").get<double>()};
  } catch (const std::exception&) {
    throw ingest_error("malformed calibration artifact '" + path.string() + "'");
  }
}

int cmd_rates(const FamilyFlags& flags, bool json, std::ostream& out) {
  const RateDescriptor rate = rate_exponent(flags.build());
  if (json) {
    nlohmann::json j;
    switch (rate.kind) {
      case RateKind::NPower: j["kind"] = "n-power"; break;
      case RateKind::NPowerLog: j["kind"] = "n-power-log"; break;
      case RateKind::NInvLogPower: j["kind"] = "n-inv-log-power"; break;
      case RateKind::LogPower: j["kind"] = "log-power"; break;
      case RateKind::LogLogOverN: j["kind"] = "loglog-over-n"; break;
    }
    j["n_exponent"] = rate.n_exponent;
    j["log_exponent"] = rate.log_exponent;
    j["m_star_exponent"] = rate.m_star_exponent;
    out << j.dump(2) << '\n';
  } else {
    out << rate.pretty() << '\n';
  }
  return 0;
}

int cmd_theory(const FamilyFlags& flags, std::size_t n, double sigma, double kappa,
               std::size_t rows, std::ostream& out) {
  const WeightConfig config = flags.build();
  StudySpec spec;
  spec.config = config;
  spec.noise.sigma = sigma;
  spec.n_grid = {n};
  const std::size_t j_total = resolve_truncation(spec);
  const SlopeSpec slope = build_slope(spec, j_total);
  const CovSpec cov = build_cov(spec, j_total);
  if (rows == 0) {
    const DiamondQuantities q = diamond_quantities(n, config);
    rows = std::max<std::size_t>({q.upper_bound, 8});
    // keep the default within the blocks the population covariance can
    // factor (exp-family eigenvalues fall under the pivot tolerance fast)
    const double lg1 = log_weight_at(config, Seq::Gamma, 1);
    std::size_t representable = 1;
    for (std::size_t m = 1; m <= rows; ++m) {
      if (log_weight_at(config, Seq::Gamma, m) - lg1 <= std::log(1e-11)) break;
      representable = m;
    }
    rows = std::min(rows, representable);
  }
  const TheoryReport report =
      theory_report(n, config, slope, cov, spec.noise, kappa, rows);
  out << report.to_json() << '\n';
  return 0;
}

int cmd_gen(StudySpec spec, std::size_t n, std::size_t grid_size, std::ostream& out) {
  spec.n_grid = {n};
  spec.replications = 2;  // irrelevant for generation, keeps the spec valid
  validate(spec);
  const std::size_t j_total = resolve_truncation(spec);
  const SlopeSpec slope = build_slope(spec, j_total);
  const CovSpec cov = build_cov(spec, j_total);
  const Sample sample =
      draw_sample(slope, cov, spec.noise, n, substream_seed(spec.seed, n, 0));

  if (grid_size == 0) grid_size = std::max<std::size_t>(256, 4 * j_total);
  const Grid grid = Grid::uniform01(grid_size);

  std::filesystem::create_directories(spec.out_dir);
  const std::filesystem::path dir(spec.out_dir);

  csv::Table curves;
  curves.header.resize(grid_size);
  for (std::size_t i = 0; i < grid_size; ++i)
    curves.header[i] = csv::format_double(grid.points[i]);
  curves.rows.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Curve c = reconstruct(sample.row(i), grid);
    curves.rows.push_back(c.values);
  }
  csv::write((dir / "curves.csv").string(), curves);

  csv::Table responses;
  responses.header = {"y"};
  for (std::size_t i = 0; i < n; ++i) responses.rows.push_back({sample.y[i]});
  csv::write((dir / "responses.csv").string(), responses);

  nlohmann::json truth;
  truth["slope_coeffs"] = slope.coeffs;
  truth["sigma"] = spec.noise.sigma;
  truth["seed"] = spec.seed;
  std::ofstream tf(dir / "truth.json", std::ios::binary);
  tf << truth.dump(2) << '\n';

  out << "wrote " << n << " curves on " << grid_size << " grid points to "
      << spec.out_dir << "\n";
  return 0;
}

int cmd_fit(const FamilyFlags& flags, const std::string& curves,
            const std::string& responses, double kappa_flag,
            const std::string& assume, const std::string& out_dir, bool json,
            std::ostream& out, std::ostream& err) {
  if (assume != "gaussian" && assume != "moments")
    throw std::invalid_argument("--assume must be 'gaussian' or 'moments'");
  const WeightConfig config = flags.build();

  double kappa = kappa_flag;
  if (!(kappa > 0.0)) {
    const Calibration cal = read_calibration(out_dir);
    if (cal.found) {
      kappa = cal.kappa;
    } else {
      kappa = (assume == "moments") ? kKappaMoment : kKappaGaussian;
      err << "no calibration artifact in '" << out_dir
          << "'; using theoretical default kappa = " << kappa << "\n";
    }
  }

  // Probe the row count first: the projection width follows from n.
  const csv::RawTable raw = csv::read_raw(responses);
  const std::size_t n = raw.rows.size();
  if (n == 0) throw ingest_error(responses + ": no responses");
  const std::size_t m_project = fourth_root_floor(n);
  const Sample sample = load_sample(curves, responses, m_project);

  const SelectionResult sel = select_dimension(sample, config, kappa);

  if (json) {
    nlohmann::json j;
    j["n"] = n;
    j["kappa"] = kappa;
    j["m_hat"] = sel.selected_m;
    j["data_bound"] = sel.table.selection_bound;
    j["omega_bound"] = sel.table.omega_bound;
    j["thresholded"] = sel.estimate.thresholded;
    j["coefficients"] = sel.estimate.coeffs;
    j["contrasts"] = sel.contrasts;
    j["penalties"] = nlohmann::json::array();
    for (std::size_t m = 1; m <= sel.table.selection_bound; ++m) {
      const PenaltyRow& row = sel.table.rows[m - 1];
      j["penalties"].push_back({{"m", m},
                                {"Delta", row.norm_max},
                                {"Lambda", row.log_factor},
                                {"delta", row.dim_factor},
                                {"sigma_sq", row.sigma_sq},
                                {"pen", row.pen}});
    }
    out << j.dump(2) << '\n';
    return 0;
  }

  out << "n = " << n << ", kappa = " << fmt(kappa) << "\n";
  out << "selected m = " << sel.selected_m << " of data bound " << sel.table.selection_bound
      << " (omega bound " << sel.table.omega_bound << ")\n";
  out << "coefficients:";
  for (double c : sel.estimate.coeffs) out << ' ' << fmt(c);
  out << (sel.estimate.thresholded ? " (thresholded)\n" : "\n");
  out << "m Delta Lambda delta sigma_sq pen contrast\n";
  for (std::size_t m = 1; m <= sel.table.selection_bound; ++m) {
    const PenaltyRow& row = sel.table.rows[m - 1];
    out << m << ' ' << fmt(row.norm_max) << ' ' << fmt(row.log_factor) << ' '
        << fmt(row.dim_factor) << ' ' << fmt(row.sigma_sq) << ' ' << fmt(row.pen)
        << ' ' << fmt(sel.contrasts[m - 1]) << '\n';
  }
  return 0;
}

int cmd_study(const StudySpec& spec, bool json, std::ostream& out) {
  const StudyResult result = run_study(spec);
  write_study_outputs(spec, result);
  if (json) {
    nlohmann::json j;
    j["out_dir"] = spec.out_dir;
    j["rows"] = result.risks.rows.size();
    for (const RiskRow& row : result.risks.rows) {
      j["risk"].push_back({{"n", row.n},
                           {"method", row.method},
                           {"mean_risk", row.mean_risk},
                           {"stderr", row.std_error},
                           {"mean_mhat", row.mean_mhat},
                           {"median_mhat", row.median_mhat},
                           {"threshold_fail_rate", row.threshold_fail_rate}});
    }
    out << j.dump(2) << '\n';
  } else {
    out << "study written to " << spec.out_dir << "\n";
    out << "n method mean_risk stderr\n";
    for (const RiskRow& row : result.risks.rows)
      out << row.n << ' ' << row.method << ' ' << fmt(row.mean_risk) << ' '
          << fmt(row.std_error) << '\n';
  }
  return 0;
}

int cmd_calibrate(const StudySpec& spec, const std::string& grid_arg, bool json,
                  std::ostream& out) {
  std::vector<double> grid;
  std::istringstream is(grid_arg);
  std::string item;
  while (std::getline(is, item, ',')) grid.push_back(std::stod(item));
  const double kappa = calibrate_kappa(spec, grid);

  std::filesystem::create_directories(spec.out_dir);
  nlohmann::json j;
  j["kappa"] = kappa;
  j["grid"] = grid;
  j["seed"] = spec.seed;
  j["n"] = spec.n_grid[spec.n_grid.size() / 2];
  std::ofstream cal(std::filesystem::path(spec.out_dir) / "kappa_cal.json",
                    std::ios::binary);
  if (!cal) throw ingest_error("cannot write kappa_cal.json");
  cal << j.dump(2) << '\n';

  if (json)
    out << j.dump(2) << '\n';
  else
    out << "calibrated kappa = " << fmt(kappa) << " (written to " << spec.out_dir
        << "/kappa_cal.json)\n";
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Data-driven thresholded projection estimation for functional "
               "linear regression"};
  app.require_subcommand(1);
  bool json = false;
  app.add_flag("--json", json, "machine-parseable stdout");

  // gen
  CLI::App* gen = app.add_subcommand("gen", "simulate a dataset and write CSVs");
  FamilyFlags gen_family;
  add_family_flags(gen, gen_family);
  std::string gen_config;
  std::size_t gen_n = 100, gen_grid = 0;
  double gen_sigma = 0.5;
  std::uint64_t gen_seed = 1;
  std::string gen_out = "data";
  gen->add_option("--config", gen_config, "study JSON defining the data law");
  gen->add_option("--n", gen_n, "number of observations");
  gen->add_option("--grid", gen_grid, "grid points per curve (0 = auto)");
  gen->add_option("--sigma", gen_sigma, "noise level");
  gen->add_option("--seed", gen_seed, "master seed");
  gen->add_option("--out-dir", gen_out, "output directory");

  // fit
  CLI::App* fit = app.add_subcommand("fit", "fit one dataset from CSVs");
  FamilyFlags fit_family;
  add_family_flags(fit, fit_family);
  std::string fit_curves, fit_responses, fit_assume = "gaussian", fit_out = "out";
  double fit_kappa = 0.0;
  fit->add_option("--curves", fit_curves, "curves CSV")->required();
  fit->add_option("--responses", fit_responses, "responses CSV")->required();
  fit->add_option("--kappa", fit_kappa, "penalty constant (0 = default)");
  fit->add_option("--assume", fit_assume, "gaussian | moments (default kappa)");
  fit->add_option("--out-dir", fit_out, "directory holding kappa_cal.json");

  // study
  CLI::App* study = app.add_subcommand("study", "run a Monte Carlo study");
  std::string study_config;
  study->add_option("--config", study_config, "study JSON")->required();
  std::uint64_t study_seed = 0;
  std::size_t study_threads = 0;
  double study_kappa = 0.0;
  std::string study_out;
  study->add_option("--seed", study_seed, "override seed");
  study->add_option("--threads", study_threads, "override worker count");
  study->add_option("--kappa", study_kappa, "override kappa");
  study->add_option("--out-dir", study_out, "override output directory");

  // rates
  CLI::App* rates = app.add_subcommand("rates", "print the minimax rate exponent");
  FamilyFlags rates_family;
  add_family_flags(rates, rates_family);

  // theory
  CLI::App* theory = app.add_subcommand("theory", "print the theory report JSON");
  FamilyFlags theory_family;
  add_family_flags(theory, theory_family);
  std::size_t theory_n = 1024, theory_rows = 0;
  double theory_sigma = 0.5, theory_kappa = 1.0;
  theory->add_option("--n", theory_n, "sample size");
  theory->add_option("--sigma", theory_sigma, "noise level");
  theory->add_option("--kappa", theory_kappa, "penalty constant");
  theory->add_option("--rows", theory_rows, "table rows (0 = auto)");

  // calibrate
  CLI::App* calibrate = app.add_subcommand("calibrate", "calibrate kappa on a grid");
  std::string cal_config;
  calibrate->add_option("--config", cal_config, "study JSON")->required();
  std::string cal_grid =
      "96,48,24,12,6,3,1.5,0.75,0.375,0.1875,0.09375,0.046875,0.0234375,"
      "0.01171875,0.005859375";
  calibrate->add_option("--kappa-grid", cal_grid, "decreasing comma-separated grid");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  // Configuration phase: anything thrown here is a usage/config error.
  StudySpec spec;
  try {
    if (gen->parsed()) {
      if (!gen_config.empty()) {
        spec = load_study_file(gen_config);
      } else {
        spec.config = gen_family.build();
      }
      if (gen_config.empty() || gen->count("--sigma")) spec.noise.sigma = gen_sigma;
      if (gen_config.empty() || gen->count("--seed")) spec.seed = gen_seed;
      if (gen_config.empty() || gen->count("--out-dir")) spec.out_dir = gen_out;
    } else if (study->parsed()) {
      spec = load_study_file(study_config);
      if (study->count("--seed")) spec.seed = study_seed;
      if (study->count("--threads")) spec.threads = study_threads;
      if (study->count("--kappa")) spec.kappa = study_kappa;
      if (study->count("--out-dir")) spec.out_dir = study_out;
      validate(spec);
    } else if (calibrate->parsed()) {
      spec = load_study_file(cal_config);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (rates->parsed()) return cmd_rates(rates_family, json, out);
    if (theory->parsed())
      return cmd_theory(theory_family, theory_n, theory_sigma, theory_kappa,
                        theory_rows, out);
    if (gen->parsed()) return cmd_gen(spec, gen_n, gen_grid, out);
    if (fit->parsed())
      return cmd_fit(fit_family, fit_curves, fit_responses, fit_kappa, fit_assume,
                     fit_out, json, out, err);
    if (study->parsed()) return cmd_study(spec, json, out);
    if (calibrate->parsed()) return cmd_calibrate(spec, cal_grid, json, out);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace flr::cli
