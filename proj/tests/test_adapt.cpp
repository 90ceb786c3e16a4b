#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "flr/adapt.hpp"
#include "flr/datagen.hpp"
#include "oracles.hpp"

using namespace flr;

namespace {

const WeightConfig kDesk = make_pp(0.0, 2.0, 1.0);

Sample sample_from_rows(std::vector<std::vector<double>> rows, std::vector<double> y) {
  Sample s;
  s.n = rows.size();
  s.width = rows[0].size();
  s.y = std::move(y);
  for (const auto& r : rows) s.x.insert(s.x.end(), r.begin(), r.end());
  return s;
}

// n rows over `width` coordinates with identity covariance and zero cross
// moments: `per` rows of +scale e_j and of -scale e_j for each j, padded
// with zero rows; all responses +-1 alternating.
Sample identity_design(std::size_t n, std::size_t width) {
  const std::size_t per = n / (2 * width + 1);
  std::vector<std::vector<double>> rows;
  std::vector<double> y;
  const double scale = std::sqrt(double(n) / double(2 * per));
  for (std::size_t j = 0; j < width; ++j) {
    for (std::size_t k = 0; k < per; ++k) {
      std::vector<double> plus(width, 0.0), minus(width, 0.0);
      plus[j] = scale;
      minus[j] = -scale;
      rows.push_back(plus);
      rows.push_back(minus);
      y.push_back(1.0);
      y.push_back(1.0);
    }
  }
  while (rows.size() < n) {
    rows.emplace_back(width, 0.0);
    y.push_back(rows.size() % 2 == 0 ? 1.0 : -1.0);
  }
  return sample_from_rows(std::move(rows), std::move(y));
}

}  // namespace

TEST_CASE("delta triplet") {
  const double one[] = {1.0};
  DeltaTriplet t = delta_triplet(one, 1);
  CHECK(t.norm_max == 1.0);
  CHECK(t.log_factor == doctest::Approx(1.0));
  CHECK(t.dim_factor == doctest::Approx(1.0));

  const double three[] = {1.0, 4.0, 9.0};
  t = delta_triplet(three, 3);
  CHECK(t.norm_max == 9.0);
  CHECK(t.log_factor == doctest::Approx(std::log(9.0) / std::log(5.0)).epsilon(1e-14));
  CHECK(t.log_factor == doctest::Approx(1.365212).epsilon(1e-6));
  CHECK(t.dim_factor == doctest::Approx(36.8607).epsilon(1e-5));

  // norm below the m + 2 floor: the log factor collapses to one
  const double flat[] = {1.0, 2.0, 3.0};
  t = delta_triplet(flat, 3);
  CHECK(t.log_factor == 1.0);
  CHECK(t.dim_factor == doctest::Approx(9.0));
}

TEST_CASE("integer fourth root") {
  CHECK(fourth_root_floor(1) == 1);
  CHECK(fourth_root_floor(15) == 1);
  CHECK(fourth_root_floor(16) == 2);
  CHECK(fourth_root_floor(100) == 3);
  CHECK(fourth_root_floor(255) == 3);
  CHECK(fourth_root_floor(256) == 4);
  CHECK(fourth_root_floor(624) == 4);
  CHECK(fourth_root_floor(625) == 5);
  CHECK(fourth_root_floor(10000) == 10);
}

TEST_CASE("omega upper bound") {
  CHECK(omega_upper_bound(100, kDesk) == 3);
  const WeightConfig heavy = make_pp(1.0, 2.0, 1.0);  // omega_j = j^2
  CHECK(omega_upper_bound(16, heavy) == 2);
}

TEST_CASE("random upper bound on crafted designs") {
  // identity covariance at n = 100: the cutoff condition never fires
  const Sample id100 = identity_design(100, 3);
  const NestedGram g1 = NestedGram::accumulate(id100, 3);
  for (std::size_t m = 1; m <= 3; ++m)
    CHECK(g1.min_eigenvalue(m) == doctest::Approx(1.0).epsilon(1e-12));
  const UpperBounds b1 = random_upper_bound(g1, kDesk);
  CHECK(b1.omega_bound == 3);
  CHECK(b1.data_bound == 3);

  // omega_j = j^2 at n = 16: 2 * 4 * 1 > 16 / (1 + log 16) stops at m = 1
  const WeightConfig heavy = make_pp(1.0, 2.0, 1.0);
  const Sample id16 = identity_design(16, 2);
  const NestedGram g2 = NestedGram::accumulate(id16, 2);
  const UpperBounds b2 = random_upper_bound(g2, heavy);
  CHECK(b2.omega_bound == 2);
  CHECK(b2.data_bound == 1);

  // cap of one leaves an empty condition range, and the selection is forced
  const Sample id15 = identity_design(15, 1);
  const UpperBounds b3 = random_upper_bound(NestedGram::accumulate(id15, 1), kDesk);
  CHECK(b3.omega_bound == 1);
  CHECK(b3.data_bound == 1);
  CHECK(select_dimension(id15, kDesk, 1.0).selected_m == 1);
}

TEST_CASE("singular blocks count as infinite in the cutoff") {
  // duplicate third coordinate: [cov]_3 singular, bound stops at 2
  Sample s = identity_design(100, 3);
  for (std::size_t i = 0; i < s.n; ++i) s.x[i * 3 + 2] = s.x[i * 3 + 1];
  const NestedGram g = NestedGram::accumulate(s, 3);
  CHECK(g.factor_ok_upto() == 2);
  const UpperBounds b = random_upper_bound(g, kDesk);
  CHECK(b.data_bound == 2);
}

TEST_CASE("penalty table on the ideal design") {
  const Sample id = identity_design(100, 3);
  const NestedGram g = NestedGram::accumulate(id, 3);
  CHECK(g.sigma_y_sq() == doctest::Approx(1.0));
  const PenaltyTable table = penalty_table(g, kDesk, 1.0);
  REQUIRE(table.selection_bound == 3);
  CHECK(table.rows[0].sigma_sq == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(table.rows[0].dim_factor == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(table.rows[0].pen == doctest::Approx(0.28).epsilon(1e-12));
}

TEST_CASE("theoretical default constants") {
  CHECK(kKappaGaussian == 96.0);
  CHECK(kKappaMoment == 288.0);
}

TEST_CASE("contrasts by hand") {
  PenaltyTable table;
  table.rows.resize(2);
  table.rows[0].pen = 1.0;
  table.rows[1].pen = 2.0;
  table.selection_bound = 2;
  table.n = 100;

  std::vector<GalerkinEstimate> ests(2);
  ests[0].m = 1;
  ests[0].coeffs = {1.0};
  ests[1].m = 2;
  ests[1].coeffs = {1.0, 0.0};  // equal after zero padding

  const std::vector<double> psi = contrast_values(ests, table, kDesk);
  CHECK(psi[0] == doctest::Approx(-1.0));
  CHECK(psi[1] == doctest::Approx(-2.0));

  // single admissible dimension: psi_1 = -pen_1
  table.rows.resize(1);
  table.selection_bound = 1;
  ests.resize(1);
  CHECK(contrast_values(ests, table, kDesk)[0] == doctest::Approx(-1.0));
}

TEST_CASE("contrast never falls below its own penalty") {
  oracle::TestRng rng(77);
  for (int rep = 0; rep < 20; ++rep) {
    Sample s;
    s.n = 80;
    s.width = 3;
    s.y.resize(s.n);
    s.x.resize(s.n * 3);
    for (std::size_t i = 0; i < s.n; ++i) {
      s.y[i] = rng.uniform(-2.0, 2.0);
      for (std::size_t j = 0; j < 3; ++j)
        s.x[i * 3 + j] = rng.uniform(-1.0, 1.0) + (j == 0 ? 0.4 : 0.0);
    }
    const SelectionResult sel = select_dimension(s, kDesk, 1.0);
    for (std::size_t m = 1; m <= sel.table.selection_bound; ++m)
      CHECK(sel.contrasts[m - 1] >= -sel.table.pen(m) - 1e-12);
  }
}

TEST_CASE("identical estimates select m = 1 by the tie break") {
  // noiseless e_1 model: every nonsingular Galerkin solution equals e_1
  // padded with exact zeros, so all criterion values vanish
  const std::size_t j_total = 16;
  std::vector<double> e1(j_total, 0.0);
  e1[0] = 1.0;
  const SlopeSpec slope = make_slope_custom(kDesk, e1);
  const CovSpec cov = make_cov_diagonal(kDesk, j_total);
  const Sample s = draw_sample(slope, cov, {Law::Gaussian, 0.0}, 600, 2718);
  const SelectionResult sel = select_dimension(s, kDesk, 1.0);
  for (std::size_t m = 1; m <= sel.table.selection_bound; ++m)
    CHECK(sel.contrasts[m - 1] + sel.table.pen(m) == doctest::Approx(0.0));
  CHECK(sel.selected_m == 1);
}

TEST_CASE("selection matches a straight-line reimplementation") {
  const std::size_t j_total = 64;
  const SlopeSpec slope = make_slope(kDesk, SlopeProfile::SmoothPoly, j_total);
  const CovSpec cov = make_cov_diagonal(kDesk, j_total);
  auto omega = [](std::size_t) { return 1.0; };
  for (std::uint64_t seed : {500u, 501u, 502u, 503u, 504u}) {
    const Sample s = draw_sample(slope, cov, {Law::Gaussian, 0.5}, 500, seed);
    const SelectionResult sel = select_dimension(s, kDesk, 2.0);
    const oracle::StraightSelection ref = oracle::select_straightline(s, omega, 2.0);

    CHECK(sel.table.omega_bound == ref.omega_bound);
    CHECK(sel.table.rule_bound == ref.data_bound);
    REQUIRE(sel.table.selection_bound == ref.data_bound);
    for (std::size_t m = 1; m <= ref.data_bound; ++m) {
      CHECK(sel.table.pen(m) == doctest::Approx(ref.pens[m - 1]).epsilon(1e-9));
      CHECK(sel.table.rows[m - 1].sigma_sq ==
            doctest::Approx(ref.sigma_sq[m - 1]).epsilon(1e-9));
      CHECK(sel.table.rows[m - 1].norm_max ==
            doctest::Approx(ref.norm_max[m - 1]).epsilon(1e-9));
      CHECK(sel.contrasts[m - 1] ==
            doctest::Approx(ref.contrasts[m - 1]).epsilon(1e-8));
      for (std::size_t j = 0; j < m; ++j)
        CHECK(sel.per_m[m - 1].coeffs[j] ==
              doctest::Approx(ref.estimates[m - 1][j]).epsilon(1e-9));
    }
    CHECK(sel.selected_m == ref.selected);
  }
}

TEST_CASE("selected dimension is invariant under response scaling") {
  const std::size_t j_total = 64;
  const SlopeSpec slope = make_slope(kDesk, SlopeProfile::SmoothPoly, j_total);
  const CovSpec cov = make_cov_diagonal(kDesk, j_total);
  for (std::uint64_t seed : {90u, 91u, 92u}) {
    const Sample s = draw_sample(slope, cov, {Law::Gaussian, 0.5}, 400, seed);
    Sample scaled = s;
    for (double& y : scaled.y) y *= 7.5;
    const SelectionResult a = select_dimension(s, kDesk, 2.0);
    const SelectionResult b = select_dimension(scaled, kDesk, 2.0);
    CHECK(a.selected_m == b.selected_m);
    CHECK(b.table.pen(1) == doctest::Approx(7.5 * 7.5 * a.table.pen(1)).epsilon(1e-12));
  }
}

TEST_CASE("selection bounds are ordered") {
  const std::size_t j_total = 64;
  const SlopeSpec slope = make_slope(kDesk, SlopeProfile::SmoothPoly, j_total);
  const CovSpec cov = make_cov_diagonal(kDesk, j_total);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const std::size_t n = 100 + 137 * seed;
    const Sample s = draw_sample(slope, cov, {Law::Gaussian, 0.5}, n, seed);
    const SelectionResult sel = select_dimension(s, kDesk, 2.0);
    CHECK(sel.selected_m >= 1);
    CHECK(sel.selected_m <= sel.table.selection_bound);
    CHECK(sel.table.selection_bound <= sel.table.omega_bound);
    CHECK(sel.table.omega_bound <= fourth_root_floor(n));
    for (std::size_t m = 1; m < sel.table.selection_bound; ++m)
      CHECK(sel.table.pen(m) <= sel.table.pen(m + 1) + 1e-10);
  }
}

TEST_CASE("degenerate all-zero regressors collapse to the zero estimate") {
  Sample s;
  s.n = 50;
  s.width = 2;
  s.y.assign(s.n, 1.0);
  s.x.assign(s.n * 2, 0.0);
  const SelectionResult sel = select_dimension(s, kDesk, 1.0);
  CHECK(sel.selected_m == 1);
  CHECK(sel.estimate.thresholded);
  CHECK(sel.table.selection_bound == 0);
  CHECK(sel.table.truncated_by_singularity);
}
