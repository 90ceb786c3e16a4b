#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "flr/datagen.hpp"
#include "flr/estimator.hpp"
#include "flr/gram.hpp"
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

Sample random_sample(oracle::TestRng& rng, std::size_t n, std::size_t width) {
  Sample s;
  s.n = n;
  s.width = width;
  s.y.resize(n);
  s.x.resize(n * width);
  for (std::size_t i = 0; i < n; ++i) {
    s.y[i] = rng.uniform(-2.0, 2.0);
    for (std::size_t j = 0; j < width; ++j)
      s.x[i * width + j] = rng.uniform(-1.5, 1.5) + (j == 0 ? 0.4 : 0.0);
  }
  return s;
}

}  // namespace

TEST_CASE("galerkin solve on a diagonal system") {
  const Sample d = sample_from_rows({{1.0, 0.0}, {0.0, std::sqrt(0.5)}},
                                    {2.0, 2.0 * std::sqrt(2.0)});
  const NestedGram g = NestedGram::accumulate(d, 2);
  const std::vector<double> x = galerkin_solve(g, 2);
  CHECK(x[0] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(x[1] == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("noiseless identity model recovers the first coordinate") {
  const std::size_t j_total = 16;
  std::vector<double> e1(j_total, 0.0);
  e1[0] = 1.0;
  const SlopeSpec slope = make_slope_custom(kDesk, e1);
  const CovSpec cov = make_cov_diagonal(kDesk, j_total);
  const Sample s = draw_sample(slope, cov, {Law::Gaussian, 0.0}, 10000, 314);
  const NestedGram g = NestedGram::accumulate(s, 4);
  const std::vector<double> x = galerkin_solve(g, 4);
  CHECK(x[0] == doctest::Approx(1.0).epsilon(1e-8));
  for (std::size_t j = 1; j < 4; ++j) CHECK(std::abs(x[j]) < 1e-8);
}

TEST_CASE("solve matches the explicit inverse and meets the residual bound") {
  oracle::TestRng rng(17);
  for (int rep = 0; rep < 10; ++rep) {
    const Sample s = random_sample(rng, 60, 6);
    const NestedGram g = NestedGram::accumulate(s, 6);
    REQUIRE(g.factor_ok_upto() == 6);
    for (std::size_t m = 1; m <= 6; ++m) {
      const std::vector<double> x = galerkin_solve(g, m);

      oracle::Mat a = oracle::make_mat(m);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) a[i][j] = g.cov()(i, j);
      const oracle::Mat inv = *oracle::invert(a);
      for (std::size_t i = 0; i < m; ++i) {
        double want = 0.0;
        for (std::size_t j = 0; j < m; ++j) want += inv[i][j] * g.cross()[j];
        CHECK(x[i] == doctest::Approx(want).epsilon(1e-10));
      }

      double res = 0.0, gn = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        double r = g.cross()[i];
        for (std::size_t j = 0; j < m; ++j) r -= g.cov()(i, j) * x[j];
        res += r * r;
        gn += g.cross()[i] * g.cross()[i];
      }
      CHECK(std::sqrt(res) <= 1e-10 * (1.0 + std::sqrt(gn)));
    }
  }
}

TEST_CASE("threshold logic") {
  // lambda_min = 0.05 < 1/10: thresholded
  std::vector<std::vector<double>> rows(10, {std::sqrt(0.05)});
  Sample low = sample_from_rows(rows, std::vector<double>(10, 1.0));
  GalerkinEstimate est = threshold_estimate(NestedGram::accumulate(low, 1), 1);
  CHECK(est.thresholded);
  CHECK(est.coeffs == std::vector<double>{0.0});
  CHECK(est.lambda_min == doctest::Approx(0.05));

  // lambda_min = 0.5 >= 1/10: solved
  std::vector<std::vector<double>> rows2(10, {std::sqrt(0.5)});
  Sample high = sample_from_rows(rows2, std::vector<double>(10, 1.0));
  est = threshold_estimate(NestedGram::accumulate(high, 1), 1);
  CHECK(!est.thresholded);
  CHECK(est.coeffs[0] == doctest::Approx(std::sqrt(0.5) / 0.5));

  // exactly singular: zero estimate, no throw
  Sample degenerate = sample_from_rows({{1.0, 1.0}, {1.0, 1.0}}, {1.0, 1.0});
  est = threshold_estimate(NestedGram::accumulate(degenerate, 2), 2);
  CHECK(est.thresholded);
  CHECK(est.coeffs == std::vector<double>({0.0, 0.0}));
}

TEST_CASE("omega risk against a known series") {
  // truth beta_j = j^{-2}, unit weights; dropping all but the first
  // coordinate leaves pi^4/90 - 1
  const std::size_t j_total = 400;
  std::vector<double> coeffs(j_total);
  for (std::size_t j = 1; j <= j_total; ++j)
    coeffs[j - 1] = std::pow(double(j), -2.0);
  const WeightConfig cfg = make_pp(0.0, 2.0, 1.0, 500.0);
  const SlopeSpec truth = make_slope_custom(cfg, coeffs);

  GalerkinEstimate est;
  est.m = 1;
  est.coeffs = {1.0};
  const double want = std::pow(std::numbers::pi, 4.0) / 90.0 - 1.0;
  CHECK(omega_risk_sq(est, truth, cfg) == doctest::Approx(want).epsilon(1e-6));

  // exact match: zero risk
  GalerkinEstimate full;
  full.m = j_total;
  full.coeffs = coeffs;
  CHECK(omega_risk_sq(full, truth, cfg) == 0.0);

  // thresholded estimate: the full weighted norm of the truth
  GalerkinEstimate zero;
  zero.m = 4;
  zero.coeffs = {0.0, 0.0, 0.0, 0.0};
  zero.thresholded = true;
  CHECK(omega_risk_sq(zero, truth, cfg) ==
        doctest::Approx(weighted_norm_sq(coeffs, cfg, Seq::Omega)).epsilon(1e-12));
}

TEST_CASE("estimator equivariance under response scaling") {
  oracle::TestRng rng(23);
  const Sample s = random_sample(rng, 50, 4);
  const NestedGram g = NestedGram::accumulate(s, 4);
  const std::vector<double> base = galerkin_solve(g, 4);

  Sample scaled = s;
  for (double& y : scaled.y) y *= 4.0;  // dyadic factor: exact in floating point
  const std::vector<double> quad = galerkin_solve(NestedGram::accumulate(scaled, 4), 4);
  for (std::size_t j = 0; j < 4; ++j) CHECK(quad[j] == 4.0 * base[j]);

  Sample odd = s;
  for (double& y : odd.y) y *= 3.0;
  const std::vector<double> trip = galerkin_solve(NestedGram::accumulate(odd, 4), 4);
  for (std::size_t j = 0; j < 4; ++j)
    CHECK(trip[j] == doctest::Approx(3.0 * base[j]).epsilon(1e-13));
}

TEST_CASE("estimator depends on the data only through sums") {
  // integer-valued samples make the accumulated sums exact, so any
  // permutation of the rows yields bit-identical estimates
  oracle::TestRng rng(29);
  Sample s;
  s.n = 40;
  s.width = 3;
  s.y.resize(s.n);
  s.x.resize(s.n * s.width);
  for (std::size_t i = 0; i < s.n; ++i) {
    s.y[i] = std::floor(rng.uniform(-4.0, 4.0));
    for (std::size_t j = 0; j < 3; ++j)
      s.x[i * 3 + j] = std::floor(rng.uniform(-3.0, 4.0)) + (j == 0 ? 5.0 : 0.0);
  }
  const std::vector<double> base = galerkin_solve(NestedGram::accumulate(s, 3), 3);

  Sample shuffled = s;
  std::vector<std::size_t> order(s.n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = s.n; i-- > 1;)
    std::swap(order[i], order[static_cast<std::size_t>(rng.uniform(0.0, double(i)))]);
  for (std::size_t i = 0; i < s.n; ++i) {
    shuffled.y[i] = s.y[order[i]];
    for (std::size_t j = 0; j < 3; ++j) shuffled.x[i * 3 + j] = s.x[order[i] * 3 + j];
  }
  const std::vector<double> perm =
      galerkin_solve(NestedGram::accumulate(shuffled, 3), 3);
  CHECK(perm == base);
}

TEST_CASE("diagonal-covariance estimates approach the truncated truth") {
  const std::size_t j_total = 32;
  const SlopeSpec slope = make_slope(kDesk, SlopeProfile::SmoothPoly, j_total);
  const CovSpec cov = make_cov_diagonal(kDesk, j_total);
  double total = 0.0;
  const int reps = 50;
  for (int rep = 0; rep < reps; ++rep) {
    const Sample s = draw_sample(slope, cov, {Law::Gaussian, 0.5}, 10000,
                                 oracle::TestRng(1000 + rep).next());
    const std::vector<double> x = galerkin_solve(NestedGram::accumulate(s, 4), 4);
    double dist = 0.0;
    for (std::size_t j = 0; j < 4; ++j)
      dist += (x[j] - slope.coeffs[j]) * (x[j] - slope.coeffs[j]);
    total += std::sqrt(dist);
  }
  CHECK(total / reps < 0.05);
}
