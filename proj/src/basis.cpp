#include "flr/basis.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "flr/errors.hpp"

namespace flr {

Grid Grid::uniform01(std::size_t g) {
  if (g < 2) throw std::invalid_argument("grid needs at least 2 points");
  Grid grid;
  grid.points.resize(g);
  for (std::size_t i = 0; i < g; ++i)
    grid.points[i] = static_cast<double>(i) / static_cast<double>(g);
  grid.uniform = true;
  return grid;
}

Grid Grid::from_points(std::vector<double> points) {
  if (points.size() < 2) throw std::invalid_argument("grid needs at least 2 points");
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!(points[i] >= 0.0 && points[i] <= 1.0))
      throw std::invalid_argument("grid points must lie in [0,1]");
    if (i > 0 && !(points[i] > points[i - 1]))
      throw std::invalid_argument("grid points must be strictly increasing");
  }
  Grid grid;
  grid.points = std::move(points);
  const double h0 = grid.points[1] - grid.points[0];
  grid.uniform = true;
  for (std::size_t i = 2; i < grid.points.size(); ++i) {
    const double h = grid.points[i] - grid.points[i - 1];
    if (std::abs(h - h0) > 1e-12 * h0) {
      grid.uniform = false;
      break;
    }
  }
  return grid;
}

double Grid::spacing() const {
  if (!uniform) throw std::logic_error("spacing() on a non-uniform grid");
  return points[1] - points[0];
}

bool Grid::canonical() const {
  if (!uniform) return false;
  const double h = spacing();
  return std::abs(points.front()) <= 1e-12 &&
         std::abs(points.back() + h - 1.0) <= 1e-12;
}

double basis_eval(std::size_t j, double t) {
  if (j == 0) throw std::invalid_argument("basis index j must be >= 1");
  if (!(t >= 0.0 && t <= 1.0))
    throw std::domain_error("basis_eval: t outside [0,1]");
  if (j == 1) return 1.0;
  const double sqrt2 = std::numbers::sqrt2;
  const std::size_t k = j / 2;
  const double arg = 2.0 * std::numbers::pi * static_cast<double>(k) * t;
  return (j % 2 == 0) ? sqrt2 * std::cos(arg) : sqrt2 * std::sin(arg);
}

std::vector<double> project_curve(const Curve& curve, std::size_t m) {
  if (m == 0) throw std::invalid_argument("project_curve needs m >= 1");
  if (curve.values.size() != curve.grid.size())
    throw std::invalid_argument("curve values and grid sizes differ");
  const std::size_t g = curve.grid.size();
  if (!curve.grid.uniform || !curve.grid.canonical()) {
    throw ingest_error(
        "projection requires the canonical uniform grid {i/G}; orthonormality "
        "is not exact on other grids");
  }
  if (g < 4 * m) {
    std::ostringstream os;
    os << "grid too coarse for projection: " << g << " points for m = " << m
       << " (need >= " << 4 * m << ")";
    throw ingest_error(os.str());
  }
  const double dt = curve.grid.spacing();
  std::vector<double> coeffs(m, 0.0);
  for (std::size_t i = 0; i < g; ++i) {
    const double t = curve.grid.points[i];
    const double v = curve.values[i] * dt;
    for (std::size_t j = 1; j <= m; ++j) coeffs[j - 1] += v * basis_eval(j, t);
  }
  return coeffs;
}

Curve reconstruct(std::span<const double> coeffs, const Grid& grid) {
  Curve curve{grid, std::vector<double>(grid.size(), 0.0)};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double v = 0.0;
    for (std::size_t j = 0; j < coeffs.size(); ++j)
      v += coeffs[j] * basis_eval(j + 1, grid.points[i]);
    curve.values[i] = v;
  }
  return curve;
}

}  // namespace flr
