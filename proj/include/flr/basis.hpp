#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace flr {

/// Evaluation grid on [0,1]. Projection requires the canonical uniform
/// grid {i/G : i = 0..G-1} (left cell endpoints, no right endpoint), which
/// makes the quadrature Gram matrix of the trigonometric basis the exact
/// identity below the Nyquist limit. Reconstruction works on any grid.
struct Grid {
  std::vector<double> points;
  bool uniform = false;

  /// The canonical uniform grid {0, 1/G, ..., (G-1)/G}.
  static Grid uniform01(std::size_t g);

  /// Validates (>= 2 strictly increasing points in [0,1]) and detects
  /// uniform spacing to 1e-12 relative.
  static Grid from_points(std::vector<double> points);

  std::size_t size() const { return points.size(); }
  double spacing() const;  // uniform grids only
  bool canonical() const;  // t_0 = 0 and t_{G-1} + spacing = 1
};

struct Curve {
  Grid grid;
  std::vector<double> values;
};

/// Trigonometric orthonormal basis on [0,1]:
///   psi_1(t) = 1, psi_{2k}(t) = sqrt(2) cos(2 pi k t),
///   psi_{2k+1}(t) = sqrt(2) sin(2 pi k t).
/// Throws std::domain_error for t outside [0,1].
double basis_eval(std::size_t j, double t);

/// First m basis coefficients of a sampled curve by left-rectangle
/// quadrature. Requires a canonical uniform grid with at least 4m points;
/// exact (to roundoff) for trigonometric polynomials below the grid's
/// Nyquist limit.
std::vector<double> project_curve(const Curve& curve, std::size_t m);

/// Pointwise sum of coeff_j * psi_j over the grid. Empty coefficients give
/// the zero curve.
Curve reconstruct(std::span<const double> coeffs, const Grid& grid);

}  // namespace flr
