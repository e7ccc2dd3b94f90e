#pragma once

// Channel geometry: a rectangular strip, periodic in x, with solid walls at
// y = 0 and y = length_y.  Provides wall-clustered structured grids and
// boundary-strip masks whose cell weights are exact 1D overlap fractions.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace vvlab {

/// Periodic channel domain.  x wraps with period length_x; the two walls sit
/// at y = 0 and y = length_y.
struct Domain {
  double length_x = 1.0;
  double length_y = 1.0;
};

/// Distance from a point to the nearest wall.  The periodic direction never
/// limits the distance, so only y matters.  Points outside the closed strip
/// are rejected.
inline double distance_to_boundary(const Domain& dom, double /*x*/, double y) {
  if (!(y >= 0.0 && y <= dom.length_y))
    throw std::domain_error("distance_to_boundary: y = " + std::to_string(y) +
                            " lies outside [0, " + std::to_string(dom.length_y) + "]");
  return std::min(y, dom.length_y - y);
}

/// Staggered (MAC) grid over the channel.
///
/// Layout per cell (i, j):
///
///        +---- v(i,j+1) ----+        scalars p, rho at cell centers
///        |                  |        u on vertical faces,   nx x ny
///     u(i,j)    c(i,j)   u(i+1,j)    v on horizontal faces, nx x (ny+1)
///        |                  |        u(nx,j) wraps to u(0,j)
///        +---- v(i,j)  -----+
///
/// x is uniform with spacing hx.  y faces follow a tanh stretching toward
/// both walls controlled by beta (beta = 0 gives a uniform grid).
struct Grid {
  Domain domain;
  int nx = 0;
  int ny = 0;
  double beta = 0.0;

  double hx = 0.0;
  std::vector<double> y_face;    ///< ny+1 values, y_face[0] = 0, y_face[ny] = length_y
  std::vector<double> y_center;  ///< ny cell-center heights
  std::vector<double> hy;        ///< ny cell heights

  double x_face(int i) const { return hx * i; }
  double x_center(int i) const { return hx * (i + 0.5); }
  double cell_area(int j) const { return hx * hy[j]; }
  double min_wall_spacing() const { return std::min(hy.front(), hy.back()); }
  int index(int i, int j) const { return j * nx + i; }
  int cell_count() const { return nx * ny; }

  /// Wall distance evaluated at a cell center row.
  double center_wall_distance(int j) const {
    return std::min(y_center[j], domain.length_y - y_center[j]);
  }
};

/// Builds the stretched MAC grid.  The y faces are images of uniform
/// parameters s = j/ny under
///
///   y(s) = length_y/2 * (1 + tanh(beta*(2s - 1)) / tanh(beta)),
///
/// which clusters cells symmetrically at both walls; beta = 0 is the uniform
/// limit.  End faces are pinned to the walls exactly.
inline Grid build_grid(const Domain& dom, int nx, int ny, double beta) {
  if (nx < 4 || ny < 4)
    throw std::invalid_argument("build_grid: need nx >= 4 and ny >= 4, got nx = " +
                                std::to_string(nx) + ", ny = " + std::to_string(ny));
  if (!(beta >= 0.0) || !std::isfinite(beta))
    throw std::invalid_argument("build_grid: stretching beta must be finite and >= 0");
  if (!(dom.length_x > 0.0) || !(dom.length_y > 0.0))
    throw std::invalid_argument("build_grid: domain side lengths must be positive");

  Grid g;
  g.domain = dom;
  g.nx = nx;
  g.ny = ny;
  g.beta = beta;
  g.hx = dom.length_x / nx;

  g.y_face.resize(ny + 1);
  const double tb = beta > 0.0 ? std::tanh(beta) : 1.0;
  for (int j = 0; j <= ny; ++j) {
    const double s = static_cast<double>(j) / ny;
    if (beta > 0.0)
      g.y_face[j] = 0.5 * dom.length_y * (1.0 + std::tanh(beta * (2.0 * s - 1.0)) / tb);
    else
      g.y_face[j] = dom.length_y * s;
  }
  g.y_face.front() = 0.0;
  g.y_face.back() = dom.length_y;

  g.y_center.resize(ny);
  g.hy.resize(ny);
  for (int j = 0; j < ny; ++j) {
    g.hy[j] = g.y_face[j + 1] - g.y_face[j];
    g.y_center[j] = 0.5 * (g.y_face[j] + g.y_face[j + 1]);
    if (!(g.hy[j] > 0.0))
      throw std::invalid_argument("build_grid: degenerate cell at row " + std::to_string(j) +
                                  " (stretching too strong for this resolution)");
  }
  return g;
}

/// Aggregate form of the build_grid arguments, convenient for literals:
/// build_grid({nx, ny, beta, length_x, length_y}).
struct GridSpec {
  int nx = 0;
  int ny = 0;
  double beta = 0.0;
  double length_x = 1.0;
  double length_y = 1.0;
};

inline Grid build_grid(const GridSpec& spec) {
  return build_grid({spec.length_x, spec.length_y}, spec.nx, spec.ny, spec.beta);
}

namespace detail {
inline double interval_overlap(double a, double b, double lo, double hi) {
  return std::max(0.0, std::min(b, hi) - std::max(a, lo));
}
}  // namespace detail

/// Near-wall strip mask for thickness t: the region within distance t of
/// either wall.  Each cell row carries the exact fraction of its height
/// covered by the strip, so masked quadratures integrate the strip without
/// staircase error.  Weights are x-independent in a channel.
struct LayerMask {
  const Grid* grid = nullptr;
  double thickness = 0.0;
  std::vector<double> row_weight;  ///< ny values in [0, 1]

  double weight(int /*i*/, int j) const { return row_weight[j]; }

  /// Total masked area; equals length_x * min(2t, length_y) up to roundoff.
  double weighted_area() const {
    double s = 0.0;
    for (int j = 0; j < grid->ny; ++j) s += row_weight[j] * grid->hy[j];
    return s * grid->domain.length_x;
  }

  /// Number of cell rows whose centers lie strictly inside one wall strip.
  /// The count is the same for both walls on these symmetric grids, up to
  /// roundoff in the stretched map, so the minimum of the two is returned.
  int rows_inside_strip() const {
    int lo = 0, hi = 0;
    for (int j = 0; j < grid->ny; ++j) {
      if (grid->y_center[j] < thickness) ++lo;
      if (grid->domain.length_y - grid->y_center[j] < thickness) ++hi;
    }
    return std::min(lo, hi);
  }
};

inline LayerMask layer_mask(const Grid& grid, double thickness) {
  if (!(thickness > 0.0) || !std::isfinite(thickness))
    throw std::invalid_argument("layer_mask: thickness must be positive and finite");
  LayerMask m;
  m.grid = &grid;
  m.thickness = thickness;
  m.row_weight.resize(grid.ny);
  const double ly = grid.domain.length_y;
  for (int j = 0; j < grid.ny; ++j) {
    const double a = grid.y_face[j], b = grid.y_face[j + 1];
    double cov = detail::interval_overlap(a, b, 0.0, thickness) +
                 detail::interval_overlap(a, b, ly - thickness, ly);
    // The two strips overlap when 2t > length_y; clamp the double count.
    cov = std::min(cov, b - a);
    m.row_weight[j] = cov / grid.hy[j];
  }
  return m;
}

}  // namespace vvlab
