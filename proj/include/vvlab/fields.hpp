#pragma once

// Discrete fields on the staggered grid: cell-centered scalars, face-based
// vectors, and corner (node) scalars used for stream functions.  Fields carry
// their declared wall behaviour so that one-sided stencils and wall-aware
// quadratures know the boundary value without guessing.

#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "vvlab/geometry.hpp"

namespace vvlab {

using ScalarFn = std::function<double(double, double)>;

/// Cell-centered scalar samples (density, pressure, diagnostics).
/// zero_wall_trace declares that the continuous field vanishes on both walls;
/// wall-aware quadratures and one-sided gradients rely on that declaration.
struct ScalarField {
  const Grid* grid = nullptr;
  std::vector<double> c;
  bool zero_wall_trace = false;

  double& at(int i, int j) { return c[grid->index(i, j)]; }
  double at(int i, int j) const { return c[grid->index(i, j)]; }
};

inline ScalarField make_scalar(const Grid& grid, double fill = 0.0) {
  ScalarField f;
  f.grid = &grid;
  f.c.assign(grid.cell_count(), fill);
  return f;
}

inline ScalarField sample_scalar(const Grid& grid, const ScalarFn& fn,
                                 bool zero_wall_trace = false) {
  ScalarField f = make_scalar(grid);
  f.zero_wall_trace = zero_wall_trace;
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i) f.at(i, j) = fn(grid.x_center(i), grid.y_center[j]);
  return f;
}

/// Staggered vector field: x-component u on vertical faces (nx x ny, periodic
/// wrap in i), y-component v on horizontal faces (nx x (ny+1), rows 0 and ny
/// on the walls).  wall_u_bottom/top, when present, declare the tangential
/// boundary values used by one-sided wall stencils; no-slip fields declare
/// zeros.  Fields without declared traces get interior extrapolation instead.
struct VectorField {
  const Grid* grid = nullptr;
  std::vector<double> u;
  std::vector<double> v;
  std::optional<std::vector<double>> wall_u_bottom;
  std::optional<std::vector<double>> wall_u_top;

  double& u_at(int i, int j) { return u[j * grid->nx + i]; }
  double u_at(int i, int j) const { return u[j * grid->nx + i]; }
  double& v_at(int i, int j) { return v[j * grid->nx + i]; }
  double v_at(int i, int j) const { return v[j * grid->nx + i]; }

  /// u with periodic wrap in the face index.
  double u_wrap(int i, int j) const {
    const int n = grid->nx;
    return u[j * n + ((i % n + n) % n)];
  }
};

inline VectorField make_vector(const Grid& grid) {
  VectorField f;
  f.grid = &grid;
  f.u.assign(static_cast<size_t>(grid.nx) * grid.ny, 0.0);
  f.v.assign(static_cast<size_t>(grid.nx) * (grid.ny + 1), 0.0);
  return f;
}

/// Declares homogeneous no-slip walls: zero tangential traces and exactly
/// zero normal velocity on the wall rows.
inline void declare_noslip(VectorField& f) {
  f.wall_u_bottom = std::vector<double>(f.grid->nx, 0.0);
  f.wall_u_top = std::vector<double>(f.grid->nx, 0.0);
  for (int i = 0; i < f.grid->nx; ++i) {
    f.v_at(i, 0) = 0.0;
    f.v_at(i, f.grid->ny) = 0.0;
  }
}

/// Samples analytic components at their staggered locations.  The tangential
/// wall traces are sampled from fx on the walls themselves.
inline VectorField sample_vector(const Grid& grid, const ScalarFn& fx, const ScalarFn& fy) {
  VectorField f = make_vector(grid);
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i) f.u_at(i, j) = fx(grid.x_face(i), grid.y_center[j]);
  for (int j = 0; j <= grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i) f.v_at(i, j) = fy(grid.x_center(i), grid.y_face[j]);
  f.wall_u_bottom = std::vector<double>(grid.nx);
  f.wall_u_top = std::vector<double>(grid.nx);
  for (int i = 0; i < grid.nx; ++i) {
    (*f.wall_u_bottom)[i] = fx(grid.x_face(i), 0.0);
    (*f.wall_u_top)[i] = fx(grid.x_face(i), grid.domain.length_y);
  }
  return f;
}

/// Scalar samples at grid nodes (x_face_i, y_face_j), nx x (ny+1) with
/// periodic wrap in i.  Stream functions live here so that their discrete
/// curl lands exactly on the staggered velocity faces.
struct NodeField {
  const Grid* grid = nullptr;
  std::vector<double> n;

  double& at(int i, int j) { return n[j * grid->nx + i]; }
  double at(int i, int j) const { return n[j * grid->nx + i]; }
  double wrap(int i, int j) const {
    const int nx = grid->nx;
    return n[j * nx + ((i % nx + nx) % nx)];
  }
};

inline NodeField make_nodes(const Grid& grid, double fill = 0.0) {
  NodeField f;
  f.grid = &grid;
  f.n.assign(static_cast<size_t>(grid.nx) * (grid.ny + 1), fill);
  return f;
}

inline NodeField sample_nodes(const Grid& grid, const ScalarFn& fn) {
  NodeField f = make_nodes(grid);
  for (int j = 0; j <= grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i) f.at(i, j) = fn(grid.x_face(i), grid.y_face[j]);
  return f;
}

namespace detail {
inline void require_same_grid(const Grid* a, const Grid* b, const char* op) {
  if (a != b) throw std::invalid_argument(std::string(op) + ": fields live on different grids");
}
}  // namespace detail

}  // namespace vvlab
