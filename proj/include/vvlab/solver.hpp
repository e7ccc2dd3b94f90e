#pragma once

// Incompressible variable-density flow solver on the staggered channel grid.
//
// One step performs, in order:
//   1. conservative MUSCL (minmod) transport of the density,
//   2. an explicit second-order advection of the face momenta using mass
//      fluxes consistent with the density update,
//   3. implicit viscosity, Crank-Nicolson in time, split per direction into
//      periodic and wall tridiagonal solves (Douglas scheme),
//   4. a variable-coefficient pressure projection, div((1/rho) grad p) =
//      div(u*)/dt, solved by diagonally preconditioned conjugate gradients.
//
// The energy ledger integrates nu * |grad u|^2 with the midpoint velocity of
// each step.  For the viscous sub-step that is exactly the energy the
// Crank-Nicolson solve removes (the Dirichlet form of the same difference
// quotients), so kinetic energy plus ledgered dissipation is conserved to
// roundoff for shear states and to O(dt^2) otherwise.  Evaluating the
// endpoint gradient norms instead would overcount the transient dissipation
// of rough initial data by O(sqrt(dt)) and falsely flag energy growth.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "vvlab/euler.hpp"
#include "vvlab/fields.hpp"
#include "vvlab/geometry.hpp"
#include "vvlab/linsolve.hpp"
#include "vvlab/operators.hpp"

namespace vvlab {

/// Failures of the time integration itself (CFL violation, NaN contamination,
/// pressure solver breakdown), as opposed to configuration mistakes.
struct SolverError : std::runtime_error {
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

struct StepperSettings {
  double cfl = 0.4;
  double dt_max = 1e-3;
  double poisson_tol = 1e-10;
  int poisson_max_iterations = 20000;
};

/// Instantaneous solver state.  vel carries declared no-slip traces; the wall
/// rows of the normal component are exactly zero at all times.
struct FlowState {
  const Grid* grid = nullptr;
  double t = 0.0;
  double nu = 0.0;
  ScalarField rho;
  VectorField vel;
  ScalarField pressure;
};

// ---------------------------------------------------------------------------
// face densities and kinetic energy
// ---------------------------------------------------------------------------

namespace detail {

inline double rho_at_u_face(const ScalarField& rho, int i, int j) {
  const int il = (i + rho.grid->nx - 1) % rho.grid->nx;
  return 0.5 * (rho.at(il, j) + rho.at(i, j));
}

// linear interpolation to the horizontal face at y_face[j]
inline double rho_at_v_face(const ScalarField& rho, int i, int j) {
  const Grid& g = *rho.grid;
  if (j == 0) return rho.at(i, 0);
  if (j == g.ny) return rho.at(i, g.ny - 1);
  const double wl = g.hy[j], wu = g.hy[j - 1];
  return (wl * rho.at(i, j - 1) + wu * rho.at(i, j)) / (wl + wu);
}

}  // namespace detail

/// 1/2 integral of rho |u|^2 with densities interpolated to the faces the
/// velocity lives on.
inline double kinetic_energy(const ScalarField& rho, const VectorField& vel) {
  const Grid& g = *vel.grid;
  double s = 0.0;
  for (int j = 0; j < g.ny; ++j) {
    double row = 0.0;
    for (int i = 0; i < g.nx; ++i) {
      const double uu = vel.u_at(i, j);
      row += detail::rho_at_u_face(rho, i, j) * uu * uu;
    }
    s += row * g.hx * g.hy[j];
  }
  for (int j = 1; j < g.ny; ++j) {  // wall rows carry no normal velocity
    double row = 0.0;
    for (int i = 0; i < g.nx; ++i) {
      const double vv = vel.v_at(i, j);
      row += detail::rho_at_v_face(rho, i, j) * vv * vv;
    }
    s += row * g.hx * v_face_measure(g, j);
  }
  return 0.5 * s;
}

inline double kinetic_energy(const FlowState& s) { return kinetic_energy(s.rho, s.vel); }

// ---------------------------------------------------------------------------
// energy ledger
// ---------------------------------------------------------------------------

/// Running record of kinetic energy and accumulated viscous dissipation,
/// total and restricted to the wall strip of the configured thickness.
struct EnergyLedger {
  double layer_thickness = 0.0;
  LayerMask mask;
  std::vector<double> times;
  std::vector<double> kinetic;
  std::vector<double> dissipation_total;
  std::vector<double> dissipation_layer;

  void start(const FlowState& s) {
    mask = layer_mask(*s.grid, layer_thickness);
    times = {s.t};
    kinetic = {kinetic_energy(s)};
    dissipation_total = {0.0};
    dissipation_layer = {0.0};
  }

  /// Accumulates one step of dissipation from the midpoint velocity.
  void record_step(const FlowState& before, const FlowState& after) {
    const Grid& g = *after.grid;
    VectorField mid = make_vector(g);
    for (size_t k = 0; k < mid.u.size(); ++k) mid.u[k] = 0.5 * (before.vel.u[k] + after.vel.u[k]);
    for (size_t k = 0; k < mid.v.size(); ++k) mid.v[k] = 0.5 * (before.vel.v[k] + after.vel.v[k]);
    mid.wall_u_bottom = std::vector<double>(g.nx, 0.0);
    mid.wall_u_top = std::vector<double>(g.nx, 0.0);
    const ScalarField q = gradient_tensor_norms(mid);
    const double dt = after.t - before.t;
    const double nu = after.nu;
    dissipation_total.push_back(dissipation_total.back() + nu * dt * integral(q));
    dissipation_layer.push_back(dissipation_layer.back() + nu * dt * masked_integral(q, mask));
    times.push_back(after.t);
    kinetic.push_back(kinetic_energy(after));
  }

  /// Accumulated dissipation interpolated to an arbitrary time inside the
  /// recorded horizon.
  double dissipation_at(double t, bool layer) const {
    const auto& series = layer ? dissipation_layer : dissipation_total;
    if (times.empty() || t < times.front() - 1e-12 || t > times.back() + 1e-9)
      throw std::invalid_argument("EnergyLedger: requested time " + std::to_string(t) +
                                  " outside the recorded horizon");
    if (t <= times.front()) return series.front();
    for (size_t k = 1; k < times.size(); ++k) {
      if (t <= times[k]) {
        const double w = (t - times[k - 1]) / (times[k] - times[k - 1]);
        return series[k - 1] + w * (series[k] - series[k - 1]);
      }
    }
    return series.back();
  }
};

// ---------------------------------------------------------------------------
// density transport
// ---------------------------------------------------------------------------

namespace detail {

inline double minmod(double a, double b) {
  if (a > 0.0 && b > 0.0) return std::min(a, b);
  if (a < 0.0 && b < 0.0) return std::max(a, b);
  return 0.0;
}

struct MassFluxes {
  std::vector<double> fx;  // at u-faces, nx*ny
  std::vector<double> fy;  // at v-faces, nx*(ny+1); wall rows zero
};

/// Upwind MUSCL mass fluxes rho_face * velocity with minmod-limited linear
/// reconstruction, metric-aware in y.
inline MassFluxes mass_fluxes(const ScalarField& rho, const VectorField& vel) {
  const Grid& g = *rho.grid;
  const int nx = g.nx, ny = g.ny;
  MassFluxes f;
  f.fx.assign(static_cast<size_t>(nx) * ny, 0.0);
  f.fy.assign(static_cast<size_t>(nx) * (ny + 1), 0.0);

  // x slopes and fluxes
  for (int j = 0; j < ny; ++j) {
    std::vector<double> slope(nx);
    for (int i = 0; i < nx; ++i) {
      const int il = (i + nx - 1) % nx, ir = (i + 1) % nx;
      slope[i] = minmod((rho.at(i, j) - rho.at(il, j)) / g.hx,
                        (rho.at(ir, j) - rho.at(i, j)) / g.hx);
    }
    for (int i = 0; i < nx; ++i) {
      const int il = (i + nx - 1) % nx;
      const double u = vel.u_at(i, j);
      double face;
      if (u > 0.0)
        face = rho.at(il, j) + 0.5 * g.hx * slope[il];
      else if (u < 0.0)
        face = rho.at(i, j) - 0.5 * g.hx * slope[i];
      else
        face = 0.0;
      f.fx[j * nx + i] = u * face;
    }
  }

  // y slopes and fluxes; wall faces carry no flux
  for (int i = 0; i < nx; ++i) {
    std::vector<double> slope(ny, 0.0);
    for (int j = 1; j + 1 < ny; ++j) {
      const double lo = (rho.at(i, j) - rho.at(i, j - 1)) / (g.y_center[j] - g.y_center[j - 1]);
      const double hi = (rho.at(i, j + 1) - rho.at(i, j)) / (g.y_center[j + 1] - g.y_center[j]);
      slope[j] = minmod(lo, hi);
    }
    for (int j = 1; j < ny; ++j) {
      const double v = vel.v_at(i, j);
      double face;
      if (v > 0.0)
        face = rho.at(i, j - 1) + slope[j - 1] * (g.y_face[j] - g.y_center[j - 1]);
      else if (v < 0.0)
        face = rho.at(i, j) + slope[j] * (g.y_face[j] - g.y_center[j]);
      else
        face = 0.0;
      f.fy[j * nx + i] = v * face;
    }
  }
  return f;
}

inline void check_cfl(const VectorField& vel, double dt, const char* who) {
  const Grid& g = *vel.grid;
  double cu = 0.0;
  for (double u : vel.u) cu = std::max(cu, std::abs(u));
  cu *= dt / g.hx;
  double cv = 0.0;
  for (int j = 1; j < g.ny; ++j) {
    const double h = std::min(g.hy[j - 1], g.hy[j]);
    for (int i = 0; i < g.nx; ++i) cv = std::max(cv, std::abs(vel.v_at(i, j)) * dt / h);
  }
  if (!(cu <= 1.0 && cv <= 1.0))
    throw SolverError(std::string(who) + ": face CFL exceeds 1 (x " + std::to_string(cu) +
                      ", y " + std::to_string(cv) + "); reduce dt");
}

}  // namespace detail

/// One conservative transport step of the density.  Mass is conserved to
/// roundoff and the minmod limiter keeps the update inside the initial
/// bounds for face CFL numbers up to one per direction.
inline ScalarField advect_density(const ScalarField& rho, const VectorField& vel, double dt) {
  detail::require_same_grid(rho.grid, vel.grid, "advect_density");
  if (!(dt > 0.0)) throw std::invalid_argument("advect_density: dt must be positive");
  detail::check_cfl(vel, dt, "advect_density");

  const Grid& g = *rho.grid;
  const auto f = detail::mass_fluxes(rho, vel);
  ScalarField out = make_scalar(g);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const int ir = (i + 1) % g.nx;
      const double div = (f.fx[j * g.nx + ir] - f.fx[j * g.nx + i]) / g.hx +
                         (f.fy[(j + 1) * g.nx + i] - f.fy[j * g.nx + i]) / g.hy[j];
      out.at(i, j) = rho.at(i, j) - dt * div;
    }
  return out;
}

// ---------------------------------------------------------------------------
// pressure projection
// ---------------------------------------------------------------------------

struct PoissonReport {
  int iterations = 0;
  double relative_residual = 0.0;
};

/// Solves div((1/rho) grad p) = rhs with periodic x, zero normal flux at the
/// walls, and zero-mean p, by diagonally preconditioned conjugate gradients
/// in the cell-area inner product.  The rhs must have (numerically) zero
/// mean; anything else is incompatible with the boundary conditions.
inline PoissonReport solve_variable_poisson(const ScalarField& rho, const ScalarField& rhs,
                                            ScalarField& pressure, double tol,
                                            int max_iterations = 20000) {
  detail::require_same_grid(rho.grid, rhs.grid, "solve_variable_poisson");
  const Grid& g = *rho.grid;
  const int nx = g.nx, ny = g.ny;
  const double area_total = g.domain.length_x * g.domain.length_y;

  double mean = integral(rhs) / area_total;
  if (std::abs(mean) > 1e-10 * std::max(1.0, linf_norm(rhs)))
    throw std::invalid_argument(
        "solve_variable_poisson: rhs mean " + std::to_string(mean) +
        " is incompatible with periodic/no-flux boundaries (must vanish)");

  // face mobilities 1/rho
  std::vector<double> mx(static_cast<size_t>(nx) * ny), my(static_cast<size_t>(nx) * (ny + 1), 0.0);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) mx[j * nx + i] = 1.0 / detail::rho_at_u_face(rho, i, j);
  for (int j = 1; j < ny; ++j)
    for (int i = 0; i < nx; ++i) my[j * nx + i] = 1.0 / detail::rho_at_v_face(rho, i, j);

  auto apply = [&](const std::vector<double>& p, std::vector<double>& out) {
    for (int j = 0; j < ny; ++j) {
      const double inv_hy = 1.0 / g.hy[j];
      const double dyc_lo = j > 0 ? g.y_center[j] - g.y_center[j - 1] : 1.0;
      const double dyc_hi = j + 1 < ny ? g.y_center[j + 1] - g.y_center[j] : 1.0;
      for (int i = 0; i < nx; ++i) {
        const int il = (i + nx - 1) % nx, ir = (i + 1) % nx;
        const double fxl = mx[j * nx + i] * (p[j * nx + i] - p[j * nx + il]) / g.hx;
        const double fxr = mx[j * nx + ir] * (p[j * nx + ir] - p[j * nx + i]) / g.hx;
        const double fyl =
            j > 0 ? my[j * nx + i] * (p[j * nx + i] - p[(j - 1) * nx + i]) / dyc_lo : 0.0;
        const double fyu =
            j + 1 < ny ? my[(j + 1) * nx + i] * (p[(j + 1) * nx + i] - p[j * nx + i]) / dyc_hi : 0.0;
        out[j * nx + i] = -((fxr - fxl) / g.hx + (fyu - fyl) * inv_hy);
      }
    }
  };

  std::vector<double> inv_diag(static_cast<size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j) {
    const double inv_hy = 1.0 / g.hy[j];
    const double dyc_lo = j > 0 ? g.y_center[j] - g.y_center[j - 1] : 1.0;
    const double dyc_hi = j + 1 < ny ? g.y_center[j + 1] - g.y_center[j] : 1.0;
    for (int i = 0; i < nx; ++i) {
      const int ir = (i + 1) % nx;
      double d = (mx[j * nx + i] + mx[j * nx + ir]) / (g.hx * g.hx);
      if (j > 0) d += my[j * nx + i] / dyc_lo * inv_hy;
      if (j + 1 < ny) d += my[(j + 1) * nx + i] / dyc_hi * inv_hy;
      inv_diag[j * nx + i] = 1.0 / d;
    }
  }

  auto dot = [&](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (int j = 0; j < ny; ++j) {
      double row = 0.0;
      for (int i = 0; i < nx; ++i) row += a[j * nx + i] * b[j * nx + i];
      s += row * g.cell_area(j);
    }
    return s;
  };

  // A = -div((1/rho) grad .) is symmetric nonnegative in this product.
  std::vector<double> b(rhs.c.size());
  for (size_t k = 0; k < b.size(); ++k) b[k] = -(rhs.c[k] - mean);

  std::vector<double> p;
  const PcgResult res = pcg(apply, inv_diag, dot, b, p, tol, max_iterations);

  pressure = make_scalar(g);
  pressure.c = std::move(p);
  const double pmean = integral(pressure) / area_total;
  for (double& v : pressure.c) v -= pmean;
  return {res.iterations, res.relative_residual};
}

// ---------------------------------------------------------------------------
// viscous solves (Crank-Nicolson, direction split)
// ---------------------------------------------------------------------------

namespace detail {

// y-diffusion of the u component: flux form over cell-center heights with a
// homogeneous Dirichlet wall closure.
inline void apply_ly_u(const Grid& g, const std::vector<double>& u, std::vector<double>& out) {
  const int nx = g.nx, ny = g.ny;
  for (int j = 0; j < ny; ++j) {
    const double inv_hy = 1.0 / g.hy[j];
    for (int i = 0; i < nx; ++i) {
      const double lo = j == 0 ? u[i] / g.y_center[0]
                               : (u[j * nx + i] - u[(j - 1) * nx + i]) /
                                     (g.y_center[j] - g.y_center[j - 1]);
      const double hi = j == ny - 1
                            ? -u[j * nx + i] / (g.domain.length_y - g.y_center[ny - 1])
                            : (u[(j + 1) * nx + i] - u[j * nx + i]) /
                                  (g.y_center[j + 1] - g.y_center[j]);
      out[j * nx + i] = (hi - lo) * inv_hy;
    }
  }
}

// y-diffusion of the v component on interior horizontal faces; wall rows are
// Dirichlet zero data.
inline void apply_ly_v(const Grid& g, const std::vector<double>& v, std::vector<double>& out) {
  const int nx = g.nx, ny = g.ny;
  for (int i = 0; i < nx; ++i) out[i] = 0.0;
  for (int i = 0; i < nx; ++i) out[ny * nx + i] = 0.0;
  for (int j = 1; j < ny; ++j) {
    const double inv_m = 1.0 / v_face_measure(g, j);
    for (int i = 0; i < nx; ++i) {
      const double lo = (v[j * nx + i] - v[(j - 1) * nx + i]) / g.hy[j - 1];
      const double hi = (v[(j + 1) * nx + i] - v[j * nx + i]) / g.hy[j];
      out[j * nx + i] = (hi - lo) * inv_m;
    }
  }
}

inline void apply_lx(const Grid& g, const std::vector<double>& w, int rows,
                     std::vector<double>& out) {
  const int nx = g.nx;
  const double inv_hx2 = 1.0 / (g.hx * g.hx);
  for (int j = 0; j < rows; ++j)
    for (int i = 0; i < nx; ++i) {
      const int il = (i + nx - 1) % nx, ir = (i + 1) % nx;
      out[j * nx + i] = (w[j * nx + ir] - 2.0 * w[j * nx + i] + w[j * nx + il]) * inv_hx2;
    }
}

// Solves (rho - coef*Lx) w = rhs row by row (periodic tridiagonal).
inline void solve_x_implicit(const Grid& g, const std::vector<double>& rho_face, double coef,
                             std::vector<double>& rhs, int rows) {
  const int nx = g.nx;
  const double a = coef / (g.hx * g.hx);
  std::vector<double> sub(nx, -a), diag(nx), super(nx, -a), r(nx);
  for (int j = 0; j < rows; ++j) {
    for (int i = 0; i < nx; ++i) {
      diag[i] = rho_face[j * nx + i] + 2.0 * a;
      r[i] = rhs[j * nx + i];
    }
    cyclic_tridiagonal_solve(sub, diag, super, -a, -a, r);
    for (int i = 0; i < nx; ++i) rhs[j * nx + i] = r[i];
  }
}

// Solves (rho - coef*Ly) u = rhs column by column for the u component.
inline void solve_y_implicit_u(const Grid& g, const std::vector<double>& rho_face, double coef,
                               std::vector<double>& rhs) {
  const int nx = g.nx, ny = g.ny;
  std::vector<double> sub(ny), diag(ny), super(ny), r(ny);
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      const double inv_hy = 1.0 / g.hy[j];
      const double clo = j == 0 ? 1.0 / g.y_center[0] : 1.0 / (g.y_center[j] - g.y_center[j - 1]);
      const double chi = j == ny - 1 ? 1.0 / (g.domain.length_y - g.y_center[ny - 1])
                                     : 1.0 / (g.y_center[j + 1] - g.y_center[j]);
      sub[j] = j == 0 ? 0.0 : -coef * clo * inv_hy;
      super[j] = j == ny - 1 ? 0.0 : -coef * chi * inv_hy;
      diag[j] = rho_face[j * nx + i] + coef * (clo + chi) * inv_hy;
      r[j] = rhs[j * nx + i];
    }
    tridiagonal_solve(sub, diag, super, r);
    for (int j = 0; j < ny; ++j) rhs[j * nx + i] = r[j];
  }
}

// Same for the v component on interior faces.
inline void solve_y_implicit_v(const Grid& g, const std::vector<double>& rho_face, double coef,
                               std::vector<double>& rhs) {
  const int nx = g.nx, ny = g.ny;
  const int n = ny - 1;
  if (n < 1) return;
  std::vector<double> sub(n), diag(n), super(n), r(n);
  for (int i = 0; i < nx; ++i) {
    for (int j = 1; j < ny; ++j) {
      const double inv_m = 1.0 / v_face_measure(g, j);
      const double clo = 1.0 / g.hy[j - 1];
      const double chi = 1.0 / g.hy[j];
      const int k = j - 1;
      sub[k] = j == 1 ? 0.0 : -coef * clo * inv_m;
      super[k] = j == ny - 1 ? 0.0 : -coef * chi * inv_m;
      diag[k] = rho_face[j * nx + i] + coef * (clo + chi) * inv_m;
      r[k] = rhs[j * nx + i];
    }
    tridiagonal_solve(sub, diag, super, r);
    for (int j = 1; j < ny; ++j) rhs[j * nx + i] = r[j - 1];
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// the time step
// ---------------------------------------------------------------------------

/// Largest advective time step: cfl times the smallest cell extent divided by
/// the largest face speed, per direction, capped by dt_max.
inline double stable_dt(const FlowState& s, const StepperSettings& cfg) {
  const Grid& g = *s.grid;
  double dt = cfg.dt_max;
  double umax = 0.0;
  for (double u : s.vel.u) umax = std::max(umax, std::abs(u));
  if (umax > 0.0) dt = std::min(dt, cfg.cfl * g.hx / umax);
  double vmax = 0.0;
  for (double v : s.vel.v) vmax = std::max(vmax, std::abs(v));
  if (vmax > 0.0) {
    double hy_min = g.hy[0];
    for (double h : g.hy) hy_min = std::min(hy_min, h);
    dt = std::min(dt, cfg.cfl * hy_min / vmax);
  }
  return dt;
}

/// Advances the state by dt.  Returns the new state; the input is untouched.
/// If a ledger is attached it receives the step's dissipation record.
inline FlowState step(const FlowState& s, double dt, const StepperSettings& cfg,
                      EnergyLedger* ledger = nullptr) {
  if (!(dt > 0.0) || !std::isfinite(dt))
    throw std::invalid_argument("step: dt must be positive and finite");
  const Grid& g = *s.grid;
  const int nx = g.nx, ny = g.ny;
  detail::check_cfl(s.vel, dt, "step");

  // --- density transport -------------------------------------------------
  const auto flux = detail::mass_fluxes(s.rho, s.vel);
  FlowState out;
  out.grid = s.grid;
  out.t = s.t + dt;
  out.nu = s.nu;
  out.rho = make_scalar(g);
  std::vector<double> cell_div(static_cast<size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const int ir = (i + 1) % nx;
      cell_div[j * nx + i] = (flux.fx[j * nx + ir] - flux.fx[j * nx + i]) / g.hx +
                             (flux.fy[(j + 1) * nx + i] - flux.fy[j * nx + i]) / g.hy[j];
      out.rho.at(i, j) = s.rho.at(i, j) - dt * cell_div[j * nx + i];
    }

  // --- face densities, before and after ----------------------------------
  std::vector<double> rho_u0(static_cast<size_t>(nx) * ny), rho_u1(rho_u0.size());
  std::vector<double> rho_v0(static_cast<size_t>(nx) * (ny + 1)), rho_v1(rho_v0.size());
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      rho_u0[j * nx + i] = detail::rho_at_u_face(s.rho, i, j);
      rho_u1[j * nx + i] = detail::rho_at_u_face(out.rho, i, j);
    }
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i < nx; ++i) {
      rho_v0[j * nx + i] = detail::rho_at_v_face(s.rho, i, j);
      rho_v1[j * nx + i] = detail::rho_at_v_face(out.rho, i, j);
    }

  // --- momentum advection (explicit, flux form) ---------------------------
  // Control volumes follow the staggering; mass fluxes through their faces
  // are averages of the cell fluxes, so the momentum update is consistent
  // with the density update and preserves constant velocity exactly in x.
  std::vector<double> mu(static_cast<size_t>(nx) * ny), mv(static_cast<size_t>(nx) * (ny + 1), 0.0);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) mu[j * nx + i] = rho_u0[j * nx + i] * s.vel.u[j * nx + i];
  for (int j = 1; j < ny; ++j)
    for (int i = 0; i < nx; ++i) mv[j * nx + i] = rho_v0[j * nx + i] * s.vel.v[j * nx + i];

  // u control volumes
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int ir = (i + 1) % nx, il = (i + nx - 1) % nx;
      // x faces of the CV sit at the neighbouring cell centers
      const double fr = 0.5 * (flux.fx[j * nx + i] + flux.fx[j * nx + ir]);
      const double fl = 0.5 * (flux.fx[j * nx + il] + flux.fx[j * nx + i]);
      const double ur = 0.5 * (s.vel.u[j * nx + i] + s.vel.u[j * nx + ir]);
      const double ul = 0.5 * (s.vel.u[j * nx + il] + s.vel.u[j * nx + i]);
      // y faces at the horizontal cell faces, flux averaged across the column
      double adv = (fr * ur - fl * ul) / g.hx;
      const double fyb = 0.5 * (flux.fy[j * nx + il] + flux.fy[j * nx + i]);
      const double fyt = 0.5 * (flux.fy[(j + 1) * nx + il] + flux.fy[(j + 1) * nx + i]);
      double ub = 0.0, ut = 0.0;
      if (j > 0) {
        const double wl = g.hy[j], wu = g.hy[j - 1];
        ub = (wl * s.vel.u[(j - 1) * nx + i] + wu * s.vel.u[j * nx + i]) / (wl + wu);
      }
      if (j + 1 < ny) {
        const double wl = g.hy[j + 1], wu = g.hy[j];
        ut = (wl * s.vel.u[j * nx + i] + wu * s.vel.u[(j + 1) * nx + i]) / (wl + wu);
      }
      adv += (fyt * ut - fyb * ub) / g.hy[j];
      mu[j * nx + i] -= dt * adv;
    }
  }

  // v control volumes (interior rows)
  for (int j = 1; j < ny; ++j) {
    const double inv_m = 1.0 / v_face_measure(g, j);
    for (int i = 0; i < nx; ++i) {
      const int ir = (i + 1) % nx, il = (i + nx - 1) % nx;
      const double wl = g.hy[j], wu = g.hy[j - 1];
      // x faces of the CV at the vertical cell faces, flux interpolated in y
      const double fxl = (wl * flux.fx[(j - 1) * nx + i] + wu * flux.fx[j * nx + i]) / (wl + wu);
      const double fxr = (wl * flux.fx[(j - 1) * nx + ir] + wu * flux.fx[j * nx + ir]) / (wl + wu);
      const double vl = 0.5 * (s.vel.v[j * nx + il] + s.vel.v[j * nx + i]);
      const double vr = 0.5 * (s.vel.v[j * nx + i] + s.vel.v[j * nx + ir]);
      double adv = (fxr * vr - fxl * vl) / g.hx;
      // y faces of the CV at the neighbouring cell centers
      const double fyb = 0.5 * (flux.fy[(j - 1) * nx + i] + flux.fy[j * nx + i]);
      const double fyt = 0.5 * (flux.fy[j * nx + i] + flux.fy[(j + 1) * nx + i]);
      const double vb = 0.5 * (s.vel.v[(j - 1) * nx + i] + s.vel.v[j * nx + i]);
      const double vt = 0.5 * (s.vel.v[j * nx + i] + s.vel.v[(j + 1) * nx + i]);
      adv += (fyt * vt - fyb * vb) * inv_m;
      mv[j * nx + i] -= dt * adv;
    }
  }

  // predictor velocities
  VectorField star = make_vector(g);
  for (size_t k = 0; k < mu.size(); ++k) star.u[k] = mu[k] / rho_u1[k];
  for (int j = 1; j < ny; ++j)
    for (int i = 0; i < nx; ++i) star.v[j * nx + i] = mv[j * nx + i] / rho_v1[j * nx + i];

  // --- implicit viscosity (Douglas split, Crank-Nicolson target) ----------
  const double k2 = 0.5 * s.nu * dt;  // half weight per direction
  {
    std::vector<double> lx(mu.size()), ly(mu.size()), rhs(mu.size());
    detail::apply_lx(g, star.u, ny, lx);
    detail::apply_ly_u(g, star.u, ly);
    for (size_t k = 0; k < rhs.size(); ++k)
      rhs[k] = rho_u1[k] * star.u[k] + k2 * lx[k] + 2.0 * k2 * ly[k];
    detail::solve_x_implicit(g, rho_u1, k2, rhs, ny);  // (rho - k2 Lx) u' = rhs
    for (size_t k = 0; k < rhs.size(); ++k) rhs[k] = rho_u1[k] * rhs[k] - k2 * ly[k];
    detail::solve_y_implicit_u(g, rho_u1, k2, rhs);  // (rho - k2 Ly) u'' = rho u' - k2 Ly u*
    star.u = rhs;
  }
  {
    std::vector<double> lx(mv.size()), ly(mv.size()), rhs(mv.size(), 0.0);
    detail::apply_lx(g, star.v, ny + 1, lx);
    detail::apply_ly_v(g, star.v, ly);
    for (int j = 1; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        const size_t k = static_cast<size_t>(j) * nx + i;
        rhs[k] = rho_v1[k] * star.v[k] + k2 * lx[k] + 2.0 * k2 * ly[k];
      }
    detail::solve_x_implicit(g, rho_v1, k2, rhs, ny + 1);  // wall rows are zero rhs -> zero
    for (int i = 0; i < nx; ++i) rhs[i] = rhs[static_cast<size_t>(ny) * nx + i] = 0.0;
    for (int j = 1; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        const size_t k = static_cast<size_t>(j) * nx + i;
        rhs[k] = rho_v1[k] * rhs[k] - k2 * ly[k];
      }
    detail::solve_y_implicit_v(g, rho_v1, k2, rhs);
    star.v = rhs;
    for (int i = 0; i < nx; ++i) star.v[i] = star.v[static_cast<size_t>(ny) * nx + i] = 0.0;
  }

  // --- projection ----------------------------------------------------------
  ScalarField div_star = divergence(star);
  for (double& v : div_star.c) v /= dt;
  out.pressure = make_scalar(g);
  const PoissonReport rep =
      solve_variable_poisson(out.rho, div_star, out.pressure, cfg.poisson_tol,
                             cfg.poisson_max_iterations);
  (void)rep;

  out.vel = make_vector(g);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const int il = (i + nx - 1) % nx;
      const double gp = (out.pressure.at(i, j) - out.pressure.at(il, j)) / g.hx;
      out.vel.u[j * nx + i] = star.u[j * nx + i] - dt * gp / rho_u1[j * nx + i];
    }
  for (int j = 1; j < ny; ++j) {
    const double dyc = g.y_center[j] - g.y_center[j - 1];
    for (int i = 0; i < nx; ++i) {
      const double gp = (out.pressure.at(i, j) - out.pressure.at(i, j - 1)) / dyc;
      out.vel.v[j * nx + i] = star.v[j * nx + i] - dt * gp / rho_v1[j * nx + i];
    }
  }
  declare_noslip(out.vel);

  // --- sanity --------------------------------------------------------------
  for (double v : out.vel.u)
    if (!std::isfinite(v)) throw SolverError("step: velocity became non-finite at t = " +
                                             std::to_string(out.t));
  for (double v : out.rho.c)
    if (!std::isfinite(v)) throw SolverError("step: density became non-finite at t = " +
                                             std::to_string(out.t));

  if (ledger) ledger->record_step(s, out);
  return out;
}

// ---------------------------------------------------------------------------
// initial states
// ---------------------------------------------------------------------------

struct InitialStateReport {
  double divergence_before = 0.0;
  double divergence_after = 0.0;
  double projection_correction = 0.0;  ///< L2 size of the div-cleanup
};

/// Builds the no-slip initial state from a catalog solution at t = 0: fields
/// are sampled at their staggered locations, wall rows are zeroed, and any
/// discrete divergence is projected away.  The returned report records how
/// much the projection moved the velocity.
inline FlowState initial_state(const Grid& grid, const EulerSolution& sol, double nu,
                               const StepperSettings& cfg, InitialStateReport* report = nullptr) {
  FlowState s;
  s.grid = &grid;
  s.t = 0.0;
  s.nu = nu;
  s.rho = sol.density_field(grid, 0.0);
  s.vel = sol.velocity_field(grid, 0.0);
  declare_noslip(s.vel);
  s.pressure = make_scalar(grid);

  InitialStateReport rep;
  ScalarField div = divergence(s.vel);
  rep.divergence_before = linf_norm(div);
  if (rep.divergence_before > 1e-13) {
    ScalarField p = make_scalar(grid);
    solve_variable_poisson(s.rho, div, p, cfg.poisson_tol, cfg.poisson_max_iterations);
    VectorField before = s.vel;
    const int nx = grid.nx, ny = grid.ny;
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        const int il = (i + nx - 1) % nx;
        s.vel.u_at(i, j) -= (p.at(i, j) - p.at(il, j)) / grid.hx / detail::rho_at_u_face(s.rho, i, j);
      }
    for (int j = 1; j < ny; ++j) {
      const double dyc = grid.y_center[j] - grid.y_center[j - 1];
      for (int i = 0; i < nx; ++i)
        s.vel.v_at(i, j) -= (p.at(i, j) - p.at(i, j - 1)) / dyc / detail::rho_at_v_face(s.rho, i, j);
    }
    for (size_t k = 0; k < before.u.size(); ++k) before.u[k] -= s.vel.u[k];
    for (size_t k = 0; k < before.v.size(); ++k) before.v[k] -= s.vel.v[k];
    rep.projection_correction = l2_norm(before);
  }
  rep.divergence_after = linf_norm(divergence(s.vel));
  if (report) *report = rep;
  return s;
}

// ---------------------------------------------------------------------------
// 1D heat oracle
// ---------------------------------------------------------------------------

/// Crank-Nicolson integration of rho0(y) dU/dt = nu d2U/dy2 on [0, ly] with
/// homogeneous Dirichlet ends, on a uniform grid of `resolution` intervals.
/// Input samples live on the same node set (resolution+1 values); the end
/// values are forced to zero, matching the no-slip wall rows of the 2D
/// solver.  Returns the profile at time t.
inline std::vector<double> heat_oracle_1d(std::vector<double> profile,
                                          const std::vector<double>& rho_profile, double nu,
                                          double t, int resolution, double ly = 1.0,
                                          int steps = 2000) {
  const size_t n = static_cast<size_t>(resolution) + 1;
  if (profile.size() != n || rho_profile.size() != n)
    throw std::invalid_argument("heat_oracle_1d: samples must hold resolution+1 node values");
  for (double r : rho_profile)
    if (!(r > 0.0)) throw std::invalid_argument("heat_oracle_1d: density must be positive");
  if (!(t >= 0.0)) throw std::invalid_argument("heat_oracle_1d: time must be nonnegative");
  profile.front() = 0.0;
  profile.back() = 0.0;
  if (t == 0.0) return profile;

  const double h = ly / resolution;
  const double dt = t / steps;
  const double r = 0.5 * nu * dt / (h * h);
  const int m = resolution - 1;  // interior unknowns
  std::vector<double> sub(m, -r), super(m, -r), diag(m), rhs(m);
  for (int s = 0; s < steps; ++s) {
    for (int k = 0; k < m; ++k) {
      const double rho = rho_profile[k + 1];
      diag[k] = rho + 2.0 * r;
      rhs[k] = rho * profile[k + 1] +
               r * (profile[k] - 2.0 * profile[k + 1] + profile[k + 2]);
    }
    tridiagonal_solve(sub, diag, super, rhs);
    for (int k = 0; k < m; ++k) profile[k + 1] = rhs[k];
  }
  return profile;
}

/// Full oracle run for shear decay: evolves the profile, accumulating the
/// same diagnostics the 2D solver reports (relative energy against the
/// initial profile, strip dissipation with midpoint-in-time sampling), so 2D
/// runs can be validated against an independent 1D integration.
struct OracleShearRun {
  std::vector<double> y;        ///< node heights
  std::vector<double> final_u;  ///< profile at the horizon
  double e1_final = 0.0;        ///< 1/2 integral rho0 |U(T) - U_ref|^2 * length_x
  double e1_sup = 0.0;          ///< sup over steps of the same quantity
  double kato_dissipation = 0.0;  ///< nu * integral over time of strip |dU/dy|^2 * length_x
  double dissipation_total = 0.0;
};

inline OracleShearRun oracle_shear_run(const std::function<double(double)>& u0,
                                       const std::function<double(double)>& rho0,
                                       const std::function<double(double)>& u_reference,
                                       double nu, double horizon, double layer_thickness,
                                       int resolution, int steps, double ly = 1.0,
                                       double lx = 1.0) {
  const int n = resolution + 1;
  OracleShearRun run;
  run.y.resize(n);
  std::vector<double> u(n), rho(n);
  const double h = ly / resolution;
  for (int k = 0; k < n; ++k) {
    run.y[k] = h * k;
    u[k] = u0(run.y[k]);
    rho[k] = rho0(run.y[k]);
  }
  u.front() = 0.0;
  u.back() = 0.0;

  auto e1_of = [&](const std::vector<double>& w) {
    // trapezoid over nodes of rho0 |w - u_ref|^2
    double s = 0.0;
    for (int k = 0; k < n; ++k) {
      const double d = w[k] - u_reference(run.y[k]);
      const double val = rho[k] * d * d;
      s += (k == 0 || k == n - 1) ? 0.5 * val : val;
    }
    return 0.5 * s * h * lx;
  };
  auto strip_grad_sq = [&](const std::vector<double>& w) {
    // midpoint quotients; a segment counts with its overlap of the strips
    double s = 0.0;
    for (int k = 0; k + 1 < n; ++k) {
      const double a = run.y[k], b = run.y[k + 1];
      const double cover = std::max(0.0, std::min(b, layer_thickness) - a) +
                           std::max(0.0, b - std::max(a, ly - layer_thickness));
      if (cover <= 0.0) continue;
      const double q = (w[k + 1] - w[k]) / h;
      s += q * q * std::min(cover, h);
    }
    return s * lx;
  };
  auto grad_sq = [&](const std::vector<double>& w) {
    double s = 0.0;
    for (int k = 0; k + 1 < n; ++k) {
      const double q = (w[k + 1] - w[k]) / h;
      s += q * q * h;
    }
    return s * lx;
  };

  run.e1_sup = e1_of(u);
  const double dt = horizon / steps;
  const double r = 0.5 * nu * dt / (h * h);
  const int m = resolution - 1;
  std::vector<double> sub(m, -r), super(m, -r), diag(m), rhs(m), mid(n);
  for (int s = 0; s < steps; ++s) {
    std::vector<double> prev = u;
    for (int k = 0; k < m; ++k) {
      diag[k] = rho[k + 1] + 2.0 * r;
      rhs[k] = rho[k + 1] * u[k + 1] + r * (u[k] - 2.0 * u[k + 1] + u[k + 2]);
    }
    tridiagonal_solve(sub, diag, super, rhs);
    for (int k = 0; k < m; ++k) u[k + 1] = rhs[k];
    for (int k = 0; k < n; ++k) mid[k] = 0.5 * (prev[k] + u[k]);
    run.kato_dissipation += nu * dt * strip_grad_sq(mid);
    run.dissipation_total += nu * dt * grad_sq(mid);
    run.e1_sup = std::max(run.e1_sup, e1_of(u));
  }
  run.final_u = u;
  run.e1_final = e1_of(u);
  return run;
}

// ---------------------------------------------------------------------------
// weak-form residuals over a trajectory
// ---------------------------------------------------------------------------

/// Snapshots at uniform output times.
struct Trajectory {
  std::vector<FlowState> states;
};

/// Space-time test function phi(t,x,y) = (fx, fy)(x,y) * chi(t) for the
/// momentum form.  The spatial part must be divergence free with zero trace.
struct VectorTestFunction {
  ScalarFn fx, fy;
  std::function<double(double)> chi;
};

/// theta(t,x,y) = f(x,y) * chi(t) for the transport form.
struct ScalarTestFunction {
  ScalarFn f;
  std::function<double(double)> chi;
};

struct WeakResiduals {
  double momentum = 0.0;
  double transport = 0.0;
};

/// Evaluates how well a stored trajectory satisfies the weak momentum and
/// transport identities against the given test functions.  Time-derivative
/// terms use the product-difference form, which telescopes exactly, so rest
/// states and theta = 1 (mass conservation) come out at roundoff; for smooth
/// runs the residual decays at the scheme's order.
inline WeakResiduals weak_residuals(const Trajectory& traj, const VectorTestFunction& phi,
                                    const ScalarTestFunction& theta) {
  if (traj.states.size() < 2)
    throw std::invalid_argument("weak_residuals: trajectory needs at least two snapshots");
  const Grid& g = *traj.states.front().grid;

  const VectorField phi_space = sample_vector(g, phi.fx, phi.fy);
  {
    ScalarField div = divergence(phi_space);
    const double scale = std::max(1.0, linf_norm(phi_space));
    if (linf_norm(div) > 1e-8 * scale)
      throw std::invalid_argument("weak_residuals: vector test function is not divergence free");
  }
  const ScalarField theta_space = sample_scalar(g, theta.f);
  const VectorField theta_gradient = gradient(theta_space);
  const CellGradientTensor gphi = cell_gradient_tensor(phi_space);

  auto mass_velocity_pairing = [&](const FlowState& st) {
    // integral rho u . phi_space with face densities
    double s = 0.0;
    for (int j = 0; j < g.ny; ++j) {
      double row = 0.0;
      for (int i = 0; i < g.nx; ++i)
        row += detail::rho_at_u_face(st.rho, i, j) * st.vel.u_at(i, j) * phi_space.u_at(i, j);
      s += row * g.hx * g.hy[j];
    }
    for (int j = 1; j < g.ny; ++j) {
      double row = 0.0;
      for (int i = 0; i < g.nx; ++i)
        row += detail::rho_at_v_face(st.rho, i, j) * st.vel.v_at(i, j) * phi_space.v_at(i, j);
      s += row * g.hx * v_face_measure(g, j);
    }
    return s;
  };

  auto advection_pairing = [&](const FlowState& st) {
    // integral rho (u tensor u) : grad phi at cell centers
    const auto [uc, vc] = to_centers(st.vel);
    double s = 0.0;
    for (int j = 0; j < g.ny; ++j) {
      double row = 0.0;
      for (int i = 0; i < g.nx; ++i) {
        const double r = st.rho.at(i, j);
        const double a = uc.at(i, j), b = vc.at(i, j);
        row += r * (a * a * gphi.dxu.at(i, j) + a * b * (gphi.dyu.at(i, j) + gphi.dxv.at(i, j)) +
                    b * b * gphi.dyv.at(i, j));
      }
      s += row * g.cell_area(j);
    }
    return s;
  };

  auto viscous_pairing = [&](const FlowState& st) {
    return st.nu * gradient_dirichlet_form(st.vel, phi_space);
  };

  auto transport_gradient_pairing = [&](const FlowState& st) {
    // integral rho u . grad theta via the face inner product
    VectorField mom = make_vector(g);
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i)
        mom.u_at(i, j) = detail::rho_at_u_face(st.rho, i, j) * st.vel.u_at(i, j);
    for (int j = 1; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i)
        mom.v_at(i, j) = detail::rho_at_v_face(st.rho, i, j) * st.vel.v_at(i, j);
    return inner(mom, theta_gradient);
  };

  auto density_pairing = [&](const FlowState& st) {
    double s = 0.0;
    for (int j = 0; j < g.ny; ++j) {
      double row = 0.0;
      for (int i = 0; i < g.nx; ++i) row += st.rho.at(i, j) * theta_space.at(i, j);
      s += row * g.cell_area(j);
    }
    return s;
  };

  const auto& states = traj.states;
  const double t0 = states.front().t, tN = states.back().t;

  double momentum = mass_velocity_pairing(states.back()) * phi.chi(tN) -
                    mass_velocity_pairing(states.front()) * phi.chi(t0);
  double transport = density_pairing(states.back()) * theta.chi(tN) -
                     density_pairing(states.front()) * theta.chi(t0);

  for (size_t k = 0; k + 1 < states.size(); ++k) {
    const FlowState& a = states[k];
    const FlowState& b = states[k + 1];
    const double dt = b.t - a.t;

    // d/dt terms in product-difference form
    momentum -= 0.5 * (mass_velocity_pairing(a) + mass_velocity_pairing(b)) *
                (phi.chi(b.t) - phi.chi(a.t));
    transport -= 0.5 * (density_pairing(a) + density_pairing(b)) *
                 (theta.chi(b.t) - theta.chi(a.t));

    // advective and viscous terms by the trapezoid rule
    momentum -= 0.5 * dt *
                (advection_pairing(a) * phi.chi(a.t) + advection_pairing(b) * phi.chi(b.t));
    momentum += 0.5 * dt * (viscous_pairing(a) * phi.chi(a.t) + viscous_pairing(b) * phi.chi(b.t));
    transport -= 0.5 * dt *
                 (transport_gradient_pairing(a) * theta.chi(a.t) +
                  transport_gradient_pairing(b) * theta.chi(b.t));
  }

  return {std::abs(momentum), std::abs(transport)};
}

}  // namespace vvlab
