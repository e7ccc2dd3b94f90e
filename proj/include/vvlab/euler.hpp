#pragma once

// Catalog of closed-form solutions of the incompressible, variable-density
// Euler equations on the periodic channel, used as reference states for the
// vanishing-viscosity diagnostics.  Every entry carries its fields and first
// derivatives as evaluable closed forms plus a stream function for the
// velocity, so corrector construction needs no numerical integration.

#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>

#include "vvlab/fields.hpp"
#include "vvlab/operators.hpp"

namespace vvlab {

/// A smooth channel Euler solution in closed form.  Velocity satisfies the
/// slip condition (zero normal component on the walls); the tangential wall
/// velocity may be nonzero.  stream is the scalar whose perpendicular
/// gradient is the velocity, normalized to vanish on both walls.
struct EulerSolution {
  using Fn = std::function<double(double t, double x, double y)>;

  std::string name;
  bool steady = true;

  Fn rho, u, v, p, stream;
  Fn du_dt, dv_dt, drho_dt;
  Fn dux, duy, dvx, dvy;      // velocity gradient entries d(u,v)/d(x,y)
  Fn drho_dx, drho_dy;
  Fn dp_dx, dp_dy;

  double momentum_residual_x(double t, double x, double y) const {
    const double r = rho(t, x, y);
    return r * (du_dt(t, x, y) + u(t, x, y) * dux(t, x, y) + v(t, x, y) * duy(t, x, y)) +
           dp_dx(t, x, y);
  }
  double momentum_residual_y(double t, double x, double y) const {
    const double r = rho(t, x, y);
    return r * (dv_dt(t, x, y) + u(t, x, y) * dvx(t, x, y) + v(t, x, y) * dvy(t, x, y)) +
           dp_dy(t, x, y);
  }
  double transport_residual(double t, double x, double y) const {
    return drho_dt(t, x, y) + u(t, x, y) * drho_dx(t, x, y) + v(t, x, y) * drho_dy(t, x, y);
  }
  double divergence_residual(double t, double x, double y) const {
    return dux(t, x, y) + dvy(t, x, y);
  }

  VectorField velocity_field(const Grid& grid, double t) const {
    return sample_vector(
        grid, [&](double x, double y) { return u(t, x, y); },
        [&](double x, double y) { return v(t, x, y); });
  }
  ScalarField density_field(const Grid& grid, double t) const {
    return sample_scalar(grid, [&](double x, double y) { return rho(t, x, y); });
  }
  NodeField stream_nodes(const Grid& grid, double t) const {
    return sample_nodes(grid, [&](double x, double y) { return stream(t, x, y); });
  }
  VectorField velocity_time_derivative(const Grid& grid, double t) const {
    return sample_vector(
        grid, [&](double x, double y) { return du_dt(t, x, y); },
        [&](double x, double y) { return dv_dt(t, x, y); });
  }
};

namespace detail {

inline EulerSolution::Fn constant_fn(double value) {
  return [value](double, double, double) { return value; };
}

inline void apply_density_profile(EulerSolution& sol, const Domain& dom, double contrast) {
  if (!(contrast >= 0.0 && contrast < 1.0))
    throw std::invalid_argument(sol.name + ": density contrast must lie in [0, 1), got " +
                                std::to_string(contrast));
  const double ky = std::numbers::pi / dom.length_y;
  sol.rho = [contrast, ky](double, double, double y) { return 1.0 + contrast * std::cos(ky * y); };
  sol.drho_dy = [contrast, ky](double, double, double y) {
    return -contrast * ky * std::sin(ky * y);
  };
  sol.drho_dx = constant_fn(0.0);
  sol.drho_dt = constant_fn(0.0);
}

inline EulerSolution shear_base(const Domain& dom, const std::string& name, double rho_contrast) {
  EulerSolution sol;
  sol.name = name;
  sol.steady = true;
  sol.v = constant_fn(0.0);
  sol.p = constant_fn(0.0);
  sol.du_dt = constant_fn(0.0);
  sol.dv_dt = constant_fn(0.0);
  sol.dux = constant_fn(0.0);
  sol.dvx = constant_fn(0.0);
  sol.dvy = constant_fn(0.0);
  sol.dp_dx = constant_fn(0.0);
  sol.dp_dy = constant_fn(0.0);
  apply_density_profile(sol, dom, rho_contrast);
  return sol;
}

}  // namespace detail

/// The trivial state: fluid at rest with unit density.
inline EulerSolution rest_state(const Domain& dom) {
  EulerSolution sol = detail::shear_base(dom, "rest", 0.0);
  sol.u = detail::constant_fn(0.0);
  sol.duy = detail::constant_fn(0.0);
  sol.stream = detail::constant_fn(0.0);
  return sol;
}

/// Steady shear with velocity (A sin(k pi y / L_y), 0) and a cosine density
/// profile of the given contrast.  The mode must be even: odd modes carry net
/// mass flux through the channel, which is incompatible with a wall-vanishing
/// stream function, and are rejected.  The profile vanishes on both walls, so
/// it doubles as admissible no-slip initial data.
inline EulerSolution steady_shear(const Domain& dom, double amplitude, int mode,
                                  double rho_contrast) {
  if (mode < 1) throw std::invalid_argument("steady_shear: mode must be a positive integer");
  if (mode % 2 != 0)
    throw std::invalid_argument(
        "steady_shear: odd modes have nonzero net flux across the channel; use an even mode");
  EulerSolution sol = detail::shear_base(dom, "steady_shear", rho_contrast);
  const double k = mode * std::numbers::pi / dom.length_y;
  const double a = amplitude;
  sol.u = [a, k](double, double, double y) { return a * std::sin(k * y); };
  sol.duy = [a, k](double, double, double y) { return a * k * std::cos(k * y); };
  sol.stream = [a, k](double, double, double y) { return a / k * (1.0 - std::cos(k * y)); };
  return sol;
}

/// Steady shear with velocity (A cos(2 k pi y / L_y), 0): zero net flux for
/// every mode, but a nonzero tangential wall velocity A.  This is the entry
/// that exercises boundary-layer phenomena, since a no-slip flow started from
/// it mismatches the reference at the walls immediately.
inline EulerSolution steady_cosine_shear(const Domain& dom, double amplitude, int mode,
                                         double rho_contrast) {
  if (mode < 1)
    throw std::invalid_argument("steady_cosine_shear: mode must be a positive integer");
  EulerSolution sol = detail::shear_base(dom, "steady_cosine_shear", rho_contrast);
  const double k = 2.0 * mode * std::numbers::pi / dom.length_y;
  const double a = amplitude;
  sol.u = [a, k](double, double, double y) { return a * std::cos(k * y); };
  sol.duy = [a, k](double, double, double y) { return -a * k * std::sin(k * y); };
  sol.stream = [a, k](double, double, double y) { return a / k * std::sin(k * y); };
  return sol;
}

// Unit-channel conveniences; the default Domain is the 1 x 1 periodic strip.
inline EulerSolution rest_state() { return rest_state(Domain{}); }
inline EulerSolution steady_shear(double amplitude, int mode, double rho_contrast) {
  return steady_shear(Domain{}, amplitude, mode, rho_contrast);
}
inline EulerSolution steady_cosine_shear(double amplitude, int mode, double rho_contrast) {
  return steady_cosine_shear(Domain{}, amplitude, mode, rho_contrast);
}

/// Discrete L2 norms of the pointwise momentum, transport, and divergence
/// residuals sampled at cell centers.
struct EulerResidualNorms {
  double momentum = 0.0;
  double transport = 0.0;
  double divergence = 0.0;
};

inline EulerResidualNorms residual_norms(const EulerSolution& sol, const Grid& grid, double t) {
  double mom = 0.0, tra = 0.0, div = 0.0;
  for (int j = 0; j < grid.ny; ++j) {
    double rm = 0.0, rt = 0.0, rd = 0.0;
    for (int i = 0; i < grid.nx; ++i) {
      const double x = grid.x_center(i), y = grid.y_center[j];
      const double mx = sol.momentum_residual_x(t, x, y);
      const double my = sol.momentum_residual_y(t, x, y);
      const double tr = sol.transport_residual(t, x, y);
      const double dv = sol.divergence_residual(t, x, y);
      rm += mx * mx + my * my;
      rt += tr * tr;
      rd += dv * dv;
    }
    mom += rm * grid.cell_area(j);
    tra += rt * grid.cell_area(j);
    div += rd * grid.cell_area(j);
  }
  return {std::sqrt(mom), std::sqrt(tra), std::sqrt(div)};
}

}  // namespace vvlab
