#pragma once

// Boundary-layer corrector: a divergence-free lift of the catalog velocity's
// tangential wall trace, supported in strips of width nu at the walls.  It is
// realized as the perpendicular gradient of (cutoff of dist/nu) * stream
// function, evaluated on grid nodes, so the discrete field is exactly
// divergence free and vanishes identically outside the strips.

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "vvlab/euler.hpp"
#include "vvlab/fields.hpp"
#include "vvlab/fitting.hpp"
#include "vvlab/geometry.hpp"
#include "vvlab/operators.hpp"

namespace vvlab {

/// Smooth cutoff on [0, infinity): value(0) = 1, identically zero from 1 on,
/// with matching derivatives for bound computations.
struct CutoffProfile {
  std::function<double(double)> value;
  std::function<double(double)> derivative;
  std::function<double(double)> second_derivative;
};

/// The standard bump-style cutoff exp(1 - 1/(1 - s^2)), extended by zero past
/// s = 1.  Infinitely differentiable; the derivative vanishes at s = 0, which
/// keeps the corrector's wall trace equal to the catalog trace exactly.
inline CutoffProfile default_cutoff() {
  // Below this margin for 1 - s^2 the exponential is under 1e-300 and any
  // rational prefactor still rounds to zero; returning 0 avoids inf * 0.
  constexpr double kMargin = 1.0 / 700.0;
  auto eta = [](double s) {
    if (s <= 0.0) return s == 0.0 ? 1.0 : throw std::domain_error("cutoff: negative argument");
    const double t = 1.0 - s * s;
    if (t <= kMargin) return 0.0;
    return std::exp(1.0 - 1.0 / t);
  };
  auto deta = [](double s) {
    if (s < 0.0) throw std::domain_error("cutoff: negative argument");
    const double t = 1.0 - s * s;
    if (t <= kMargin) return 0.0;
    return std::exp(1.0 - 1.0 / t) * (-2.0 * s / (t * t));
  };
  auto d2eta = [](double s) {
    if (s < 0.0) throw std::domain_error("cutoff: negative argument");
    const double t = 1.0 - s * s;
    if (t <= kMargin) return 0.0;
    const double a = 2.0 * s / (t * t);
    return std::exp(1.0 - 1.0 / t) * (a * a - 2.0 * (1.0 + 3.0 * s * s) / (t * t * t));
  };
  return {eta, deta, d2eta};
}

/// The corrector field at one viscosity, together with its support mask.
struct CorrectorField {
  double nu = 0.0;
  VectorField field;   ///< faces; wall traces equal the catalog wall velocity
  LayerMask support;   ///< strip of width nu; the field vanishes outside
};

/// Builds the corrector for a catalog solution at time t.  Requires the strip
/// to be resolved: nu must exceed four wall-cell heights.
inline CorrectorField build_corrector(const Grid& grid, const EulerSolution& sol, double t,
                                      double nu, const CutoffProfile& cutoff = default_cutoff()) {
  if (!(nu > 0.0)) throw std::invalid_argument("build_corrector: nu must be positive");
  if (!(nu > 4.0 * grid.min_wall_spacing()))
    throw std::invalid_argument(
        "build_corrector: strip width " + std::to_string(nu) + " is under-resolved; need nu > 4 "
        "wall cells (smallest is " + std::to_string(grid.min_wall_spacing()) + ")");
  const double ly = grid.domain.length_y;
  if (!(2.0 * nu < ly))
    throw std::invalid_argument("build_corrector: strips of width nu overlap mid-channel");

  NodeField masked_stream = sample_nodes(grid, [&](double x, double y) {
    const double d = std::min(y, ly - y);
    return cutoff.value(d / nu) * sol.stream(t, x, y);
  });

  CorrectorField c;
  c.nu = nu;
  c.field = curl_of_scalar(masked_stream);
  // The stream function is constant along each wall, so the normal component
  // vanishes there; pin the rows to make it exact.
  const int nx = grid.nx, ny = grid.ny;
  for (int i = 0; i < nx; ++i) {
    c.field.v_at(i, 0) = 0.0;
    c.field.v_at(i, ny) = 0.0;
  }
  c.field.wall_u_bottom = std::vector<double>(nx);
  c.field.wall_u_top = std::vector<double>(nx);
  for (int i = 0; i < nx; ++i) {
    (*c.field.wall_u_bottom)[i] = sol.u(t, grid.x_face(i), 0.0);
    (*c.field.wall_u_top)[i] = sol.u(t, grid.x_face(i), ly);
  }
  c.support = layer_mask(grid, nu);
  return c;
}

/// Time derivative of the corrector.  Exact zero for steady catalog entries;
/// otherwise a central difference of the masked stream function.
inline VectorField corrector_time_derivative(const Grid& grid, const EulerSolution& sol, double t,
                                             double nu,
                                             const CutoffProfile& cutoff = default_cutoff()) {
  if (sol.steady) {
    VectorField z = make_vector(grid);
    declare_noslip(z);
    return z;
  }
  const double ly = grid.domain.length_y;
  const double h = nu / 10.0;  // step tied to the layer's own time scale
  NodeField diff = sample_nodes(grid, [&](double x, double y) {
    const double d = std::min(y, ly - y);
    const double eta = cutoff.value(d / nu);
    return eta * (sol.stream(t + h, x, y) - sol.stream(t - h, x, y)) / (2.0 * h);
  });
  VectorField out = curl_of_scalar(diff);
  out.wall_u_bottom = std::vector<double>(grid.nx);
  out.wall_u_top = std::vector<double>(grid.nx);
  for (int i = 0; i < grid.nx; ++i) {
    const double x = grid.x_face(i);
    (*out.wall_u_bottom)[i] = (sol.u(t + h, x, 0.0) - sol.u(t - h, x, 0.0)) / (2.0 * h);
    (*out.wall_u_top)[i] = (sol.u(t + h, x, ly) - sol.u(t - h, x, ly)) / (2.0 * h);
  }
  for (int i = 0; i < grid.nx; ++i) out.v_at(i, 0) = out.v_at(i, grid.ny) = 0.0;
  return out;
}

/// The six norms the sharpness study tracks at a single viscosity.
struct CorrectorNorms {
  double nu = 0.0;
  double sup = 0.0;             ///< max |field|
  double grad_sup = 0.0;        ///< max Frobenius norm of the gradient
  double l2 = 0.0;
  double grad_l2 = 0.0;
  double dt_l2 = 0.0;           ///< zero for steady entries
  double dist2_grad_sup = 0.0;  ///< max of dist^2 times the gradient magnitude
};

inline CorrectorNorms compute_corrector_norms(const Grid& grid, const EulerSolution& sol, double t,
                                              double nu,
                                              const CutoffProfile& cutoff = default_cutoff()) {
  const CorrectorField c = build_corrector(grid, sol, t, nu, cutoff);
  CorrectorNorms n;
  n.nu = nu;
  for (double w : c.field.u) n.sup = std::max(n.sup, std::abs(w));
  for (double w : c.field.v) n.sup = std::max(n.sup, std::abs(w));
  for (double w : *c.field.wall_u_bottom) n.sup = std::max(n.sup, std::abs(w));
  for (double w : *c.field.wall_u_top) n.sup = std::max(n.sup, std::abs(w));

  const CellGradientTensor ten = cell_gradient_tensor(c.field);
  const double ly = grid.domain.length_y;
  for (int j = 0; j < grid.ny; ++j) {
    const double d = std::min(grid.y_center[j], ly - grid.y_center[j]);
    for (int i = 0; i < grid.nx; ++i) {
      const double fro = std::hypot(std::hypot(ten.dxu.at(i, j), ten.dyu.at(i, j)),
                                    std::hypot(ten.dxv.at(i, j), ten.dyv.at(i, j)));
      n.grad_sup = std::max(n.grad_sup, fro);
      n.dist2_grad_sup = std::max(n.dist2_grad_sup, d * d * fro);
    }
  }
  n.l2 = l2_norm(c.field);
  n.grad_l2 = std::sqrt(integral(gradient_tensor_norms(c.field)));
  n.dt_l2 = sol.steady ? 0.0 : l2_norm(corrector_time_derivative(grid, sol, t, nu, cutoff));
  return n;
}

/// Norms across a viscosity ladder plus log-log rate fits.  For steady
/// catalog entries the time-derivative norm is identically zero and its fit
/// is marked degenerate instead of being forced through log(0).
struct CorrectorBoundCheck {
  std::vector<CorrectorNorms> norms;
  RateFit sup_fit, grad_sup_fit, l2_fit, grad_l2_fit, dist2_fit;
  bool dt_degenerate = false;
  RateFit dt_fit;
};

inline CorrectorBoundCheck verify_corrector_bounds(const Grid& grid, const EulerSolution& sol,
                                                   double t, const std::vector<double>& nus,
                                                   const CutoffProfile& cutoff = default_cutoff()) {
  if (nus.size() < 4)
    throw std::invalid_argument("verify_corrector_bounds: need at least four viscosities");
  CorrectorBoundCheck out;
  std::vector<double> sup, gsup, l2, gl2, dt, d2g;
  for (double nu : nus) {
    out.norms.push_back(compute_corrector_norms(grid, sol, t, nu, cutoff));
    const CorrectorNorms& n = out.norms.back();
    sup.push_back(n.sup);
    gsup.push_back(n.grad_sup);
    l2.push_back(n.l2);
    gl2.push_back(n.grad_l2);
    dt.push_back(n.dt_l2);
    d2g.push_back(n.dist2_grad_sup);
  }
  out.sup_fit = fit_rate(sup, nus);
  out.grad_sup_fit = fit_rate(gsup, nus);
  out.l2_fit = fit_rate(l2, nus);
  out.grad_l2_fit = fit_rate(gl2, nus);
  out.dist2_fit = fit_rate(d2g, nus);
  out.dt_degenerate = *std::max_element(dt.begin(), dt.end()) <= 0.0;
  if (!out.dt_degenerate) out.dt_fit = fit_rate(dt, nus);
  return out;
}

}  // namespace vvlab
