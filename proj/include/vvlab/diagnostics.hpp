#pragma once

// Relative-energy diagnostics: the two energy components against a catalog
// solution, the layer dissipation, the five cross terms of the energy
// estimate, and the discrete closure audit
//
//   E(s) <= E(0) + C * integral of E + R(s)
//
// with both the constant C and the remainder R measured, not assumed.  R
// collects the corrector-dependent terms (convection against the corrector
// gradient, viscous cross term, corrector time pairing) plus the boundary
// pairing of momentum with the corrector at the endpoint times; everything
// else is absorbed into C via sup bounds of the smooth fields.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "vvlab/corrector.hpp"
#include "vvlab/euler.hpp"
#include "vvlab/fields.hpp"
#include "vvlab/geometry.hpp"
#include "vvlab/operators.hpp"
#include "vvlab/solver.hpp"

namespace vvlab {

struct RelativeEnergySample {
  double t = 0.0;
  double e1 = 0.0;  ///< 1/2 integral rho_nu |u_nu - u|^2
  double e2 = 0.0;  ///< 1/2 integral (rho_nu - rho)^2
  double total() const { return e1 + e2; }
};

inline RelativeEnergySample relative_energy(const FlowState& s, const EulerSolution& sol) {
  const Grid& g = *s.grid;
  VectorField diff = make_vector(g);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      diff.u_at(i, j) = s.vel.u_at(i, j) - sol.u(s.t, g.x_face(i), g.y_center[j]);
  for (int j = 1; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      diff.v_at(i, j) = s.vel.v_at(i, j) - sol.v(s.t, g.x_center(i), g.y_face[j]);

  RelativeEnergySample out;
  out.t = s.t;
  out.e1 = kinetic_energy(s.rho, diff);
  double acc = 0.0;
  for (int j = 0; j < g.ny; ++j) {
    double row = 0.0;
    for (int i = 0; i < g.nx; ++i) {
      const double d = s.rho.at(i, j) - sol.rho(s.t, g.x_center(i), g.y_center[j]);
      row += d * d;
    }
    acc += row * g.cell_area(j);
  }
  out.e2 = 0.5 * acc;
  return out;
}

/// Layer dissipation accumulated up to the horizon.
inline double kato_dissipation(const EnergyLedger& ledger, double horizon) {
  return ledger.dissipation_at(horizon, /*layer=*/true);
}

// ---------------------------------------------------------------------------
// cross terms of the energy estimate
// ---------------------------------------------------------------------------

/// Instantaneous values of the five cross terms plus the Hardy-side bound on
/// the corrector convection term.
struct GronwallBreakdown {
  double t = 0.0;
  double i1 = 0.0;  ///< -int rho_nu ((u_nu-u).grad)u . (u_nu-u)
  double i2 = 0.0;  ///< int (rho_nu-rho) (u.grad)u . (u-u_nu)
  double i3 = 0.0;  ///< int rho_nu (u_nu.grad)Phi . u_nu
  double i4 = 0.0;  ///< int (rho_nu-rho) (u_nu-u) . dt u
  double i5 = 0.0;  ///< nu int grad u_nu : grad(u - Phi)
  double hardy_bound = 0.0;
};

/// One-sided Hardy constant for zero-trace functions on a wall strip,
/// int (f/d)^2 <= 4 int |f'|^2; dominates every measured family ratio and
/// keeps the reported bound a true bound.
inline constexpr double kHardyConstant = 4.0;

inline GronwallBreakdown gronwall_terms(const FlowState& s, const EulerSolution& sol,
                                        const CorrectorField& corr,
                                        double hardy_constant = kHardyConstant) {
  const Grid& g = *s.grid;
  GronwallBreakdown out;
  out.t = s.t;

  const auto [uc, vc] = to_centers(s.vel);
  const CellGradientTensor gphi = cell_gradient_tensor(corr.field);

  double i1 = 0.0, i2 = 0.0, i3 = 0.0, i4 = 0.0;
  double rho_max = 0.0, dist2_grad = 0.0;
  const double ly = g.domain.length_y;
  for (int j = 0; j < g.ny; ++j) {
    const double area = g.cell_area(j);
    const double yc = g.y_center[j];
    const double d = std::min(yc, ly - yc);
    double r1 = 0.0, r2 = 0.0, r3 = 0.0, r4 = 0.0;
    for (int i = 0; i < g.nx; ++i) {
      const double x = g.x_center(i);
      const double rn = s.rho.at(i, j);
      rho_max = std::max(rho_max, rn);
      const double ra = sol.rho(s.t, x, yc);
      const double ua = sol.u(s.t, x, yc), va = sol.v(s.t, x, yc);
      const double wx = uc.at(i, j) - ua, wy = vc.at(i, j) - va;

      const double dux = sol.dux(s.t, x, yc), duy = sol.duy(s.t, x, yc);
      const double dvx = sol.dvx(s.t, x, yc), dvy = sol.dvy(s.t, x, yc);
      r1 -= rn * (wx * (wx * dux + wy * duy) + wy * (wx * dvx + wy * dvy));

      const double ax = ua * dux + va * duy;  // (u.grad)u
      const double ay = ua * dvx + va * dvy;
      r2 += (rn - ra) * (ax * (-wx) + ay * (-wy));

      const double px = uc.at(i, j) * gphi.dxu.at(i, j) + vc.at(i, j) * gphi.dyu.at(i, j);
      const double py = uc.at(i, j) * gphi.dxv.at(i, j) + vc.at(i, j) * gphi.dyv.at(i, j);
      r3 += rn * (uc.at(i, j) * px + vc.at(i, j) * py);

      r4 += (rn - ra) * (wx * sol.du_dt(s.t, x, yc) + wy * sol.dv_dt(s.t, x, yc));

      const double fro = std::hypot(std::hypot(gphi.dxu.at(i, j), gphi.dyu.at(i, j)),
                                    std::hypot(gphi.dxv.at(i, j), gphi.dyv.at(i, j)));
      dist2_grad = std::max(dist2_grad, d * d * fro);
    }
    i1 += r1 * area;
    i2 += r2 * area;
    i3 += r3 * area;
    i4 += r4 * area;
  }
  out.i1 = i1;
  out.i2 = i2;
  out.i3 = i3;
  out.i4 = i4;

  VectorField corrected = sol.velocity_field(g, s.t);
  for (size_t k = 0; k < corrected.u.size(); ++k) corrected.u[k] -= corr.field.u[k];
  for (size_t k = 0; k < corrected.v.size(); ++k) corrected.v[k] -= corr.field.v[k];
  declare_noslip(corrected);  // traces cancel analytically
  out.i5 = s.nu * gradient_dirichlet_form(s.vel, corrected);

  const double strip_grad = masked_integral(gradient_tensor_norms(s.vel), corr.support);
  out.hardy_bound = hardy_constant * rho_max * dist2_grad * strip_grad;
  return out;
}

// ---------------------------------------------------------------------------
// closure audit
// ---------------------------------------------------------------------------

/// Measured Gronwall constant for a catalog solution: sup bounds of the
/// smooth fields evaluated on the grid's sample points at time t, combined
/// exactly as the absorption estimates use them.
inline double gronwall_constant(const Grid& g, const EulerSolution& sol, double t,
                                double rho_floor) {
  double grad_u = 0.0, adv = 0.0, dt_u = 0.0, grad_rho = 0.0;
  for (int j = 0; j < g.ny; ++j) {
    const double y = g.y_center[j];
    for (int i = 0; i < g.nx; ++i) {
      const double x = g.x_center(i);
      const double dux = sol.dux(t, x, y), duy = sol.duy(t, x, y);
      const double dvx = sol.dvx(t, x, y), dvy = sol.dvy(t, x, y);
      grad_u = std::max(grad_u, std::hypot(std::hypot(dux, duy), std::hypot(dvx, dvy)));
      const double ua = sol.u(t, x, y), va = sol.v(t, x, y);
      adv = std::max(adv, std::hypot(ua * dux + va * duy, ua * dvx + va * dvy));
      dt_u = std::max(dt_u, std::hypot(sol.du_dt(t, x, y), sol.dv_dt(t, x, y)));
      grad_rho = std::max(grad_rho, std::hypot(sol.drho_dx(t, x, y), sol.drho_dy(t, x, y)));
    }
  }
  if (!(rho_floor > 0.0))
    throw std::invalid_argument("gronwall_constant: density floor must be positive");
  return 2.0 * grad_u + (adv + dt_u + grad_rho) * (1.0 + 1.0 / rho_floor);
}

/// Collects per-sample energies and cross terms over a run and evaluates the
/// discrete closure inequality with measured constant and remainder.
class GronwallAudit {
 public:
  GronwallAudit(const EulerSolution& sol, const CorrectorField& corr, double hardy_constant)
      : sol_(&sol), corr_(&corr), hardy_constant_(hardy_constant) {}

  void add(const FlowState& s) {
    if (samples_.empty()) {
      double rho_min = s.rho.c.front();
      for (double r : s.rho.c) rho_min = std::min(rho_min, r);
      c_e_ = gronwall_constant(*s.grid, *sol_, s.t, rho_min);
    }
    energies_.push_back(relative_energy(s, *sol_));
    samples_.push_back(gronwall_terms(s, *sol_, *corr_, hardy_constant_));
    pairing_.push_back(momentum_corrector_pairing(s));
    dt_pairing_.push_back(sol_->steady ? 0.0 : time_pairing(s));
  }

  double constant() const { return c_e_; }
  const std::vector<RelativeEnergySample>& energies() const { return energies_; }
  const std::vector<GronwallBreakdown>& samples() const { return samples_; }

  /// Largest value of E(s) - E(0) - C int E - R(s) over the recorded samples;
  /// nonpositive means the closure inequality held everywhere.
  double max_violation() const {
    if (energies_.size() < 2)
      throw std::logic_error("GronwallAudit: need at least two samples");
    double worst = 0.0;
    double e_int = 0.0, rem_int = 0.0;
    const double e0 = energies_.front().total();
    const double b0 = std::abs(pairing_.front());
    for (size_t k = 1; k < energies_.size(); ++k) {
      const double dt = energies_[k].t - energies_[k - 1].t;
      e_int += 0.5 * dt * (energies_[k - 1].total() + energies_[k].total());
      const double ra = std::abs(samples_[k - 1].i3) + std::abs(samples_[k - 1].i5) +
                        std::abs(dt_pairing_[k - 1]);
      const double rb = std::abs(samples_[k].i3) + std::abs(samples_[k].i5) +
                        std::abs(dt_pairing_[k]);
      rem_int += 0.5 * dt * (ra + rb);
      const double r = rem_int + std::abs(pairing_[k]) + b0;
      worst = std::max(worst, energies_[k].total() - e0 - c_e_ * e_int - r);
    }
    return worst;
  }

 private:
  double momentum_corrector_pairing(const FlowState& s) const {
    // B(t) = integral rho_nu u_nu . Phi
    const Grid& g = *s.grid;
    double acc = 0.0;
    for (int j = 0; j < g.ny; ++j) {
      double row = 0.0;
      for (int i = 0; i < g.nx; ++i)
        row += detail::rho_at_u_face(s.rho, i, j) * s.vel.u_at(i, j) * corr_->field.u_at(i, j);
      acc += row * g.hx * g.hy[j];
    }
    for (int j = 1; j < g.ny; ++j) {
      double row = 0.0;
      for (int i = 0; i < g.nx; ++i)
        row += detail::rho_at_v_face(s.rho, i, j) * s.vel.v_at(i, j) * corr_->field.v_at(i, j);
      acc += row * g.hx * v_face_measure(g, j);
    }
    return acc;
  }

  double time_pairing(const FlowState& s) const {
    const Grid& g = *s.grid;
    const VectorField dphi =
        corrector_time_derivative(g, *sol_, s.t, corr_->nu);
    double acc = 0.0;
    for (int j = 0; j < g.ny; ++j) {
      double row = 0.0;
      for (int i = 0; i < g.nx; ++i)
        row += detail::rho_at_u_face(s.rho, i, j) * s.vel.u_at(i, j) * dphi.u_at(i, j);
      acc += row * g.hx * g.hy[j];
    }
    for (int j = 1; j < g.ny; ++j) {
      double row = 0.0;
      for (int i = 0; i < g.nx; ++i)
        row += detail::rho_at_v_face(s.rho, i, j) * s.vel.v_at(i, j) * dphi.v_at(i, j);
      acc += row * g.hx * v_face_measure(g, j);
    }
    return acc;
  }

  const EulerSolution* sol_;
  const CorrectorField* corr_;
  double hardy_constant_;
  double c_e_ = 0.0;
  std::vector<RelativeEnergySample> energies_;
  std::vector<GronwallBreakdown> samples_;
  std::vector<double> pairing_;
  std::vector<double> dt_pairing_;
};

}  // namespace vvlab
