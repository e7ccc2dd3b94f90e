#pragma once

// Log-log power-law fitting shared by the corrector checks, the diagnostics,
// and the sweep verdicts.

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace vvlab {

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;     ///< log of the prefactor
  double max_residual = 0.0;  ///< largest |log value - log fit|

  double prefactor() const { return std::exp(intercept); }
};

/// Least-squares fit of log(values) against log(scales): values ~ C * scale^slope.
/// Both lists must be positive; a value <= 0 aborts with the scale it sits at,
/// since a degenerate series cannot carry a rate.
inline RateFit fit_rate(const std::vector<double>& values, const std::vector<double>& scales) {
  if (values.size() != scales.size())
    throw std::invalid_argument("fit_rate: values and scales differ in length");
  if (values.size() < 3) throw std::invalid_argument("fit_rate: need at least three points");

  const size_t n = values.size();
  std::vector<double> lx(n), lv(n);
  for (size_t k = 0; k < n; ++k) {
    if (!(scales[k] > 0.0))
      throw std::invalid_argument("fit_rate: non-positive scale " + std::to_string(scales[k]));
    if (!(values[k] > 0.0))
      throw std::invalid_argument("fit_rate: non-positive value at scale " +
                                  std::to_string(scales[k]));
    lx[k] = std::log(scales[k]);
    lv[k] = std::log(values[k]);
  }

  double sx = 0.0, sv = 0.0;
  for (size_t k = 0; k < n; ++k) {
    sx += lx[k];
    sv += lv[k];
  }
  const double mx = sx / n, mv = sv / n;
  double sxx = 0.0, sxv = 0.0;
  for (size_t k = 0; k < n; ++k) {
    sxx += (lx[k] - mx) * (lx[k] - mx);
    sxv += (lx[k] - mx) * (lv[k] - mv);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_rate: all scales coincide");

  RateFit fit;
  fit.slope = sxv / sxx;
  fit.intercept = mv - fit.slope * mx;
  for (size_t k = 0; k < n; ++k)
    fit.max_residual = std::max(fit.max_residual, std::abs(lv[k] - (fit.intercept + fit.slope * lx[k])));
  return fit;
}

}  // namespace vvlab
