#pragma once

// Direct banded solvers and a preconditioned conjugate gradient driver for
// the linear systems the time stepper produces.  Everything here runs with a
// fixed sequential order so repeated solves are bit-identical.

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace vvlab {

/// Thomas algorithm for a tridiagonal system.  sub[0] and super[n-1] are
/// ignored.  Overwrites rhs with the solution.
inline void tridiagonal_solve(const std::vector<double>& sub, std::vector<double> diag,
                              const std::vector<double>& super, std::vector<double>& rhs) {
  const size_t n = rhs.size();
  for (size_t k = 1; k < n; ++k) {
    const double m = sub[k] / diag[k - 1];
    diag[k] -= m * super[k - 1];
    rhs[k] -= m * rhs[k - 1];
  }
  rhs[n - 1] /= diag[n - 1];
  for (size_t k = n - 1; k-- > 0;) rhs[k] = (rhs[k] - super[k] * rhs[k + 1]) / diag[k];
}

/// Periodic tridiagonal solve via the Sherman-Morrison correction.  corner_lo
/// couples row 0 to the last unknown, corner_hi the last row to the first.
inline void cyclic_tridiagonal_solve(const std::vector<double>& sub, std::vector<double> diag,
                                     const std::vector<double>& super, double corner_lo,
                                     double corner_hi, std::vector<double>& rhs) {
  const size_t n = rhs.size();
  if (n < 3) throw std::invalid_argument("cyclic_tridiagonal_solve: need at least 3 unknowns");
  const double gamma = -diag[0];
  diag[0] -= gamma;
  diag[n - 1] -= corner_lo * corner_hi / gamma;

  std::vector<double> z(n, 0.0);
  z[0] = gamma;
  z[n - 1] = corner_hi;

  std::vector<double> x = rhs;
  tridiagonal_solve(sub, diag, super, x);
  tridiagonal_solve(sub, diag, super, z);

  const double num = x[0] + corner_lo * x[n - 1] / gamma;
  const double den = 1.0 + z[0] + corner_lo * z[n - 1] / gamma;
  const double factor = num / den;
  for (size_t k = 0; k < n; ++k) rhs[k] = x[k] - factor * z[k];
}

struct PcgResult {
  int iterations = 0;
  double relative_residual = 0.0;
};

/// Conjugate gradients with diagonal (Jacobi) preconditioning in a weighted
/// inner product.  apply must be self-adjoint and nonnegative under dot.
/// Stops when the preconditioned residual norm falls below tol relative to
/// the right-hand side; rhs == 0 returns x == 0 immediately.
inline PcgResult pcg(const std::function<void(const std::vector<double>&, std::vector<double>&)>& apply,
                     const std::vector<double>& inv_diag,
                     const std::function<double(const std::vector<double>&, const std::vector<double>&)>& dot,
                     const std::vector<double>& rhs, std::vector<double>& x, double tol,
                     int max_iterations) {
  const size_t n = rhs.size();
  x.assign(n, 0.0);
  std::vector<double> r = rhs, z(n), p(n), ap(n);

  const double rhs_norm = std::sqrt(dot(rhs, rhs));
  if (rhs_norm == 0.0) return {0, 0.0};

  for (size_t k = 0; k < n; ++k) z[k] = inv_diag[k] * r[k];
  p = z;
  double rz = dot(r, z);

  PcgResult res;
  for (int it = 1; it <= max_iterations; ++it) {
    apply(p, ap);
    const double pap = dot(p, ap);
    if (!(pap > 0.0)) {
      // The operator has a constant nullspace; a vanishing curvature means
      // the residual is already in it and the iteration is done.
      res.iterations = it - 1;
      res.relative_residual = std::sqrt(dot(r, r)) / rhs_norm;
      return res;
    }
    const double alpha = rz / pap;
    for (size_t k = 0; k < n; ++k) {
      x[k] += alpha * p[k];
      r[k] -= alpha * ap[k];
    }
    const double rnorm = std::sqrt(dot(r, r));
    if (rnorm <= tol * rhs_norm) {
      res.iterations = it;
      res.relative_residual = rnorm / rhs_norm;
      return res;
    }
    for (size_t k = 0; k < n; ++k) z[k] = inv_diag[k] * r[k];
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (size_t k = 0; k < n; ++k) p[k] = z[k] + beta * p[k];
  }
  throw std::runtime_error("pcg: no convergence within " + std::to_string(max_iterations) +
                           " iterations (relative residual " +
                           std::to_string(std::sqrt(dot(r, r)) / rhs_norm) + ")");
}

}  // namespace vvlab
