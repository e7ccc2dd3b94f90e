#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "vvlab/corrector.hpp"
#include "vvlab/euler.hpp"
#include "vvlab/operators.hpp"

using namespace vvlab;

namespace {

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

TEST_CASE("the cutoff profile is smooth, normalized, and compactly supported") {
  const CutoffProfile eta = default_cutoff();

  CHECK(eta.value(0.0) == 1.0);
  CHECK(eta.value(1.0) == 0.0);
  CHECK(eta.value(2.5) == 0.0);
  CHECK(eta.derivative(0.0) == 0.0);
  CHECK(eta.derivative(1.0) == 0.0);

  // monotone decrease across the transition
  double prev = eta.value(0.0);
  for (int k = 1; k <= 40; ++k) {
    const double cur = eta.value(k / 40.0);
    CHECK(cur <= prev + 1e-15);
    prev = cur;
  }

  // finite differences agree with the stated derivatives away from the ends
  const double h = 1e-6;
  for (double s : {0.3, 0.5, 0.7}) {
    const double fd = (eta.value(s + h) - eta.value(s - h)) / (2.0 * h);
    CHECK(eta.derivative(s) == Catch::Approx(fd).margin(1e-6));
    const double fd2 = (eta.derivative(s + h) - eta.derivative(s - h)) / (2.0 * h);
    CHECK(eta.second_derivative(s) == Catch::Approx(fd2).margin(1e-5));
  }

  // no poles sneak through where 1 - s^2 underflows the exponential
  for (int k = 0; k <= 1200; ++k) {
    const double s = k / 1000.0;
    CHECK(std::isfinite(eta.value(s)));
    CHECK(std::isfinite(eta.derivative(s)));
    CHECK(std::isfinite(eta.second_derivative(s)));
  }

  CHECK_THROWS_AS(eta.value(-0.1), std::domain_error);
  CHECK_THROWS_AS(eta.derivative(-0.1), std::domain_error);
  CHECK_THROWS_AS(eta.second_derivative(-0.1), std::domain_error);
}

TEST_CASE("the corrector lives in its strip and repairs the wall trace") {
  const Grid g = build_grid({8, 128, 2.0, 1.0, 1.0});
  const EulerSolution sol = steady_cosine_shear(1.0, 1, 0.0);
  const double nu = 0.1;
  const CorrectorField c = build_corrector(g, sol, 0.0, nu);

  CHECK(c.nu == nu);

  // wall traces equal the catalog slip velocity exactly
  REQUIRE(c.field.wall_u_bottom.has_value());
  REQUIRE(c.field.wall_u_top.has_value());
  for (int i = 0; i < g.nx; ++i) {
    CHECK((*c.field.wall_u_bottom)[i] == Catch::Approx(1.0).margin(1e-14));
    CHECK((*c.field.wall_u_top)[i] == Catch::Approx(1.0).margin(1e-14));
  }

  // and the first interior row already sits close to that trace
  CHECK(std::abs(c.field.u_at(0, 0) - 1.0) <= 0.05);

  // support: a full cell past the strip the field is identically zero
  const double ly = g.domain.length_y;
  for (int j = 0; j < g.ny; ++j) {
    const double d = std::min(g.y_center[j], ly - g.y_center[j]);
    if (d <= nu + g.hy[j]) continue;
    for (int i = 0; i < g.nx; ++i) {
      CHECK(c.field.u_at(i, j) == 0.0);
      CHECK(c.field.v_at(i, j) == 0.0);
    }
  }

  // divergence free by construction
  CHECK(linf_norm(divergence(c.field)) <= 1e-12);
}

TEST_CASE("the rest state needs no repair and gets none") {
  const Grid g = build_grid({8, 64, 0.0, 1.0, 1.0});
  const CorrectorField c = build_corrector(g, rest_state(), 0.0, 0.1);
  CHECK(max_abs(c.field.u) == 0.0);
  CHECK(max_abs(c.field.v) == 0.0);
  CHECK(max_abs(*c.field.wall_u_bottom) == 0.0);
  CHECK(max_abs(*c.field.wall_u_top) == 0.0);
}

TEST_CASE("under-resolved strips and bad viscosities are rejected") {
  const Grid coarse = build_grid({8, 16, 0.0, 1.0, 1.0});
  const EulerSolution sol = steady_cosine_shear(1.0, 1, 0.0);

  CHECK_THROWS_AS(build_corrector(coarse, sol, 0.0, 0.2), std::invalid_argument);
  CHECK_THROWS_AS(build_corrector(coarse, sol, 0.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(build_corrector(coarse, sol, 0.0, -0.1), std::invalid_argument);

  // wide enough to resolve, but the two strips would meet mid-channel
  const Grid fine = build_grid({8, 64, 0.0, 1.0, 1.0});
  CHECK_THROWS_AS(build_corrector(fine, sol, 0.0, 0.5), std::invalid_argument);

  CHECK_THROWS_AS(verify_corrector_bounds(fine, sol, 0.0, {0.2, 0.1, 0.05}),
                  std::invalid_argument);
}

TEST_CASE("corrector norms scale with the strip width at the documented rates") {
  // the smallest strips cover only a handful of rows at ny = 512, which blunts
  // the sup-norm samples; 2048 rows keep every strip in the asymptotic regime
  const Grid g = build_grid({4, 2048, 0.0, 1.0, 1.0});
  const EulerSolution sol = steady_cosine_shear(1.0, 1, 0.0);
  const std::vector<double> nus = {0.2, 0.1, 0.05, 0.025};

  const CorrectorBoundCheck check = verify_corrector_bounds(g, sol, 0.0, nus);

  REQUIRE(check.norms.size() == 4);
  CHECK(check.sup_fit.slope == Catch::Approx(0.0).margin(0.1));
  CHECK(check.grad_sup_fit.slope == Catch::Approx(-1.0).margin(0.1));
  CHECK(check.l2_fit.slope == Catch::Approx(0.5).margin(0.1));
  CHECK(check.grad_l2_fit.slope == Catch::Approx(-0.5).margin(0.1));
  CHECK(check.dist2_fit.slope == Catch::Approx(1.0).margin(0.15));
  CHECK(check.dt_degenerate);

  // the wall trace itself is part of the sup norm, so it cannot dip under the
  // slip amplitude, and the cutoff cannot push it far above either
  for (const CorrectorNorms& n : check.norms) {
    CHECK(n.sup >= 1.0);
    CHECK(n.sup <= 2.0);
    CHECK(n.dt_l2 == 0.0);
  }

  // dist^2-weighted gradient over nu is the ratio the layer estimates lean
  // on; it should be stable across the ladder
  double lo = 1e300, hi = 0.0;
  for (const CorrectorNorms& n : check.norms) {
    lo = std::min(lo, n.dist2_grad_sup / n.nu);
    hi = std::max(hi, n.dist2_grad_sup / n.nu);
  }
  CHECK(hi / lo <= 1.6);
}

TEST_CASE("steady catalog entries have a vanishing corrector time derivative") {
  const Grid g = build_grid({8, 128, 2.0, 1.0, 1.0});
  const VectorField dt = corrector_time_derivative(g, steady_cosine_shear(1.0, 1, 0.2), 0.3, 0.1);
  CHECK(max_abs(dt.u) == 0.0);
  CHECK(max_abs(dt.v) == 0.0);
  REQUIRE(dt.wall_u_bottom.has_value());
  CHECK(max_abs(*dt.wall_u_bottom) == 0.0);
}
