#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "vvlab/geometry.hpp"

using namespace vvlab;

TEST_CASE("uniform grid has equal cells and pinned wall faces") {
  const Domain dom{2.0, 1.0};
  const Grid g = build_grid(dom, 16, 8, 0.0);

  REQUIRE(g.hx == Catch::Approx(0.125));
  REQUIRE(g.y_face.front() == 0.0);
  REQUIRE(g.y_face.back() == 1.0);
  for (int j = 0; j < g.ny; ++j) {
    CHECK(g.hy[j] == Catch::Approx(0.125));
    CHECK(g.y_center[j] == Catch::Approx((j + 0.5) / 8.0));
  }
  CHECK(g.cell_area(3) == Catch::Approx(0.125 * 0.125));
  CHECK(g.x_center(0) == Catch::Approx(0.0625));
}

TEST_CASE("stretched grid clusters symmetrically at both walls") {
  const Grid g = build_grid(Domain{1.0, 1.0}, 8, 64, 2.0);

  REQUIRE(g.y_face.front() == 0.0);
  REQUIRE(g.y_face.back() == 1.0);
  for (int j = 0; j < g.ny; ++j) REQUIRE(g.hy[j] > 0.0);
  // faces strictly increase
  for (int j = 0; j < g.ny; ++j) REQUIRE(g.y_face[j] < g.y_face[j + 1]);
  // mirror symmetry of the tanh map
  for (int j = 0; j <= g.ny; ++j)
    CHECK(g.y_face[j] == Catch::Approx(1.0 - g.y_face[g.ny - j]).margin(1e-14));
  // wall cells are smaller than the uniform spacing, the middle one larger
  CHECK(g.min_wall_spacing() < 1.0 / 64.0);
  CHECK(g.hy[32] > 1.0 / 64.0);

  double total = 0.0;
  for (double h : g.hy) total += h;
  CHECK(total == Catch::Approx(1.0).margin(1e-14));
}

TEST_CASE("grid construction rejects bad shapes") {
  CHECK_THROWS_AS(build_grid(Domain{1.0, 1.0}, 2, 8, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(build_grid(Domain{1.0, 1.0}, 8, 3, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(build_grid(Domain{1.0, 1.0}, 8, 8, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(build_grid(Domain{-1.0, 1.0}, 8, 8, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(build_grid(Domain{1.0, 0.0}, 8, 8, 0.0), std::invalid_argument);
}

TEST_CASE("wall distance uses only the wall-normal coordinate") {
  const Domain dom{3.0, 2.0};
  CHECK(distance_to_boundary(dom, 0.1, 0.5) == Catch::Approx(0.5));
  CHECK(distance_to_boundary(dom, 2.9, 1.7) == Catch::Approx(0.3));
  CHECK(distance_to_boundary(dom, 1.0, 1.0) == Catch::Approx(1.0));
  CHECK(distance_to_boundary(dom, 0.0, 0.0) == 0.0);
  CHECK_THROWS_AS(distance_to_boundary(dom, 0.0, -0.01), std::domain_error);
  CHECK_THROWS_AS(distance_to_boundary(dom, 0.0, 2.01), std::domain_error);
}

TEST_CASE("layer mask area is exact for any thickness") {
  const Grid g = build_grid(Domain{2.0, 1.0}, 8, 48, 1.5);

  SECTION("thin strips cover exactly 2 t L_x") {
    for (double t : {0.01, 0.037, 0.2, 0.4999}) {
      const LayerMask m = layer_mask(g, t);
      CHECK(m.weighted_area() == Catch::Approx(2.0 * t * 2.0).epsilon(1e-12));
    }
  }
  SECTION("strips thicker than half the channel saturate at the domain area") {
    const LayerMask m = layer_mask(g, 0.8);
    CHECK(m.weighted_area() == Catch::Approx(2.0 * 1.0).epsilon(1e-12));
    for (double w : m.row_weight) CHECK(w == 1.0);
  }
  SECTION("weights are fractions") {
    const LayerMask m = layer_mask(g, 0.1);
    for (double w : m.row_weight) {
      CHECK(w >= 0.0);
      CHECK(w <= 1.0);
    }
  }
}

TEST_CASE("layer mask grows monotonically with thickness") {
  const Grid g = build_grid(Domain{1.0, 1.0}, 8, 40, 2.0);
  const LayerMask thin = layer_mask(g, 0.02);
  const LayerMask thick = layer_mask(g, 0.08);
  for (int j = 0; j < g.ny; ++j) CHECK(thin.row_weight[j] <= thick.row_weight[j]);
  CHECK(thin.weighted_area() < thick.weighted_area());
  CHECK(layer_mask(g, 0.08).rows_inside_strip() >= layer_mask(g, 0.02).rows_inside_strip());
}

TEST_CASE("layer mask rejects nonpositive thickness") {
  const Grid g = build_grid(Domain{1.0, 1.0}, 8, 8, 0.0);
  CHECK_THROWS_AS(layer_mask(g, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(layer_mask(g, -0.1), std::invalid_argument);
}

TEST_CASE("strip row count on a uniform grid matches the arithmetic") {
  const Grid g = build_grid(Domain{1.0, 1.0}, 8, 100, 0.0);
  // centers at (j + 0.5)/100; strictly below 0.065 are j = 0..5
  const LayerMask m = layer_mask(g, 0.065);
  CHECK(m.rows_inside_strip() == 6);
}
