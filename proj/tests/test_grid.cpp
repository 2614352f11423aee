#include <cmath>

#include "ahcc/grid.hpp"
#include "doctest.h"

using namespace ahcc;

TEST_CASE("grid rejects bad parameters") {
  CHECK_THROWS_AS(Grid(3, 8, 0.9, 2), std::invalid_argument);   // even N
  CHECK_THROWS_AS(Grid(3, 7, 0.9, 2), std::invalid_argument);   // too small
  CHECK_THROWS_AS(Grid(3, 9, 1.1, 2), std::invalid_argument);   // r_max
  CHECK_THROWS_AS(Grid(3, 9, 0.9, 3), std::invalid_argument);   // order
}

TEST_CASE("origin is an interior node for odd N") {
  Grid grid(3, 9, 0.9, 2);
  const std::int64_t P = grid.num_nodes();
  std::int64_t origin = -1;
  for (std::int64_t p = 0; p < P; ++p)
    if (grid.radius2(p) == 0.0) origin = p;
  REQUIRE(origin >= 0);
  CHECK(grid.is_interior(origin));
  CHECK(grid.coord(origin, 0) == 0.0);
}

TEST_CASE("mask matches brute-force enumeration (n=3, N=33, order 4)") {
  Grid grid(3, 33, 0.9, 4);
  // independent enumeration: interior iff |x| < r_max and every centered
  // stencil neighbor stays inside |x| <= r_max and in the cube
  const int N = 33, R = 2;
  const double h = 2.0 * 0.9 / (N - 1);
  auto coord = [&](int i) { return i == (N - 1) / 2 ? 0.0 : -0.9 + i * h; };
  std::int64_t expect = 0;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      for (int k = 0; k < N; ++k) {
        const double x = coord(i), y = coord(j), z = coord(k);
        const double r2 = x * x + y * y + z * z;
        if (r2 >= 0.81 - 1e-12) continue;
        bool ok = true;
        const int idx[3] = {i, j, k};
        const double c[3] = {x, y, z};
        for (int a = 0; a < 3 && ok; ++a)
          for (int o = -R; o <= R && ok; ++o) {
            if (o == 0) continue;
            if (idx[a] + o < 0 || idx[a] + o >= N) { ok = false; break; }
            const double xb = coord(idx[a] + o);
            if (r2 - c[a] * c[a] + xb * xb > 0.81 + 1e-12) ok = false;
          }
        if (ok) ++expect;
      }
  CHECK(grid.num_interior() == expect);
  CHECK(grid.num_interior() > 0);
  CHECK(grid.num_collar() > 0);
}

TEST_CASE("mask is symmetric under x -> -x") {
  Grid grid(3, 17, 0.9, 4);
  const std::int64_t P = grid.num_nodes();
  for (std::int64_t p = 0; p < P; ++p) {
    // mirrored flat index
    std::int64_t q = 0;
    for (int a = 0; a < 3; ++a) {
      const int ia = grid.multi_index(p, a);
      q = q * 17 + (16 - ia);
    }
    CHECK(grid.node_class(p) == grid.node_class(q));
  }
}

TEST_CASE("fd_partial exact on linear and quadratic monomials") {
  Grid grid(3, 17, 0.9, 4);
  const std::int64_t P = grid.num_nodes();
  std::vector<double> f1(P), f2(P);
  for (std::int64_t p = 0; p < P; ++p) {
    f1[p] = grid.coord(p, 0);
    f2[p] = grid.coord(p, 0) * grid.coord(p, 0);
  }
  std::int64_t origin = -1;
  for (std::int64_t p = 0; p < P; ++p)
    if (grid.radius2(p) == 0.0) origin = p;
  for (std::int64_t p : grid.interior_nodes()) {
    CHECK(grid.fd_partial(f1.data(), 1, p, 0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(grid.fd_partial(f1.data(), 1, p, 1, 0) == doctest::Approx(0.0).epsilon(1e-12));
  }
  CHECK(std::abs(grid.fd_partial(f2.data(), 1, origin, 0, 0)) < 1e-14);
}

TEST_CASE("fd_partial converges at the stencil order on sin") {
  // halving h reduces the error by about 2^order
  for (int order : {2, 4}) {
    double err[2];
    int idx = 0;
    for (int N : {17, 33}) {
      Grid grid(3, N, 0.9, order);
      const std::int64_t P = grid.num_nodes();
      std::vector<double> f(P);
      for (std::int64_t p = 0; p < P; ++p) f[p] = std::sin(grid.coord(p, 0));
      std::int64_t origin = -1;
      for (std::int64_t p = 0; p < P; ++p)
        if (grid.radius2(p) == 0.0) origin = p;
      err[idx++] = std::abs(grid.fd_partial(f.data(), 1, origin, 0, 0) - 1.0);
    }
    const double ratio = err[0] / err[1];
    const double ideal = std::pow(2.0, order);
    CHECK(ratio > 0.7 * ideal);
    CHECK(ratio < 1.3 * ideal);
  }
}

TEST_CASE("background closed forms") {
  Grid grid(3, 17, 0.9, 4);
  BackgroundGeometry bg(grid);
  std::int64_t origin = -1;
  for (std::int64_t p = 0; p < grid.num_nodes(); ++p)
    if (grid.radius2(p) == 0.0) origin = p;
  CHECK(bg.rho(origin) == doctest::Approx(0.5));
  CHECK(bg.g0(origin, 0, 0) == doctest::Approx(4.0));
  CHECK(bg.g0(origin, 0, 1) == 0.0);
  // gbar = rho^2 g0 = delta at every node
  for (std::int64_t p : grid.interior_nodes()) {
    const double r = bg.rho(p);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        const double gbar = r * r * bg.g0(p, i, j);
        CHECK(std::abs(gbar - (i == j ? 1.0 : 0.0)) < 1e-14);
      }
  }
  // Gamma0 at a node on the x-axis: conformal closed form 2x/(1-r^2)
  // (checked on a grid whose nodes include x = 0.5: N = 19, h = 0.1)
  Grid g19(3, 19, 0.9, 4);
  BackgroundGeometry bg19(g19);
  std::int64_t px = -1;
  for (std::int64_t p = 0; p < g19.num_nodes(); ++p)
    if (std::abs(g19.coord(p, 0) - 0.5) < 1e-14 && std::abs(g19.coord(p, 1)) < 1e-14 &&
        std::abs(g19.coord(p, 2)) < 1e-14)
      px = p;
  REQUIRE(px >= 0);
  CHECK(bg19.gamma0(px, 0, 0, 0) == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
  // Einstein identity of the closed-form background
  CHECK(bg19.ric0(px, 0, 0) == doctest::Approx(-2.0 * bg19.g0(px, 0, 0)));
  CHECK(bg19.scalar0() == doctest::Approx(-6.0));
}
