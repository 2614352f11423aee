#include <cmath>

#include "ahcc/geometry.hpp"
#include "doctest.h"

using namespace ahcc;

namespace {

std::int64_t node_at(const Grid& g, double x, double y, double z) {
  for (std::int64_t p = 0; p < g.num_nodes(); ++p)
    if (std::abs(g.coord(p, 0) - x) < 1e-13 && std::abs(g.coord(p, 1) - y) < 1e-13 &&
        std::abs(g.coord(p, 2) - z) < 1e-13)
      return p;
  return -1;
}

bool in_core(const Grid& g, std::int64_t p, double r = 0.7) {
  return g.radius2(p) <= r * r + 1e-12;
}

// sphere conformal patch over the flat background: g = 4 delta / (1+|x|^2)^2
Field sphere_patch_hbar(const Grid& grid) {
  Field hbar(grid, Rank::sym2, Frame::rescaled);
  for (std::int64_t p = 0; p < grid.num_nodes(); ++p) {
    if (grid.is_exterior(p)) continue;
    const double r2 = grid.radius2(p);
    const double c = 4.0 / ((1 + r2) * (1 + r2));
    for (int i = 0; i < 3; ++i) hbar.sym_at(p, i, i) = c - 1.0;  // rho = 1 (flat)
  }
  return hbar;
}

}  // namespace

TEST_CASE("background curvature is exact") {
  Grid grid(3, 33, 0.9, 4);
  BackgroundGeometry bg(grid);
  Geometry geo(grid, bg, nullptr);
  double worstR = 0, worstRic = 0;
  Field w = geo.wdev_field();
  for (std::int64_t p : grid.interior_nodes()) {
    if (!in_core(grid, p)) continue;
    worstR = std::max(worstR, std::abs(geo.scalar_curv(p) + 6.0));
    worstRic = std::max(worstRic, frame_norm(w, bg, p));
  }
  CHECK(worstR <= 1e-12);
  CHECK(worstRic <= 1e-12);
}

TEST_CASE("flat metric has zero curvature") {
  Grid grid(3, 17, 0.9, 4);
  BackgroundGeometry bg(grid, BackgroundKind::flat);
  Field hbar(grid, Rank::sym2, Frame::rescaled);
  Geometry geo(grid, bg, &hbar);
  CHECK(geo.is_background());
  for (std::int64_t p : grid.interior_nodes()) {
    CHECK(geo.scalar_curv(p) == 0.0);
    CHECK(geo.ricci(p, 0, 0) == 0.0);
  }
}

TEST_CASE("round-sphere conformal patch: R = +6 at fourth order") {
  double err[2];
  int idx = 0;
  for (int N : {25, 49}) {
    Grid grid(3, N, 0.9, 4);
    BackgroundGeometry bg(grid, BackgroundKind::flat);
    Field hbar = sphere_patch_hbar(grid);
    Geometry geo(grid, bg, &hbar);
    double worst = 0;
    for (std::int64_t p : grid.interior_nodes()) {
      if (!in_core(grid, p)) continue;
      worst = std::max(worst, std::abs(geo.scalar_curv(p) - 6.0));
    }
    err[idx++] = worst;
  }
  CHECK(err[0] <= 3e-2);                       // measured 8.9e-3 at N=25
  CHECK(err[1] <= 2e-3);                       // measured 5.6e-4 at N=49
  CHECK(err[0] / err[1] >= std::pow(2.0, 3.5));
}

TEST_CASE("sphere patch Christoffel matches the conformal closed form") {
  // Gamma^1_11 = d_1 phi with phi = log(2/(1+r^2)): -2x/(1+r^2)
  Grid grid(3, 19, 0.9, 4);
  BackgroundGeometry bg(grid, BackgroundKind::flat);
  Field hbar = sphere_patch_hbar(grid);
  Geometry geo(grid, bg, &hbar);
  const std::int64_t p = node_at(grid, 0.5, 0, 0);
  REQUIRE(p >= 0);
  const double expect = -2.0 * 0.5 / 1.25;
  CHECK(geo.gamma(p, 0, 0, 0) == doctest::Approx(expect).epsilon(2e-4));
}

TEST_CASE("poincare background Christoffel is the closed form") {
  Grid grid(3, 19, 0.9, 4);
  BackgroundGeometry bg(grid);
  Geometry geo(grid, bg, nullptr);
  const std::int64_t p = node_at(grid, 0.5, 0, 0);
  REQUIRE(p >= 0);
  CHECK(geo.gamma(p, 0, 0, 0) == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
  const std::int64_t o = node_at(grid, 0, 0, 0);
  for (int k = 0; k < 3; ++k)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) CHECK(geo.gamma(o, k, i, j) == 0.0);
}

TEST_CASE("metric inverse satisfies g g^{-1} = id") {
  Grid grid(3, 17, 0.9, 4);
  BackgroundGeometry bg(grid);
  Field hbar(grid, Rank::sym2, Frame::rescaled);
  for (std::int64_t p = 0; p < grid.num_nodes(); ++p) {
    if (grid.is_exterior(p)) continue;
    const double x = grid.coord(p, 0);
    hbar.sym_at(p, 0, 0) = 0.1 * std::sin(x);
    hbar.sym_at(p, 0, 1) = 0.05 * x;
  }
  Geometry geo(grid, bg, &hbar);
  double worst = 0;
  for (std::int64_t p : grid.interior_nodes()) {
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double v = 0;
        for (int k = 0; k < 3; ++k) v += geo.g(p, i, k) * geo.ginv(p, k, j);
        worst = std::max(worst, std::abs(v - (i == j ? 1.0 : 0.0)));
      }
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("non-SPD metric aborts with the offending node") {
  Grid grid(3, 9, 0.9, 2);
  BackgroundGeometry bg(grid);
  Field hbar(grid, Rank::sym2, Frame::rescaled);
  std::int64_t victim = grid.interior_nodes()[3];
  hbar.sym_at(victim, 0, 0) = -2.0;  // h = -2/rho^2 overwhelms g0 = 1/rho^2
  CHECK_THROWS_AS(Geometry(grid, bg, &hbar), NonSpdError);
  try {
    Geometry geo(grid, bg, &hbar);
  } catch (const NonSpdError& e) {
    CHECK(e.node == victim);
  }
}

TEST_CASE("metric compatibility of the realized connection is exact") {
  // (nabla_g g)_kij = (nabla0 h)_kij - dG^l_{ki} g_lj - dG^l_{kj} g_li
  // vanishes identically by the telescoping of dGamma
  Grid grid(3, 17, 0.9, 4);
  BackgroundGeometry bg(grid);
  Field hbar(grid, Rank::sym2, Frame::rescaled);
  for (std::int64_t p = 0; p < grid.num_nodes(); ++p) {
    if (grid.is_exterior(p)) continue;
    const double x = grid.coord(p, 0), y = grid.coord(p, 1);
    hbar.sym_at(p, 0, 0) = 0.05 * std::cos(x + y);
    hbar.sym_at(p, 1, 2) = 0.03 * x * y;
  }
  Geometry geo(grid, bg, &hbar);
  double worst = 0;
  for (std::int64_t p : grid.interior_nodes()) {
    for (int k = 0; k < 3; ++k)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          double v = geo.nabla0_h(p, k, i, j);
          for (int l = 0; l < 3; ++l)
            v -= geo.dgamma(p, l, k, i) * geo.g(p, l, j) +
                 geo.dgamma(p, l, k, j) * geo.g(p, l, i);
          worst = std::max(worst, std::abs(v));
        }
  }
  CHECK(worst <= 1e-11);
}

TEST_CASE("Riemann data symmetries at discretization level") {
  Grid grid(3, 25, 0.9, 4);
  BackgroundGeometry bg(grid, BackgroundKind::flat);
  Field hbar = sphere_patch_hbar(grid);
  Geometry geo(grid, bg, &hbar);
  geo.ensure_riem_data();
  // pattern R_{ikjl}: antisymmetry in (i,k) and (j,l), pair symmetry, and the
  // first Bianchi identity over the last three slots
  double anti = 0, pair = 0, bianchi1 = 0, scale = 0;
  for (std::int64_t p : grid.interior_nodes()) {
    if (!in_core(grid, p, 0.5)) continue;
    for (int i = 0; i < 3; ++i)
      for (int k = 0; k < 3; ++k)
        for (int j = 0; j < 3; ++j)
          for (int l = 0; l < 3; ++l) {
            const double r = geo.riem_low(p, i, k, j, l);
            scale = std::max(scale, std::abs(r));
            anti = std::max(anti, std::abs(r + geo.riem_low(p, k, i, j, l)));
            anti = std::max(anti, std::abs(r + geo.riem_low(p, i, k, l, j)));
            pair = std::max(pair, std::abs(r - geo.riem_low(p, j, l, i, k)));
            bianchi1 = std::max(
                bianchi1, std::abs(r + geo.riem_low(p, i, j, l, k) +
                                   geo.riem_low(p, i, l, k, j)));
          }
  }
  REQUIRE(scale > 0.1);
  CHECK(anti <= 1e-3 * scale);
  CHECK(pair <= 1e-3 * scale);
  CHECK(bianchi1 <= 1e-3 * scale);
}

TEST_CASE("ricci is symmetric by construction") {
  Grid grid(3, 17, 0.9, 4);
  BackgroundGeometry bg(grid);
  Field hbar(grid, Rank::sym2, Frame::rescaled);
  for (std::int64_t p = 0; p < grid.num_nodes(); ++p) {
    if (grid.is_exterior(p)) continue;
    hbar.sym_at(p, 0, 1) = 0.02 * grid.coord(p, 2);
  }
  Geometry geo(grid, bg, &hbar);
  for (std::int64_t p : grid.interior_nodes())
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        CHECK(geo.ricci(p, i, j) == geo.ricci(p, j, i));
}
