#include <cmath>

#include "ahcc/operators.hpp"
#include "ahcc/verification.hpp"
#include "doctest.h"

using namespace ahcc;

namespace {

struct FlatCtx {
  Grid grid;
  BackgroundGeometry bg;
  Geometry geo;
  OperatorContext ctx;
  FlatCtx(int N = 17)
      : grid(3, N, 0.9, 4), bg(grid, BackgroundKind::flat), geo(grid, bg, nullptr),
        ctx(geo) {}
};

struct BallCtx {
  Grid grid;
  BackgroundGeometry bg;
  Geometry geo;
  OperatorContext ctx;
  BallCtx(int N = 17)
      : grid(3, N, 0.9, 4), bg(grid), geo(grid, bg, nullptr), ctx(geo) {}
};

double max_abs_interior(const Grid& g, const Field& f) {
  double worst = 0;
  for (std::int64_t p : g.interior_nodes())
    for (int c = 0; c < f.ncomp(); ++c)
      worst = std::max(worst, std::abs(f.at(p, c)));
  return worst;
}

std::int64_t origin_node(const Grid& g) {
  for (std::int64_t p = 0; p < g.num_nodes(); ++p)
    if (g.radius2(p) == 0.0) return p;
  return -1;
}

}  // namespace

TEST_CASE("flat laplacian on polynomials") {
  FlatCtx f;
  Field s(f.grid, Rank::scalar, Frame::physical);
  for (std::int64_t p = 0; p < f.grid.num_nodes(); ++p)
    if (!f.grid.is_exterior(p)) s.at(p, 0) = f.grid.coord(p, 0) * f.grid.coord(p, 0);
  Field ls = laplacian(f.ctx, s);
  for (std::int64_t p : f.grid.interior_nodes())
    CHECK(ls.at(p, 0) == doctest::Approx(-2.0).epsilon(1e-10));

  Field u(f.grid, Rank::sym2, Frame::physical);
  for (std::int64_t p = 0; p < f.grid.num_nodes(); ++p)
    if (!f.grid.is_exterior(p))
      u.sym_at(p, 0, 0) = f.grid.coord(p, 0) * f.grid.coord(p, 0);
  Field lu = laplacian(f.ctx, u);
  for (std::int64_t p : f.grid.interior_nodes()) {
    CHECK(lu.sym_at(p, 0, 0) == doctest::Approx(-2.0).epsilon(1e-10));
    CHECK(std::abs(lu.sym_at(p, 1, 1)) < 1e-10);
  }

  Field c(f.grid, Rank::scalar, Frame::physical);
  for (std::int64_t p = 0; p < f.grid.num_nodes(); ++p)
    if (!f.grid.is_exterior(p)) c.at(p, 0) = 3.5;
  Field lc = laplacian(f.ctx, c);
  CHECK(max_abs_interior(f.grid, lc) < 1e-12);
}

TEST_CASE("flat first-order operators on polynomials") {
  FlatCtx f;
  // u = x1^2 dx1 (x) dx1 -> div u = -2 x1 dx1
  Field u(f.grid, Rank::sym2, Frame::physical);
  for (std::int64_t p = 0; p < f.grid.num_nodes(); ++p)
    if (!f.grid.is_exterior(p))
      u.sym_at(p, 0, 0) = f.grid.coord(p, 0) * f.grid.coord(p, 0);
  Field dv = divergence_sym2(f.ctx, u);
  for (std::int64_t p : f.grid.interior_nodes()) {
    CHECK(dv.at(p, 0) == doctest::Approx(-2.0 * f.grid.coord(p, 0)).epsilon(1e-10));
    CHECK(std::abs(dv.at(p, 1)) < 1e-11);
  }

  // w = x1 dx1: d*w = -1, L w = dx1 (x) dx1, Lring adds (1/3)(d*w) delta
  Field w(f.grid, Rank::one_form, Frame::physical);
  for (std::int64_t p = 0; p < f.grid.num_nodes(); ++p)
    if (!f.grid.is_exterior(p)) w.at(p, 0) = f.grid.coord(p, 0);
  Field ds = codifferential(f.ctx, w);
  Field L = killing_sym(f.ctx, w);
  Field Lr = conformal_killing(f.ctx, w);
  for (std::int64_t p : f.grid.interior_nodes()) {
    CHECK(ds.at(p, 0) == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(L.sym_at(p, 0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(L.sym_at(p, 0, 1)) < 1e-12);
    CHECK(Lr.sym_at(p, 0, 0) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(Lr.sym_at(p, 1, 1) == doctest::Approx(-1.0 / 3.0).epsilon(1e-12));
    CHECK(Lr.sym_at(p, 2, 2) == doctest::Approx(-1.0 / 3.0).epsilon(1e-12));
  }

  // h = x1 delta: B(h) = (n/2 - 1) dx1 = 1/2 dx1
  Field hf(f.grid, Rank::sym2, Frame::physical);
  for (std::int64_t p = 0; p < f.grid.num_nodes(); ++p)
    if (!f.grid.is_exterior(p))
      for (int i = 0; i < 3; ++i) hf.sym_at(p, i, i) = f.grid.coord(p, 0);
  Field B = gauge_B(f.ctx, hf);
  for (std::int64_t p : f.grid.interior_nodes()) {
    CHECK(B.at(p, 0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(std::abs(B.at(p, 1)) < 1e-12);
  }

  // constant one-form: nabla w = 0 exactly
  Field cw(f.grid, Rank::one_form, Frame::physical);
  for (std::int64_t p = 0; p < f.grid.num_nodes(); ++p)
    if (!f.grid.is_exterior(p)) cw.at(p, 1) = 2.0;
  auto nv = cov_deriv_oneform(f.ctx, cw);
  double worst = 0;
  for (std::int64_t p : f.grid.interior_nodes())
    for (int k = 0; k < 3; ++k)
      for (int i = 0; i < 3; ++i)
        worst = std::max(worst, std::abs(nv[(p * 3 + k) * 3 + i]));
  CHECK(worst < 1e-12);

  // w = x1 dx1 on flat: nabla w = dx1 (x) dx1
  auto nw = cov_deriv_oneform(f.ctx, w);
  for (std::int64_t p : f.grid.interior_nodes()) {
    CHECK(nw[(p * 3 + 0) * 3 + 0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(nw[(p * 3 + 1) * 3 + 1]) < 1e-12);
  }

  // vector laplacian on w = x1^2 dx1: -2 dx1
  Field w2(f.grid, Rank::one_form, Frame::physical);
  for (std::int64_t p = 0; p < f.grid.num_nodes(); ++p)
    if (!f.grid.is_exterior(p))
      w2.at(p, 0) = f.grid.coord(p, 0) * f.grid.coord(p, 0);
  Field vl = vector_laplacian(f.ctx, w2);
  for (std::int64_t p : f.grid.interior_nodes())
    CHECK(vl.at(p, 0) == doctest::Approx(-2.0).epsilon(1e-10));
}

TEST_CASE("codifferential of rho^2 dx1 vanishes at the origin") {
  BallCtx b;
  Field w(b.grid, Rank::one_form, Frame::physical);
  for (std::int64_t p = 0; p < b.grid.num_nodes(); ++p)
    if (!b.grid.is_exterior(p)) w.at(p, 0) = b.bg.rho(p) * b.bg.rho(p);
  Field ds = codifferential(b.ctx, w);
  CHECK(std::abs(ds.at(origin_node(b.grid), 0)) < 1e-12);
}

TEST_CASE("conformal killing is exactly trace-free") {
  BallCtx b;
  Field w = smooth_test_oneform(b.grid, b.bg, 3);
  Field Lr = conformal_killing(b.ctx, w);
  double worst = 0;
  for (std::int64_t p : b.grid.interior_nodes()) {
    double tr = 0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) tr += b.geo.ginv(p, i, j) * Lr.sym_at(p, i, j);
    worst = std::max(worst, std::abs(tr));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("gauge source vanishes on the background and matches -B(h)") {
  BallCtx b;
  Field om0 = gauge_source(b.ctx);
  CHECK(max_abs_interior(b.grid, om0) == 0.0);

  Field hbar = random_perturbation_hbar(b.grid, b.bg, 77, 0.05, 0.6);
  Geometry geo(b.grid, b.bg, &hbar);
  OperatorContext ctx(geo);
  Field om = gauge_source(ctx);
  Field h = geo.h_physical();
  Field bh = gauge_B(ctx, h);
  double worst = 0;
  for (std::int64_t p : b.grid.interior_nodes())
    for (int c = 0; c < 3; ++c)
      worst = std::max(worst, std::abs(om.at(p, c) + bh.at(p, c)));
  CHECK(worst <= 1e-14);
}

TEST_CASE("gauge identity: flat polynomial exact, hyperbolic at tolerance") {
  FlatCtx f;
  // polynomial one-form w_i = quadratic -> both sides exact
  Field w(f.grid, Rank::one_form, Frame::physical);
  for (std::int64_t p = 0; p < f.grid.num_nodes(); ++p) {
    if (f.grid.is_exterior(p)) continue;
    const double x = f.grid.coord(p, 0), y = f.grid.coord(p, 1);
    w.at(p, 0) = x * x + 0.5 * y;
    w.at(p, 1) = x * y;
    w.at(p, 2) = y * y;
  }
  CheckResult flat = check_gauge_identity(f.ctx, w, 1e-10);
  CHECK(flat.pass);

  BallCtx b(33);
  for (std::uint64_t seed : {1, 2, 3}) {
    Field wb = smooth_test_oneform(b.grid, b.bg, seed);
    CheckResult r = check_gauge_identity(b.ctx, wb, 1e-3);
    CHECK(r.pass);
    CHECK(r.value > 0);
  }
}

TEST_CASE("gauge identity refines at fourth order") {
  double err[2];
  int idx = 0;
  for (int N : {17, 33}) {
    Grid grid(3, N, 0.9, 4);
    BackgroundGeometry bg(grid);
    Geometry geo(grid, bg, nullptr);
    OperatorContext ctx(geo);
    Field w = smooth_test_oneform(grid, bg, 1);
    err[idx++] = check_gauge_identity(ctx, w, 1.0).value;
  }
  CHECK(err[0] / err[1] > std::pow(2.0, 3.5));
}

TEST_CASE("adjointness of div and the conformal killing operator") {
  BallCtx b(33);
  const double dV = std::pow(b.grid.spacing(), 3);
  for (std::uint64_t seed : {1, 2, 3}) {
    Field w(b.grid, Rank::one_form, Frame::physical);
    {
      Field base = smooth_test_oneform(b.grid, b.bg, 40 + seed);
      for (std::int64_t p = 0; p < b.grid.num_nodes(); ++p) {
        if (b.grid.is_exterior(p)) continue;
        const double r = std::sqrt(b.grid.radius2(p));
        const double bump =
            r < 0.78 ? std::pow(std::cos(0.5 * M_PI * r / 0.78), 6) : 0.0;
        for (int i = 0; i < 3; ++i) w.at(p, i) = bump * base.at(p, i);
      }
    }
    Field u = tracefree_bump_sym2(b.grid, b.bg, 50 + seed, 0.78);
    const double nw = std::sqrt(l2_inner(w, w, b.bg));
    const double nu = std::sqrt(l2_inner(u, u, b.bg));
    for (double& v : w.raw()) v /= nw;
    for (double& v : u.raw()) v /= nu;
    Field Lw = conformal_killing(b.ctx, w);
    Field du = divergence_sym2(b.ctx, u);
    const double ip1 = l2_inner(Lw, u, b.bg);
    const double ip2 = l2_inner(w, du, b.bg);
    CHECK(std::abs(ip1 - ip2) <= 5e-6);
  }
}

TEST_CASE("lichnerowicz degenerates to the rough laplacian on flat space") {
  FlatCtx f;
  Field u(f.grid, Rank::sym2, Frame::physical);
  for (std::int64_t p = 0; p < f.grid.num_nodes(); ++p) {
    if (f.grid.is_exterior(p)) continue;
    const double x = f.grid.coord(p, 0);
    u.sym_at(p, 0, 1) = x * x;
    u.sym_at(p, 2, 2) = std::sin(x);
  }
  Field lu = laplacian(f.ctx, u);
  Field llu = lichnerowicz(f.ctx, u);
  double worst = 0;
  for (std::int64_t p : f.grid.interior_nodes())
    for (int c = 0; c < 6; ++c)
      worst = std::max(worst, std::abs(lu.at(p, c) - llu.at(p, c)));
  CHECK(worst <= 1e-13);

  Field z(f.grid, Rank::sym2, Frame::physical);
  Field lz = lichnerowicz(f.ctx, z);
  CHECK(max_abs_interior(f.grid, lz) == 0.0);
}

TEST_CASE("lichnerowicz quadratic form is positive for compact trace-free fields") {
  BallCtx b(17);
  for (std::uint64_t seed : {1, 2, 3, 4}) {
    Field u = tracefree_bump_sym2(b.grid, b.bg, seed, 0.6);
    Field lu = lichnerowicz(b.ctx, u);
    for (std::int64_t p = 0; p < b.grid.num_nodes(); ++p) {
      if (b.grid.is_exterior(p)) continue;
      for (int c = 0; c < 6; ++c) lu.at(p, c) += 4.0 * u.at(p, c);
    }
    CHECK(l2_inner(lu, u, b.bg) > 0.0);
  }
}

TEST_CASE("rejects rescaled-flag inputs") {
  BallCtx b;
  Field wbar(b.grid, Rank::one_form, Frame::rescaled);
  CHECK_THROWS_AS(cov_deriv_oneform(b.ctx, wbar), std::invalid_argument);
  Field ubar(b.grid, Rank::sym2, Frame::rescaled);
  CHECK_THROWS_AS(cov_deriv_sym2(b.ctx, ubar), std::invalid_argument);
}

TEST_CASE("divergence of the metric is truncation-limited and refines") {
  // div_g g through raw components is limited by the FD truncation of the
  // g0 components; the connection's own compatibility is exact (geometry
  // tests). Check magnitude and fourth-order decay.
  double err[2];
  int idx = 0;
  for (int N : {17, 33}) {
    Grid grid(3, N, 0.9, 4);
    BackgroundGeometry bg(grid);
    Geometry geo(grid, bg, nullptr);
    OperatorContext ctx(geo);
    Field g0f = geo.metric_field();
    Field dv = divergence_sym2(ctx, g0f);
    double worst = 0;
    for (std::int64_t p : grid.interior_nodes()) {
      if (grid.radius2(p) > 0.25) continue;
      worst = std::max(worst, frame_norm(dv, bg, p));
    }
    err[idx++] = worst;
  }
  CHECK(err[0] <= 0.08);    // measured 2.6e-2 at N=17
  CHECK(err[1] <= 5e-3);    // measured 1.4e-3 at N=33
  CHECK(err[0] / err[1] >= std::pow(2.0, 3.5));
}
