#include <cmath>
#include <random>

#include "ahcc/solver.hpp"
#include "doctest.h"

using namespace ahcc;

namespace {
struct Fixture {
  Grid grid;
  BackgroundGeometry bg;
  Fixture(int N = 13) : grid(3, N, 0.9, 4), bg(grid) {}
};
}  // namespace

TEST_CASE("bicgstab solves a small synthetic system; zero rhs is free") {
  const int m = 50;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> uni(-0.5, 0.5);
  std::vector<double> A(m * m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) A[i * m + j] = (i == j ? 4.0 : 0.0) + 0.3 * uni(rng);
  auto apply = [&](const std::vector<double>& v) {
    std::vector<double> out(m, 0.0);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) out[i] += A[i * m + j] * v[j];
    return out;
  };
  std::vector<double> xs(m);
  for (int i = 0; i < m; ++i) xs[i] = uni(rng);
  std::vector<double> b = apply(xs), x;
  LinearSolveStats st = bicgstab(apply, b, x, nullptr, 1e-12, 500);
  CHECK(st.converged);
  double worst = 0;
  for (int i = 0; i < m; ++i) worst = std::max(worst, std::abs(x[i] - xs[i]));
  CHECK(worst <= 1e-9);

  std::vector<double> zero(m, 0.0), xz;
  LinearSolveStats sz = bicgstab(apply, zero, xz, nullptr, 1e-12, 500);
  CHECK(sz.converged);
  CHECK(sz.iterations == 0);
  for (double v : xz) CHECK(v == 0.0);
}

TEST_CASE("probed diagonals match basis applications of the formula blocks") {
  Fixture f;
  std::vector<double> diag = probe_block_diagonals(f.bg, 1.5);
  Geometry geo0(f.grid, f.bg, nullptr);
  OperatorContext ctx0(geo0);
  const std::int64_t nI = f.grid.num_interior();
  const std::int64_t nh = nI * 6;
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<std::int64_t> pick_h(0, nh - 1);
  std::uniform_int_distribution<std::int64_t> pick_xi(0, nI * 3 - 1);

  // hbar block: rows of (1/2 Delta_L + (n-1)) with the packing weights
  for (int trial = 0; trial < 6; ++trial) {
    const std::int64_t dof = pick_h(rng);
    const std::int64_t row = dof / 6;
    const int comp = static_cast<int>(dof % 6);
    const std::int64_t p = f.grid.interior_nodes()[row];
    Field dhbar(f.grid, Rank::sym2, Frame::rescaled);
    dhbar.at(p, comp) = 1.0;
    Field dh = to_physical(dhbar, f.bg);
    Field lich = lichnerowicz(ctx0, dh);
    const double phys = 0.5 * lich.at(p, comp) + 2.0 * dh.at(p, comp);
    const double expect = std::pow(f.bg.rho(p), -1.5) * phys *
                          std::pow(f.bg.rho(p), 2.0) /
                          1.0;  // row weight rho^{2-s}, column 1/rho^2
    CHECK(diag[dof] == doctest::Approx(expect).epsilon(1e-9));
  }
  // xibar block
  for (int trial = 0; trial < 6; ++trial) {
    const std::int64_t dofx = pick_xi(rng);
    const std::int64_t row = dofx / 3;
    const int comp = static_cast<int>(dofx % 3);
    const std::int64_t p = f.grid.interior_nodes()[row];
    Field dxibar(f.grid, Rank::one_form, Frame::rescaled);
    dxibar.at(p, comp) = 1.0;
    Field dxi = to_physical(dxibar, f.bg);
    Field dlk = div_conf_killing(ctx0, dxi);
    const double phys = dlk.at(p, comp);
    const double expect =
        std::pow(f.bg.rho(p), -1.5) * phys * f.bg.rho(p);  // rho^{1-s} * rho
    CHECK(diag[nh + dofx] == doctest::Approx(expect).epsilon(1e-9));
  }
}

TEST_CASE("manufactured solution recovery through the background solve") {
  Fixture f(13);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> uni(-1, 1);
  ConstraintState truth(f.grid);
  for (std::int64_t p : f.grid.interior_nodes()) {
    if (f.grid.radius2(p) > 0.36) continue;  // compactly supported
    for (int c = 0; c < 6; ++c) truth.hbar.at(p, c) = 0.01 * uni(rng);
    for (int c = 0; c < 3; ++c) truth.xibar.at(p, c) = 0.01 * uni(rng);
  }
  ResidualPair rhs = origin_jacobian_apply(f.bg, truth.hbar, truth.xibar);
  SolverConfig cfg;
  ConstraintState sol = linear_solve(f.bg, rhs, cfg);
  double num = 0, den = 0;
  for (std::int64_t p : f.grid.interior_nodes()) {
    const double w = std::pow(f.bg.rho(p), -1.5);
    for (int c = 0; c < 6; ++c) {
      num = std::max(num, w * std::abs(sol.hbar.at(p, c) - truth.hbar.at(p, c)));
      den = std::max(den, w * std::abs(truth.hbar.at(p, c)));
    }
    for (int c = 0; c < 3; ++c) {
      num = std::max(num, w * std::abs(sol.xibar.at(p, c) - truth.xibar.at(p, c)));
      den = std::max(den, w * std::abs(truth.xibar.at(p, c)));
    }
  }
  CHECK(num / den <= 1e-8);
}

TEST_CASE("ift: zero source converges immediately with the zero state") {
  Fixture f;
  SourceRecipe rec;
  rec.amplitude = 0.0;
  SourceTensor T = make_source(rec, f.grid, f.bg);
  SolverConfig cfg;
  auto [state, rep] = ift_iterate(T, f.bg, cfg);
  CHECK(rep.converged);
  CHECK(rep.residual_history.size() == 1);
  CHECK(rep.residual_history[0] == 0.0);
  for (double v : state.hbar.raw()) CHECK(v == 0.0);
  CHECK(rep.final_h_norm == 0.0);
}

TEST_CASE("ift converges for a small source and is deterministic") {
  Fixture f;
  SourceRecipe rec;
  rec.amplitude = 1e-3;
  rec.decay = 1.5;
  rec.seed = 7;
  SourceTensor T = make_source(rec, f.grid, f.bg);
  SolverConfig cfg;
  auto [s1, r1] = ift_iterate(T, f.bg, cfg);
  CHECK(r1.converged);
  CHECK(r1.residual_history.size() - 1 <= 8);
  CHECK(r1.residual_history.back() <= cfg.nonlinear_tol);
  CHECK(r1.final_h_norm <= 50 * rec.amplitude);

  auto [s2, r2] = ift_iterate(T, f.bg, cfg);
  CHECK(s1.hbar.raw() == s2.hbar.raw());
  CHECK(r1.residual_history == r2.residual_history);
}

TEST_CASE("newton agrees with ift and both residuals reach tolerance") {
  Fixture f;
  SourceRecipe rec;
  rec.amplitude = 1e-3;
  rec.decay = 1.5;
  rec.seed = 7;
  SourceTensor T = make_source(rec, f.grid, f.bg);
  SolverConfig cfg;
  auto [si, ri] = ift_iterate(T, f.bg, cfg);
  cfg.mode = SolverMode::newton_fd;
  auto [sn, rn] = newton_fd(T, f.bg, cfg);
  CHECK(ri.converged);
  CHECK(rn.converged);
  double gap = 0;
  for (std::int64_t p : f.grid.interior_nodes()) {
    const double w = std::pow(f.bg.rho(p), -1.5);
    for (int c = 0; c < 6; ++c)
      gap = std::max(gap, w * std::abs(si.hbar.at(p, c) - sn.hbar.at(p, c)));
    for (int c = 0; c < 3; ++c)
      gap = std::max(gap, w * std::abs(si.xibar.at(p, c) - sn.xibar.at(p, c)));
  }
  CHECK(gap <= 1e-9);
}

TEST_CASE("large source raises a divergence error rather than crashing") {
  Fixture f;
  SourceRecipe rec;
  rec.amplitude = 10.0;
  rec.decay = 1.5;
  rec.seed = 7;
  SourceTensor T = make_source(rec, f.grid, f.bg);
  SolverConfig cfg;
  cfg.nonlinear_max_iter = 12;
  CHECK_THROWS_AS(ift_iterate(T, f.bg, cfg), SolverDivergence);
}

TEST_CASE("continuation with one step equals the direct solve") {
  Fixture f;
  SourceRecipe rec;
  rec.amplitude = 1e-3;
  rec.decay = 1.5;
  rec.seed = 7;
  SourceTensor T = make_source(rec, f.grid, f.bg);
  SolverConfig cfg;
  auto [sd, rd] = ift_iterate(T, f.bg, cfg);
  auto [sc, rc] = continuation(T, 1, f.bg, cfg);
  CHECK(rc.converged);
  CHECK(sc.hbar.raw() == sd.hbar.raw());

  auto [s3, r3] = continuation(T, 3, f.bg, cfg);
  CHECK(r3.converged);
  double gap = 0;
  for (size_t i = 0; i < sc.hbar.raw().size(); ++i)
    gap = std::max(gap, std::abs(s3.hbar.raw()[i] - sc.hbar.raw()[i]));
  CHECK(gap <= 1e-9);
}

TEST_CASE("solver config validation") {
  SolverConfig cfg;
  cfg.linear_tol = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = SolverConfig{};
  cfg.continuation_steps = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
