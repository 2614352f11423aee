#include "ahcc/solver.hpp"

#include <chrono>
#include <cmath>

namespace ahcc {

namespace {

constexpr int D = kMaxDim;

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}
double nrm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

}  // namespace

void SolverConfig::validate() const {
  if (!(linear_tol > 0) || !(nonlinear_tol > 0))
    throw std::invalid_argument("solver config: tolerances must be positive");
  if (linear_max_iter <= 0 || nonlinear_max_iter <= 0)
    throw std::invalid_argument("solver config: iteration limits must be positive");
  if (continuation_steps < 1)
    throw std::invalid_argument("solver config: continuation steps must be >= 1");
  if (!(jacobian_step > 0))
    throw std::invalid_argument("solver config: jacobian step must be positive");
}

LinearSolveStats bicgstab(const std::function<std::vector<double>(const std::vector<double>&)>& apply,
                          const std::vector<double>& b, std::vector<double>& x,
                          const std::vector<double>* jacobi_diag, double tol,
                          int max_iter) {
  const size_t N = b.size();
  LinearSolveStats st;
  x.assign(N, 0.0);
  const double bn = nrm2(b);
  if (bn == 0.0) {
    st.converged = true;
    return st;
  }
  auto precond = [&](const std::vector<double>& v) {
    std::vector<double> out(v);
    if (jacobi_diag)
      for (size_t i = 0; i < N; ++i) out[i] /= (*jacobi_diag)[i];
    return out;
  };

  std::vector<double> r(b), rhat(b), p(N, 0.0), v(N, 0.0);
  double rho = 1, alpha = 1, omega = 1;
  double rn = bn;
  for (int it = 0; it < max_iter; ++it) {
    const double rho1 = dot(rhat, r);
    if (std::abs(rho1) < 1e-300) break;
    const double beta = (rho1 / rho) * (alpha / omega);
    for (size_t i = 0; i < N; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
    std::vector<double> phat = precond(p);
    v = apply(phat);
    const double rv = dot(rhat, v);
    if (std::abs(rv) < 1e-300) break;
    alpha = rho1 / rv;
    std::vector<double> s(N);
    for (size_t i = 0; i < N; ++i) s[i] = r[i] - alpha * v[i];
    double sn = nrm2(s);
    if (sn / bn <= tol) {
      for (size_t i = 0; i < N; ++i) x[i] += alpha * phat[i];
      st.iterations = it + 1;
      st.relative_residual = sn / bn;
      st.converged = true;
      return st;
    }
    std::vector<double> shat = precond(s);
    std::vector<double> t = apply(shat);
    const double tt = dot(t, t);
    if (tt < 1e-300) break;
    omega = dot(t, s) / tt;
    for (size_t i = 0; i < N; ++i) x[i] += alpha * phat[i] + omega * shat[i];
    for (size_t i = 0; i < N; ++i) r[i] = s[i] - omega * t[i];
    rn = nrm2(r);
    st.iterations = it + 1;
    st.relative_residual = rn / bn;
    if (!std::isfinite(rn)) break;
    if (rn / bn <= tol) {
      st.converged = true;
      return st;
    }
    if (std::abs(omega) < 1e-300) break;
    rho = rho1;
  }
  st.relative_residual = rn / bn;
  return st;
}

namespace {

// weight multiplying f(p) inside D_k evaluated at q (zero if p not in window)
double stencil_weight_of(const Grid& grid, std::int64_t q, int k, std::int64_t p) {
  const std::int64_t* idx = grid.stencil_nodes(q, k);
  const double* w = grid.stencil_weights(q, k);
  for (int m = 0; m < grid.stencil_size(); ++m)
    if (idx[m] == p) return w[m];
  return 0.0;
}

}  // namespace

std::vector<double> probe_block_diagonals(const BackgroundGeometry& bg, double s) {
  const Grid& grid = bg.grid();
  const int n = grid.n();
  const int S = sym_count(n);
  const int K = grid.stencil_size();
  std::vector<double> diag(dof_count(grid), 1.0);

  Geometry geo0(grid, bg, nullptr);

  std::int64_t off_h = 0;
  std::int64_t off_xi = grid.num_interior() * static_cast<std::int64_t>(S);
  std::int64_t row = 0;
  for (std::int64_t p : grid.interior_nodes()) {
    double G[D][D][D], dG[D][D][D][D], gi[D][D];
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          G[k][i][j] = bg.gamma0(p, k, i, j);
          for (int c = 0; c < n; ++c) dG[c][k][i][j] = bg.dgamma0(p, c, k, i, j);
        }
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) gi[i][j] = bg.g0_inv(p, i, j);

    // center weights: coefficient of f(p) in D_k f(p) and in D_c D_k f(p)
    double w0[D], ww[D][D];
    for (int k = 0; k < n; ++k) w0[k] = stencil_weight_of(grid, p, k, p);
    for (int c = 0; c < n; ++c) {
      const std::int64_t* idx = grid.stencil_nodes(p, c);
      const double* wt = grid.stencil_weights(p, c);
      for (int k = 0; k < n; ++k) {
        double acc = 0;
        for (int m = 0; m < K; ++m) acc += wt[m] * stencil_weight_of(grid, idx[m], k, p);
        ww[c][k] = acc;
      }
    }

    // --- hbar block: diag of 1/2 Delta_L + (n-1), columns scaled 1/rho^2,
    //     rows scaled rho^{2-s}
    for (int i0 = 0; i0 < n; ++i0)
      for (int j0 = i0; j0 < n; ++j0) {
        // operand u = basis at (p,(i0,j0)) symmetric
        double U[D][D] = {};
        U[i0][j0] = 1.0;
        U[j0][i0] = 1.0;
        double DT[D][D][D], NT[D][D][D];
        for (int k = 0; k < n; ++k)
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
              DT[k][i][j] = w0[k] * U[i][j];
              double v = DT[k][i][j];
              for (int m = 0; m < n; ++m)
                v -= G[m][k][i] * U[m][j] + G[m][k][j] * U[i][m];
              NT[k][i][j] = v;
            }
        // Delta u component (i0,j0)
        double acc = 0;
        for (int c = 0; c < n; ++c)
          for (int k = 0; k < n; ++k) {
            double v = ww[c][k] * U[i0][j0];
            for (int m = 0; m < n; ++m) {
              v -= dG[c][m][k][i0] * U[m][j0] + G[m][k][i0] * DT[c][m][j0];
              v -= dG[c][m][k][j0] * U[i0][m] + G[m][k][j0] * DT[c][i0][m];
              v -= G[m][c][k] * NT[m][i0][j0];
              v -= G[m][c][i0] * NT[k][m][j0];
              v -= G[m][c][j0] * NT[k][i0][m];
            }
            acc += gi[c][k] * v;
          }
        double lap = -acc;
        // curvature action diagonal: 2(Ric u - Riem u) at (i0,j0)
        double uud[D][D];
        for (int k = 0; k < n; ++k)
          for (int j = 0; j < n; ++j) {
            double v = 0;
            for (int l = 0; l < n; ++l) v += gi[k][l] * U[l][j];
            uud[k][j] = v;
          }
        double ric = 0;
        for (int k = 0; k < n; ++k)
          ric += bg.ric0(p, i0, k) * uud[k][j0] + bg.ric0(p, j0, k) * uud[k][i0];
        ric *= 0.5;
        double uu[D][D];
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) {
            double v = 0;
            for (int j = 0; j < n; ++j) v += gi[l][j] * uud[k][j];
            uu[k][l] = v;
          }
        double riem = 0;
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) riem += bg.riem0_low(p, i0, k, j0, l) * uu[k][l];
        const double dphys = 0.5 * (lap + 2.0 * (ric - riem)) + (n - 1);
        diag[off_h + row * S + sym_index(n, i0, j0)] =
            std::pow(bg.rho(p), -s) * dphys;
      }
    ++row;
  }

  // --- xibar block: diag of div(Lring .) probed the same way
  row = 0;
  for (std::int64_t p : grid.interior_nodes()) {
    double G[D][D][D], dG[D][D][D][D], gi[D][D];
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          G[k][i][j] = bg.gamma0(p, k, i, j);
          for (int c = 0; c < n; ++c) dG[c][k][i][j] = bg.dgamma0(p, c, k, i, j);
        }
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) gi[i][j] = bg.g0_inv(p, i, j);
    double w0[D], ww[D][D];
    for (int k = 0; k < n; ++k) w0[k] = stencil_weight_of(grid, p, k, p);
    const std::int64_t* pidx[D];
    const double* pwt[D];
    for (int c = 0; c < n; ++c) {
      pidx[c] = grid.stencil_nodes(p, c);
      pwt[c] = grid.stencil_weights(p, c);
      for (int k = 0; k < n; ++k) {
        double acc = 0;
        for (int m = 0; m < K; ++m) acc += pwt[c][m] * stencil_weight_of(grid, pidx[c][m], k, p);
        ww[c][k] = acc;
      }
    }
    for (int i0 = 0; i0 < n; ++i0) {
      double W[D] = {};
      W[i0] = 1.0;
      double DT[D][D], NT[D][D];
      for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i) {
          DT[k][i] = w0[k] * W[i];
          double v = DT[k][i];
          for (int m = 0; m < n; ++m) v -= G[m][k][i] * W[m];
          NT[k][i] = v;
        }
      // n2w[c][k][i] for the basis one-form
      double n2w[D][D][D];
      for (int c = 0; c < n; ++c)
        for (int k = 0; k < n; ++k)
          for (int i = 0; i < n; ++i) {
            double v = ww[c][k] * W[i];
            for (int m = 0; m < n; ++m) {
              v -= dG[c][m][k][i] * W[m] + G[m][k][i] * DT[c][m];
              v -= G[m][c][k] * NT[m][i];
              v -= G[m][c][i] * NT[k][m];
            }
            n2w[c][k][i] = v;
          }
      double acc = 0;
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          acc += gi[j][k] * (n2w[k][j][i0] + n2w[k][i0][j]);
      // trace part: -(1/n) D_{i0}(d* w) with d* w local to p's stars
      double dtr = 0;
      for (int m = 0; m < K; ++m) {
        const std::int64_t q = pidx[i0][m];
        if (grid.is_exterior(q)) continue;
        // ds(q) = -g^{ab}(q) [ D_b w_a - Gamma^c_{ba} w_c ](q) for basis W
        double ds = 0;
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b) {
            double nb = stencil_weight_of(grid, q, b, p) * W[a];
            if (q == p)
              for (int c = 0; c < n; ++c)
                nb -= bg.gamma0(q, c, b, a) * W[c];
            ds += bg.g0_inv(q, a, b) * nb;
          }
        ds = -ds;
        dtr += pwt[i0][m] * ds;
      }
      const double dphys = -0.5 * acc - dtr / n;
      diag[off_xi + row * n + i0] = std::pow(bg.rho(p), -s) * dphys;
    }
    ++row;
  }

  // guard against accidental zeros
  for (double& d : diag)
    if (std::abs(d) < 1e-14) d = 1.0;
  return diag;
}

namespace {

// workspace shared by the outer iterations
struct BackgroundWorkspace {
  const BackgroundGeometry& bg;
  Geometry geo0;
  OperatorContext ctx0;
  std::vector<double> diag;
  double s;

  BackgroundWorkspace(const BackgroundGeometry& b, const SolverConfig& cfg)
      : bg(b), geo0(b.grid(), b, nullptr), ctx0(geo0), s(cfg.weight_s) {
    if (cfg.precond == Preconditioner::diagonal)
      diag = probe_block_diagonals(b, cfg.weight_s);
  }
};

// split blocks of origin_jacobian_apply used by the triangular solve
Field origin_row1_xi(const OperatorContext& ctx0, const Field& dxi_phys) {
  return conformal_killing(ctx0, dxi_phys);  // enters row1 with minus sign
}

std::vector<double> pack_sym_rows(const Grid& grid, const BackgroundGeometry& bg,
                                  const Field& E1, double s) {
  const int S = sym_count(grid.n());
  std::vector<double> v(grid.num_interior() * static_cast<std::int64_t>(S));
  std::int64_t k = 0;
  for (std::int64_t p : grid.interior_nodes()) {
    const double w = std::pow(bg.rho(p), 2.0 - s);
    for (int c = 0; c < S; ++c) v[k++] = w * E1.at(p, c);
  }
  return v;
}

std::vector<double> pack_oneform_rows(const Grid& grid, const BackgroundGeometry& bg,
                                      const Field& E2, double s) {
  const int n = grid.n();
  std::vector<double> v(grid.num_interior() * static_cast<std::int64_t>(n));
  std::int64_t k = 0;
  for (std::int64_t p : grid.interior_nodes()) {
    const double w = std::pow(bg.rho(p), 1.0 - s);
    for (int c = 0; c < n; ++c) v[k++] = w * E2.at(p, c);
  }
  return v;
}

Field unpack_hbar(const Grid& grid, const std::vector<double>& v) {
  const int S = sym_count(grid.n());
  Field hbar(grid, Rank::sym2, Frame::rescaled);
  std::int64_t k = 0;
  for (std::int64_t p : grid.interior_nodes())
    for (int c = 0; c < S; ++c) hbar.at(p, c) = v[k++];
  return hbar;
}

Field unpack_xibar(const Grid& grid, const std::vector<double>& v) {
  const int n = grid.n();
  Field xibar(grid, Rank::one_form, Frame::rescaled);
  std::int64_t k = 0;
  for (std::int64_t p : grid.interior_nodes())
    for (int c = 0; c < n; ++c) xibar.at(p, c) = v[k++];
  return xibar;
}

ConstraintState linear_solve_ws(BackgroundWorkspace& ws, const ResidualPair& rhs,
                                const SolverConfig& config, LinearSolveStats* st1,
                                LinearSolveStats* st2) {
  const Grid& grid = ws.bg.grid();
  const std::int64_t nh = grid.num_interior() * static_cast<std::int64_t>(sym_count(grid.n()));
  const std::int64_t nxi = grid.num_interior() * static_cast<std::int64_t>(grid.n());

  const std::vector<double>* dh_diag = nullptr;
  const std::vector<double>* dxi_diag = nullptr;
  std::vector<double> d1, d2;
  if (!ws.diag.empty()) {
    d1.assign(ws.diag.begin(), ws.diag.begin() + nh);
    d2.assign(ws.diag.begin() + nh, ws.diag.end());
    dh_diag = &d1;
    dxi_diag = &d2;
  }

  // row 2: (div Lring) dxi = E2
  auto opC = [&](const std::vector<double>& v) {
    Field xibar = unpack_xibar(grid, v);
    Field dxi = to_physical(xibar, ws.bg);
    Field lk = conformal_killing(ws.ctx0, dxi);
    Field e2 = divergence_sym2(ws.ctx0, lk);
    return pack_oneform_rows(grid, ws.bg, e2, ws.s);
  };
  std::vector<double> b2 = pack_oneform_rows(grid, ws.bg, rhs.E2, ws.s);
  std::vector<double> x2;
  LinearSolveStats s2 = bicgstab(opC, b2, x2, dxi_diag, config.linear_tol,
                                 config.linear_max_iter);
  if (!s2.converged && nrm2(b2) > 0)
    throw SolverDivergence("linear solve (row 2) did not reach tolerance: relres=" +
                               std::to_string(s2.relative_residual) + " after " +
                               std::to_string(s2.iterations) + " iterations",
                           SolveReport{});
  if (st2) *st2 = s2;

  // row 1: A dh = E1 + Lring dxi
  Field xibar_sol = unpack_xibar(grid, x2);
  Field dxi_sol = to_physical(xibar_sol, ws.bg);
  Field cross = origin_row1_xi(ws.ctx0, dxi_sol);
  Field b1f(grid, Rank::sym2, Frame::physical);
  for (std::int64_t p = 0; p < grid.num_nodes(); ++p) {
    if (grid.is_exterior(p)) continue;
    for (int c = 0; c < b1f.ncomp(); ++c)
      b1f.at(p, c) = rhs.E1.at(p, c) + cross.at(p, c);
  }
  auto opA = [&](const std::vector<double>& v) {
    Field hbar = unpack_hbar(grid, v);
    Field zero_xi(grid, Rank::one_form, Frame::rescaled);
    ResidualPair r = origin_jacobian_apply(ws.bg, hbar, zero_xi);
    return pack_sym_rows(grid, ws.bg, r.E1, ws.s);
  };
  std::vector<double> b1 = pack_sym_rows(grid, ws.bg, b1f, ws.s);
  std::vector<double> x1;
  LinearSolveStats s1 = bicgstab(opA, b1, x1, dh_diag, config.linear_tol,
                                 config.linear_max_iter);
  if (!s1.converged && nrm2(b1) > 0)
    throw SolverDivergence("linear solve (row 1) did not reach tolerance: relres=" +
                               std::to_string(s1.relative_residual) + " after " +
                               std::to_string(s1.iterations) + " iterations",
                           SolveReport{});
  if (st1) *st1 = s1;

  ConstraintState out(grid);
  out.hbar = unpack_hbar(grid, x1);
  out.xibar = std::move(xibar_sol);
  return out;
}

void fill_final_norms(SolveReport& rep, const ConstraintState& state,
                      const BackgroundGeometry& bg, double s) {
  bool hz = true, xz = true;
  for (double v : state.hbar.raw())
    if (v != 0) { hz = false; break; }
  for (double v : state.xibar.raw())
    if (v != 0) { xz = false; break; }
  rep.final_h_norm = hz ? 0.0 : weighted_sup_norm(to_physical(state.hbar, bg), bg, s);
  rep.final_xi_norm = xz ? 0.0 : weighted_sup_norm(to_physical(state.xibar, bg), bg, s);
}

std::pair<ConstraintState, SolveReport> ift_drive(const SourceTensor& T,
                                                  const BackgroundGeometry& bg,
                                                  const SolverConfig& config,
                                                  const ConstraintState* warm) {
  config.validate();
  const Grid& grid = bg.grid();
  const auto t0 = std::chrono::steady_clock::now();
  BackgroundWorkspace ws(bg, config);
  ConstraintState state = warm ? *warm : ConstraintState(grid);
  SolveReport rep;
  rep.mode = "ift-picard";
  int rising = 0;

  for (int k = 0; k <= config.nonlinear_max_iter; ++k) {
    ResidualPair rp(grid);
    try {
      rp = residual_gauged(state, T.T, bg);
    } catch (const NonSpdError& e) {
      rep.failure = std::string("iterate left the SPD region: ") + e.what();
      throw SolverDivergence(rep.failure, rep);
    }
    const double r = residual_wnorm(rp, bg, config.weight_s);
    rep.residual_history.push_back(r);
    if (!std::isfinite(r)) {
      rep.failure = "residual is not finite";
      throw SolverDivergence(rep.failure, rep);
    }
    if (r <= config.nonlinear_tol) {
      rep.converged = true;
      break;
    }
    if (rep.residual_history.size() >= 2) {
      const double prev = rep.residual_history[rep.residual_history.size() - 2];
      rising = r > prev ? rising + 1 : 0;
      if (rising >= 2 || r > 1e6 * rep.residual_history.front()) {
        rep.failure = "nonlinear iteration diverged";
        throw SolverDivergence(rep.failure, rep);
      }
    }
    if (k == config.nonlinear_max_iter) {
      rep.failure = "nonlinear max iterations reached";
      break;
    }
    LinearSolveStats s1, s2;
    ConstraintState delta = linear_solve_ws(ws, rp, config, &s1, &s2);
    rep.linear_iterations.push_back(s1.iterations + s2.iterations);
    for (size_t i = 0; i < state.hbar.raw().size(); ++i)
      state.hbar.raw()[i] -= delta.hbar.raw()[i];
    for (size_t i = 0; i < state.xibar.raw().size(); ++i)
      state.xibar.raw()[i] -= delta.xibar.raw()[i];
  }
  fill_final_norms(rep, state, bg, config.weight_s);
  rep.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {std::move(state), std::move(rep)};
}

std::pair<ConstraintState, SolveReport> newton_drive(const SourceTensor& T,
                                                     const BackgroundGeometry& bg,
                                                     const SolverConfig& config,
                                                     const ConstraintState* warm) {
  config.validate();
  const Grid& grid = bg.grid();
  const auto t0 = std::chrono::steady_clock::now();
  BackgroundWorkspace ws(bg, config);
  ConstraintState state = warm ? *warm : ConstraintState(grid);
  SolveReport rep;
  rep.mode = "newton-fd";
  int rising = 0;

  const std::vector<double>* diag = ws.diag.empty() ? nullptr : &ws.diag;
  for (int k = 0; k <= config.nonlinear_max_iter; ++k) {
    ResidualPair rp(grid);
    try {
      rp = residual_gauged(state, T.T, bg);
    } catch (const NonSpdError& e) {
      rep.failure = std::string("iterate left the SPD region: ") + e.what();
      throw SolverDivergence(rep.failure, rep);
    }
    const double r = residual_wnorm(rp, bg, config.weight_s);
    rep.residual_history.push_back(r);
    if (!std::isfinite(r)) {
      rep.failure = "residual is not finite";
      throw SolverDivergence(rep.failure, rep);
    }
    if (r <= config.nonlinear_tol) {
      rep.converged = true;
      break;
    }
    if (rep.residual_history.size() >= 2) {
      const double prev = rep.residual_history[rep.residual_history.size() - 2];
      rising = r > prev ? rising + 1 : 0;
      if (rising >= 2 || r > 1e6 * rep.residual_history.front()) {
        rep.failure = "nonlinear iteration diverged";
        throw SolverDivergence(rep.failure, rep);
      }
    }
    if (k == config.nonlinear_max_iter) {
      rep.failure = "nonlinear max iterations reached";
      break;
    }
    // inexact-Newton forcing, quadratic near the solution
    double eta = 1e-2;
    if (rep.residual_history.size() >= 2) {
      const double prev = rep.residual_history[rep.residual_history.size() - 2];
      eta = std::min(1e-2, 0.9 * (r / prev) * (r / prev));
    }
    eta = std::max(eta, config.linear_tol);

    const double xscale = std::max(
        1.0, std::max(nrm2(state.hbar.raw()), nrm2(state.xibar.raw())));
    auto matvec = [&](const std::vector<double>& v) {
      const double vn = nrm2(v);
      if (vn == 0.0) return std::vector<double>(v.size(), 0.0);
      ConstraintState dir = unpack(grid, v);
      for (double& a : dir.hbar.raw()) a /= vn;
      for (double& a : dir.xibar.raw()) a /= vn;
      const double tau = config.jacobian_step * xscale;
      ResidualPair jd =
          numeric_jacobian_apply(state, T.T, bg, dir.hbar, dir.xibar, tau);
      std::vector<double> out = pack_residual(jd, bg, config.weight_s);
      for (double& a : out) a *= vn;
      return out;
    };
    std::vector<double> b = pack_residual(rp, bg, config.weight_s);
    std::vector<double> x;
    LinearSolveStats st;
    try {
      st = bicgstab(matvec, b, x, diag, eta, config.linear_max_iter);
    } catch (const NonSpdError& e) {
      rep.failure = std::string("jacobian probe left the SPD region: ") + e.what();
      throw SolverDivergence(rep.failure, rep);
    }
    if (!st.converged) {
      rep.failure = "newton linear solve stalled: relres=" +
                    std::to_string(st.relative_residual);
      throw SolverDivergence(rep.failure, rep);
    }
    rep.linear_iterations.push_back(st.iterations);
    ConstraintState delta = unpack(grid, x);
    for (size_t i = 0; i < state.hbar.raw().size(); ++i)
      state.hbar.raw()[i] -= delta.hbar.raw()[i];
    for (size_t i = 0; i < state.xibar.raw().size(); ++i)
      state.xibar.raw()[i] -= delta.xibar.raw()[i];
  }
  fill_final_norms(rep, state, bg, config.weight_s);
  rep.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {std::move(state), std::move(rep)};
}

}  // namespace

ConstraintState linear_solve(const BackgroundGeometry& bg, const ResidualPair& rhs,
                             const SolverConfig& config, LinearSolveStats* stats_row1,
                             LinearSolveStats* stats_row2) {
  config.validate();
  BackgroundWorkspace ws(bg, config);
  return linear_solve_ws(ws, rhs, config, stats_row1, stats_row2);
}

std::pair<ConstraintState, SolveReport> ift_iterate(const SourceTensor& T,
                                                    const BackgroundGeometry& bg,
                                                    const SolverConfig& config) {
  return ift_drive(T, bg, config, nullptr);
}

std::pair<ConstraintState, SolveReport> newton_fd(const SourceTensor& T,
                                                  const BackgroundGeometry& bg,
                                                  const SolverConfig& config) {
  return newton_drive(T, bg, config, nullptr);
}

std::pair<ConstraintState, SolveReport> continuation(const SourceTensor& T_target,
                                                     int steps,
                                                     const BackgroundGeometry& bg,
                                                     const SolverConfig& config) {
  if (steps < 1) throw std::invalid_argument("continuation: steps must be >= 1");
  const Grid& grid = bg.grid();
  ConstraintState state(grid);
  SolveReport total;
  total.mode = config.mode == SolverMode::newton_fd ? "newton-fd" : "ift-picard";
  const auto t0 = std::chrono::steady_clock::now();
  for (int j = 1; j <= steps; ++j) {
    SourceTensor Tj = T_target;
    const double fac = static_cast<double>(j) / steps;
    for (double& v : Tj.T.raw()) v *= fac;
    Tj.recipe.amplitude = T_target.recipe.amplitude * fac;
    auto [st, rep] = config.mode == SolverMode::newton_fd
                         ? newton_drive(Tj, bg, config, j == 1 ? nullptr : &state)
                         : ift_drive(Tj, bg, config, j == 1 ? nullptr : &state);
    total.residual_history.insert(total.residual_history.end(),
                                  rep.residual_history.begin(),
                                  rep.residual_history.end());
    total.linear_iterations.insert(total.linear_iterations.end(),
                                   rep.linear_iterations.begin(),
                                   rep.linear_iterations.end());
    total.converged = rep.converged;
    total.failure = rep.failure;
    state = std::move(st);
    if (!rep.converged) break;
  }
  fill_final_norms(total, state, bg, config.weight_s);
  total.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {std::move(state), std::move(total)};
}

}  // namespace ahcc
