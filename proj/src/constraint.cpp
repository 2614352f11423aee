#include "ahcc/constraint.hpp"

#include <cmath>
#include <random>

namespace ahcc {

namespace {
constexpr int D = kMaxDim;
}

SourceTensor make_source(const SourceRecipe& recipe, const Grid& grid,
                         const BackgroundGeometry& bg) {
  if (recipe.amplitude < 0)
    throw std::invalid_argument("make_source: amplitude must be >= 0");
  const int n = grid.n();
  const std::int64_t P = grid.num_nodes();
  std::mt19937_64 rng(recipe.seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);

  // smooth angular factor: constant symmetric matrix plus low-frequency
  // sinusoidal modulation per component
  double base[D][D], mod[D][D][D];
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      base[i][j] = base[j][i] = uni(rng);
      for (int k = 0; k < n; ++k) mod[i][j][k] = 0.3 * uni(rng);
    }
  double x0[D] = {}, bamp[D][D];
  if (recipe.profile == SourceProfile::gaussian_bump) {
    for (int a = 0; a < n; ++a) x0[a] = 0.2 * grid.r_max() * uni(rng);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) bamp[i][j] = bamp[j][i] = uni(rng);
  }

  Field Tbar(grid, Rank::sym2, Frame::rescaled);
  double sup = 0.0;
  std::vector<double> fro(P, 0.0);
  for (std::int64_t p = 0; p < P; ++p) {
    if (grid.is_exterior(p)) continue;
    double x[D];
    grid.position(p, x);
    if (recipe.profile == SourceProfile::rho_power) {
      double s2 = 0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          double a = base[i][j];
          for (int k = 0; k < n; ++k) a += mod[std::min(i, j)][std::max(i, j)][k] * std::sin(M_PI * x[k]);
          Tbar.sym_at(p, i, j) = a;
          s2 += a * a;
        }
      fro[p] = std::sqrt(s2);
    } else {
      double r2 = 0;
      for (int a = 0; a < n; ++a) r2 += (x[a] - x0[a]) * (x[a] - x0[a]);
      const double b = std::exp(-0.5 * r2 / (recipe.width * recipe.width));
      double s2 = 0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          Tbar.sym_at(p, i, j) = b * bamp[i][j];
          s2 += Tbar.sym_at(p, i, j) * Tbar.sym_at(p, i, j);
        }
      fro[p] = std::sqrt(s2);
    }
    sup = std::max(sup, fro[p]);
  }
  if (sup == 0.0) sup = 1.0;

  // normalize so the frame norm profile is amplitude * rho^decay (rho_power)
  // or amplitude * bump (gaussian); |T|_frame = ||Tbar||_F exactly.
  for (std::int64_t p = 0; p < P; ++p) {
    if (grid.is_exterior(p)) continue;
    double fac = recipe.amplitude / sup;
    if (recipe.profile == SourceProfile::rho_power)
      fac *= std::pow(bg.rho(p), recipe.decay);
    for (int c = 0; c < Tbar.ncomp(); ++c) Tbar.at(p, c) *= fac;
  }
  SourceTensor out{recipe, to_physical(Tbar, bg)};
  return out;
}

bool ConstraintState::dirichlet_ok() const {
  const Grid& grid = hbar.grid();
  for (std::int64_t p = 0; p < grid.num_nodes(); ++p) {
    if (grid.is_interior(p)) continue;
    for (int c = 0; c < hbar.ncomp(); ++c)
      if (hbar.at(p, c) != 0.0) return false;
    for (int c = 0; c < xibar.ncomp(); ++c)
      if (xibar.at(p, c) != 0.0) return false;
  }
  return true;
}

void ConstraintState::enforce_dirichlet() {
  const Grid& grid = hbar.grid();
  for (std::int64_t p = 0; p < grid.num_nodes(); ++p) {
    if (grid.is_interior(p)) continue;
    for (int c = 0; c < hbar.ncomp(); ++c) hbar.at(p, c) = 0.0;
    for (int c = 0; c < xibar.ncomp(); ++c) xibar.at(p, c) = 0.0;
  }
}

Field source_S(const OperatorContext& ctx, const Field& T_phys, const Field& xi_phys) {
  const Grid& grid = ctx.grid;
  const int n = grid.n();
  Field S = conformal_killing(ctx, xi_phys);
  for (std::int64_t p = 0; p < grid.num_nodes(); ++p) {
    if (grid.is_exterior(p)) continue;
    double tr = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) tr += ctx.geo.ginv(p, i, j) * T_phys.sym_at(p, i, j);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j)
        S.sym_at(p, i, j) += T_phys.sym_at(p, i, j) - tr / n * ctx.geo.g(p, i, j);
  }
  return S;
}

namespace {

ResidualPair residual_impl(const ConstraintState& state, const Field& T_phys,
                           const BackgroundGeometry& bg, bool gauged,
                           std::shared_ptr<Geometry>* geo_out) {
  const Grid& grid = state.hbar.grid();
  if (!state.dirichlet_ok())
    throw std::invalid_argument("residual: state violates the Dirichlet property");
  auto geo = std::make_shared<Geometry>(grid, bg, &state.hbar);
  OperatorContext ctx(*geo);
  Field xi_phys = to_physical(state.xibar, bg);
  Field S = source_S(ctx, T_phys, xi_phys);

  ResidualPair out(grid);
  const int n = grid.n();
  if (gauged) {
    Field omega = gauge_source(ctx);
    Field gauge_term = killing_sym(ctx, omega);
    for (std::int64_t p = 0; p < grid.num_nodes(); ++p) {
      if (grid.is_exterior(p)) continue;
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j)
          out.E1.sym_at(p, i, j) =
              ctx.geo.wdev(p, i, j) - gauge_term.sym_at(p, i, j) - S.sym_at(p, i, j);
    }
  } else {
    for (std::int64_t p = 0; p < grid.num_nodes(); ++p) {
      if (grid.is_exterior(p)) continue;
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j)
          out.E1.sym_at(p, i, j) = ctx.geo.wdev(p, i, j) - S.sym_at(p, i, j);
    }
  }
  out.E2 = divergence_sym2(ctx, S);
  if (geo_out) *geo_out = std::move(geo);
  return out;
}

}  // namespace

ResidualPair residual_gauged(const ConstraintState& state, const Field& T_phys,
                             const BackgroundGeometry& bg,
                             std::shared_ptr<Geometry>* geo_out) {
  return residual_impl(state, T_phys, bg, true, geo_out);
}

ResidualPair residual_ungauged(const ConstraintState& state, const Field& T_phys,
                               const BackgroundGeometry& bg,
                               std::shared_ptr<Geometry>* geo_out) {
  return residual_impl(state, T_phys, bg, false, geo_out);
}

ResidualPair linearized_apply(const OperatorContext& ctx0, const Field& dh_phys,
                              const Field& dxi_phys) {
  const Grid& grid = ctx0.grid;
  const int n = grid.n();
  ResidualPair out(grid);
  Field lich = lichnerowicz(ctx0, dh_phys);
  Field lk = conformal_killing(ctx0, dxi_phys);
  for (std::int64_t p = 0; p < grid.num_nodes(); ++p) {
    if (grid.is_exterior(p)) continue;
    for (int c = 0; c < lich.ncomp(); ++c)
      out.E1.at(p, c) = 0.5 * lich.at(p, c) + (n - 1) * dh_phys.at(p, c) - lk.at(p, c);
  }
  out.E2 = div_conf_killing(ctx0, dxi_phys);
  return out;
}

// Exact linearization of the discrete pipeline at the origin: the geometry
// assembly with background-frozen algebra and quadratic terms dropped.
ResidualPair origin_jacobian_apply(const BackgroundGeometry& bg, const Field& dhbar,
                                   const Field& dxibar) {
  const Grid& grid = dhbar.grid();
  const int n = grid.n();
  const int S = sym_count(n);
  const std::int64_t P = grid.num_nodes();

  Field dh = to_physical(dhbar, bg);
  Field dxi = to_physical(dxibar, bg);

  // FD passes on dh
  std::vector<double> Dh(P * n * S, 0.0), DDh(P * n * n * S, 0.0);
  for (std::int64_t p = 0; p < P; ++p) {
    if (grid.is_exterior(p)) continue;
    for (int a = 0; a < n; ++a)
      for (int c = 0; c < S; ++c)
        Dh[(p * n + a) * S + c] = grid.fd_partial(dh.data(), S, p, a, c);
  }
  for (std::int64_t p = 0; p < P; ++p) {
    if (grid.is_exterior(p)) continue;
    for (int c = 0; c < n; ++c)
      for (int kc = 0; kc < n * S; ++kc)
        DDh[(p * n + c) * n * S + kc] = grid.fd_partial(Dh.data(), n * S, p, c, kc);
  }

  Field dricL(grid, Rank::sym2, Frame::physical);
  for (std::int64_t p = 0; p < P; ++p) {
    if (grid.is_exterior(p)) continue;
    double h[D][D], G0[D][D][D], dG0[D][D][D][D], gi0[D][D], dgi0[D][D][D];
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        h[i][j] = dh.sym_at(p, i, j);
        gi0[i][j] = bg.g0_inv(p, i, j);
      }
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          G0[k][i][j] = bg.gamma0(p, k, i, j);
          for (int c = 0; c < n; ++c) dG0[c][k][i][j] = bg.dgamma0(p, c, k, i, j);
        }
    // d_c g0inv = -g0inv dg0 g0inv (diagonal conformal background)
    for (int c = 0; c < n; ++c)
      for (int a = 0; a < n; ++a)
        for (int l = 0; l < n; ++l) {
          double v = 0;
          for (int m = 0; m < n; ++m)
            for (int q = 0; q < n; ++q)
              v += gi0[a][m] * bg.dg0(p, c, m, q) * gi0[q][l];
          dgi0[c][a][l] = -v;
        }
    double dhv[D][D][D], ddhv[D][D][D][D];
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          dhv[k][i][j] = Dh[(p * n + k) * S + sym_index(n, i, j)];
          for (int c = 0; c < n; ++c)
            ddhv[c][k][i][j] = DDh[((p * n + c) * n + k) * S + sym_index(n, i, j)];
        }
    double Nh[D][D][D], PM[D][D][D][D];
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          double v = dhv[k][i][j];
          for (int m = 0; m < n; ++m)
            v -= G0[m][k][i] * h[m][j] + G0[m][k][j] * h[i][m];
          Nh[k][i][j] = v;
          for (int c = 0; c < n; ++c) {
            double w = ddhv[c][k][i][j];
            for (int m = 0; m < n; ++m) {
              w -= dG0[c][m][k][i] * h[m][j] + G0[m][k][i] * dhv[c][m][j];
              w -= dG0[c][m][k][j] * h[i][m] + G0[m][k][j] * dhv[c][i][m];
            }
            PM[c][k][i][j] = w;
          }
        }
    double M[D][D][D], dM[D][D][D][D];
    for (int l = 0; l < n; ++l)
      for (int d = 0; d < n; ++d)
        for (int b = 0; b < n; ++b) {
          M[l][d][b] = Nh[d][b][l] + Nh[b][d][l] - Nh[l][d][b];
          for (int c = 0; c < n; ++c)
            dM[c][l][d][b] = PM[c][d][b][l] + PM[c][b][d][l] - PM[c][l][d][b];
        }
    double dGam[D][D][D], ddGam[D][D][D][D];
    for (int a = 0; a < n; ++a)
      for (int d = 0; d < n; ++d)
        for (int b = 0; b < n; ++b) {
          double v = 0;
          for (int l = 0; l < n; ++l) v += gi0[a][l] * M[l][d][b];
          dGam[a][d][b] = 0.5 * v;
          for (int c = 0; c < n; ++c) {
            double w = 0;
            for (int l = 0; l < n; ++l)
              w += dgi0[c][a][l] * M[l][d][b] + gi0[a][l] * dM[c][l][d][b];
            ddGam[c][a][d][b] = 0.5 * w;
          }
        }
    double NdG[D][D][D][D];
    for (int c = 0; c < n; ++c)
      for (int a = 0; a < n; ++a)
        for (int d = 0; d < n; ++d)
          for (int b = 0; b < n; ++b) {
            double v = ddGam[c][a][d][b];
            for (int e = 0; e < n; ++e) {
              v += G0[a][c][e] * dGam[e][d][b];
              v -= G0[e][c][d] * dGam[a][e][b];
              v -= G0[e][c][b] * dGam[a][d][e];
            }
            NdG[c][a][d][b] = v;
          }
    double ric[D][D];
    for (int b = 0; b < n; ++b)
      for (int d = 0; d < n; ++d) {
        double v = 0;
        for (int a = 0; a < n; ++a) v += NdG[a][a][d][b] - NdG[d][a][a][b];
        ric[b][d] = v;
      }
    for (int b = 0; b < n; ++b)
      for (int d = b; d < n; ++d)
        dricL.sym_at(p, b, d) = 0.5 * (ric[b][d] + ric[d][b]);
  }

  // gauge and source parts over the background context
  Geometry geo0(grid, bg, nullptr);
  OperatorContext ctx0(geo0);
  Field bh = gauge_B(ctx0, dh);             // B0(dh)
  Field gauge_term = killing_sym(ctx0, bh); // L0(B0(dh))
  Field lk = conformal_killing(ctx0, dxi);

  ResidualPair out(grid);
  for (std::int64_t p = 0; p < P; ++p) {
    if (grid.is_exterior(p)) continue;
    for (int c = 0; c < S; ++c)
      out.E1.at(p, c) = dricL.at(p, c) + (n - 1) * dh.at(p, c) +
                        gauge_term.at(p, c) - lk.at(p, c);
  }
  out.E2 = divergence_sym2(ctx0, lk);
  return out;
}

ResidualPair numeric_jacobian_apply(const ConstraintState& state0, const Field& T_phys,
                                    const BackgroundGeometry& bg, const Field& dhbar,
                                    const Field& dxibar, double step) {
  if (!(step > 0)) throw std::invalid_argument("numeric_jacobian_apply: step must be > 0");
  const Grid& grid = state0.hbar.grid();
  ConstraintState plus(grid), minus(grid);
  for (size_t i = 0; i < plus.hbar.raw().size(); ++i) {
    plus.hbar.raw()[i] = state0.hbar.raw()[i] + step * dhbar.raw()[i];
    minus.hbar.raw()[i] = state0.hbar.raw()[i] - step * dhbar.raw()[i];
  }
  for (size_t i = 0; i < plus.xibar.raw().size(); ++i) {
    plus.xibar.raw()[i] = state0.xibar.raw()[i] + step * dxibar.raw()[i];
    minus.xibar.raw()[i] = state0.xibar.raw()[i] - step * dxibar.raw()[i];
  }
  ResidualPair rp = residual_gauged(plus, T_phys, bg);
  ResidualPair rm = residual_gauged(minus, T_phys, bg);
  ResidualPair out(grid);
  const double inv = 1.0 / (2.0 * step);
  for (size_t i = 0; i < out.E1.raw().size(); ++i)
    out.E1.raw()[i] = (rp.E1.raw()[i] - rm.E1.raw()[i]) * inv;
  for (size_t i = 0; i < out.E2.raw().size(); ++i)
    out.E2.raw()[i] = (rp.E2.raw()[i] - rm.E2.raw()[i]) * inv;
  return out;
}

std::int64_t dof_count(const Grid& grid) {
  return grid.num_interior() * (sym_count(grid.n()) + grid.n());
}

std::vector<double> pack(const ConstraintState& state) {
  const Grid& grid = state.hbar.grid();
  const int S = sym_count(grid.n());
  const int n = grid.n();
  const auto& I = grid.interior_nodes();
  std::vector<double> v(dof_count(grid));
  std::int64_t k = 0;
  for (std::int64_t p : I)
    for (int c = 0; c < S; ++c) v[k++] = state.hbar.at(p, c);
  for (std::int64_t p : I)
    for (int c = 0; c < n; ++c) v[k++] = state.xibar.at(p, c);
  return v;
}

ConstraintState unpack(const Grid& grid, const std::vector<double>& v) {
  if (static_cast<std::int64_t>(v.size()) != dof_count(grid))
    throw std::invalid_argument("unpack: length mismatch");
  const int S = sym_count(grid.n());
  const int n = grid.n();
  ConstraintState state(grid);
  std::int64_t k = 0;
  for (std::int64_t p : grid.interior_nodes())
    for (int c = 0; c < S; ++c) state.hbar.at(p, c) = v[k++];
  for (std::int64_t p : grid.interior_nodes())
    for (int c = 0; c < n; ++c) state.xibar.at(p, c) = v[k++];
  return state;
}

std::vector<double> pack_residual(const ResidualPair& r, const BackgroundGeometry& bg,
                                  double s) {
  const Grid& grid = r.E1.grid();
  const int S = sym_count(grid.n());
  const int n = grid.n();
  std::vector<double> v(dof_count(grid));
  std::int64_t k = 0;
  for (std::int64_t p : grid.interior_nodes()) {
    const double w = std::pow(bg.rho(p), 2.0 - s);
    for (int c = 0; c < S; ++c) v[k++] = w * r.E1.at(p, c);
  }
  for (std::int64_t p : grid.interior_nodes()) {
    const double w = std::pow(bg.rho(p), 1.0 - s);
    for (int c = 0; c < n; ++c) v[k++] = w * r.E2.at(p, c);
  }
  return v;
}

double residual_wnorm(const ResidualPair& r, const BackgroundGeometry& bg, double s) {
  return std::max(weighted_sup_norm(r.E1, bg, s), weighted_sup_norm(r.E2, bg, s));
}

}  // namespace ahcc
