#include "ahcc/geometry.hpp"

#include <cmath>
#include <cstring>

namespace ahcc {

namespace {

constexpr int D = kMaxDim;

// dense Cholesky on n<=4, returns false if not SPD; inv receives the inverse
bool spd_inverse(const double* a, int n, double* inv, double* det) {
  double L[D][D] = {};
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = a[i * n + j];
      for (int k = 0; k < j; ++k) s -= L[i][k] * L[j][k];
      if (i == j) {
        if (s <= 0.0) return false;
        L[i][i] = std::sqrt(s);
      } else {
        L[i][j] = s / L[j][j];
      }
    }
  }
  double dt = 1.0;
  for (int i = 0; i < n; ++i) dt *= L[i][i];
  *det = dt * dt;
  // invert L, then inv = L^-T L^-1
  double Li[D][D] = {};
  for (int i = 0; i < n; ++i) {
    Li[i][i] = 1.0 / L[i][i];
    for (int j = 0; j < i; ++j) {
      double s = 0;
      for (int k = j; k < i; ++k) s += L[i][k] * Li[k][j];
      Li[i][j] = -s / L[i][i];
    }
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double s = 0;
      for (int k = std::max(i, j); k < n; ++k) s += Li[k][i] * Li[k][j];
      inv[i * n + j] = s;
    }
  return true;
}

}  // namespace

Geometry::Geometry(const Grid& grid, const BackgroundGeometry& bg, const Field* hbar)
    : grid_(&grid), bg_(&bg), S_(sym_count(grid.n())) {
  is_background_ = hbar == nullptr;
  if (!is_background_) {
    if (hbar->rank() != Rank::sym2 || hbar->frame() != Frame::rescaled)
      throw std::invalid_argument("geometry: hbar must be a rescaled sym2 field");
    bool all_zero = true;
    for (double v : hbar->raw())
      if (v != 0.0) { all_zero = false; break; }
    if (all_zero) is_background_ = true;
  }
  if (!is_background_) {
    const std::int64_t P = grid.num_nodes();
    hphys_.assign(P * S_, 0.0);
    for (std::int64_t p = 0; p < P; ++p) {
      if (grid.is_exterior(p)) continue;
      const double r = bg.rho(p);
      for (int c = 0; c < S_; ++c)
        hphys_[p * S_ + c] = hbar->at(p, c) / (r * r);
    }
    build();
  }
}

void Geometry::build() {
  const Grid& grid = *grid_;
  const BackgroundGeometry& bg = *bg_;
  const int n = grid.n();
  const int S = S_;
  const std::int64_t P = grid.num_nodes();

  ginv_.assign(P * S, 0.0);
  sqrt_det_g_.assign(P, 0.0);

  // metric inverse + SPD check
  for (std::int64_t p = 0; p < P; ++p) {
    if (grid.is_exterior(p)) continue;
    double gf[D * D], gi[D * D], det;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        gf[i * n + j] = bg.g0(p, i, j) + hphys_[p * S + sym_index(n, i, j)];
    if (!spd_inverse(gf, n, gi, &det)) throw NonSpdError(p);
    sqrt_det_g_[p] = std::sqrt(det);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) ginv_[p * S + sym_index(n, i, j)] = gi[i * n + j];
  }

  // first and second FD passes on the physical perturbation
  std::vector<double> Dh(P * n * S, 0.0), DDh(P * n * n * S, 0.0);
  for (std::int64_t p = 0; p < P; ++p) {
    if (grid.is_exterior(p)) continue;
    for (int a = 0; a < n; ++a)
      for (int c = 0; c < S; ++c)
        Dh[(p * n + a) * S + c] = grid.fd_partial(hphys_.data(), S, p, a, c);
  }
  for (std::int64_t p = 0; p < P; ++p) {
    if (grid.is_exterior(p)) continue;
    for (int c = 0; c < n; ++c)
      for (int kc = 0; kc < n * S; ++kc)
        DDh[(p * n + c) * n * S + kc] = grid.fd_partial(Dh.data(), n * S, p, c, kc);
  }

  nh_.assign(P * n * S, 0.0);
  dgamma_.assign(P * n * S, 0.0);
  ddgamma_.assign(P * n * n * S, 0.0);
  dric_.assign(P * S, 0.0);

  for (std::int64_t p = 0; p < P; ++p) {
    if (grid.is_exterior(p)) continue;
    double h[D][D], G0[D][D][D], dG0[D][D][D][D], gi[D][D];
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        h[i][j] = hphys_[p * S + sym_index(n, i, j)];
        gi[i][j] = ginv_[p * S + sym_index(n, i, j)];
      }
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          G0[k][i][j] = bg.gamma0(p, k, i, j);
          for (int c = 0; c < n; ++c) dG0[c][k][i][j] = bg.dgamma0(p, c, k, i, j);
        }
    double dh[D][D][D], ddh[D][D][D][D];
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          dh[k][i][j] = Dh[(p * n + k) * S + sym_index(n, i, j)];
          for (int c = 0; c < n; ++c)
            ddh[c][k][i][j] = DDh[((p * n + c) * n + k) * S + sym_index(n, i, j)];
        }

    // Nh_k,ij = nabla0_k h_ij
    double Nh[D][D][D];
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
          double v = dh[k][i][j];
          for (int m = 0; m < n; ++m)
            v -= G0[m][k][i] * h[m][j] + G0[m][k][j] * h[i][m];
          Nh[k][i][j] = v;
          Nh[k][j][i] = v;
          nh_[(p * n + k) * S + sym_index(n, i, j)] = v;
        }

    // PM_c,k,ij = d_c (nabla0_k h)_ij by product rule
    double PM[D][D][D][D];
    for (int c = 0; c < n; ++c)
      for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
          for (int j = i; j < n; ++j) {
            double v = ddh[c][k][i][j];
            for (int m = 0; m < n; ++m) {
              v -= dG0[c][m][k][i] * h[m][j] + G0[m][k][i] * dh[c][m][j];
              v -= dG0[c][m][k][j] * h[i][m] + G0[m][k][j] * dh[c][i][m];
            }
            PM[c][k][i][j] = v;
            PM[c][k][j][i] = v;
          }

    // M_l,db and its pointwise derivative dM_c,l,db
    double M[D][D][D], dM[D][D][D][D];
    for (int l = 0; l < n; ++l)
      for (int d = 0; d < n; ++d)
        for (int b = 0; b < n; ++b) {
          M[l][d][b] = Nh[d][b][l] + Nh[b][d][l] - Nh[l][d][b];
          for (int c = 0; c < n; ++c)
            dM[c][l][d][b] = PM[c][d][b][l] + PM[c][b][d][l] - PM[c][l][d][b];
        }

    // dGamma^a_{db} = 1/2 ginv^{al} M_l,db
    double dGam[D][D][D];
    for (int a = 0; a < n; ++a)
      for (int d = 0; d < n; ++d)
        for (int b = d; b < n; ++b) {
          double v = 0;
          for (int l = 0; l < n; ++l) v += gi[a][l] * M[l][d][b];
          v *= 0.5;
          dGam[a][d][b] = v;
          dGam[a][b][d] = v;
          dgamma_[(p * n + a) * S + sym_index(n, d, b)] = v;
        }

    // d_c ginv = -ginv (dg0 + Dh) ginv
    double dgi[D][D][D];
    for (int c = 0; c < n; ++c) {
      double dg[D][D];
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) dg[i][j] = bg.dg0(p, c, i, j) + dh[c][i][j];
      for (int a = 0; a < n; ++a)
        for (int l = 0; l < n; ++l) {
          double v = 0;
          for (int m = 0; m < n; ++m)
            for (int q = 0; q < n; ++q) v += gi[a][m] * dg[m][q] * gi[q][l];
          dgi[c][a][l] = -v;
        }
    }

    // d_c dGamma^a_{db} = 1/2 (dginv M + ginv dM)
    double ddGam[D][D][D][D];
    for (int c = 0; c < n; ++c)
      for (int a = 0; a < n; ++a)
        for (int d = 0; d < n; ++d)
          for (int b = d; b < n; ++b) {
            double v = 0;
            for (int l = 0; l < n; ++l)
              v += dgi[c][a][l] * M[l][d][b] + gi[a][l] * dM[c][l][d][b];
            v *= 0.5;
            ddGam[c][a][d][b] = v;
            ddGam[c][a][b][d] = v;
            ddgamma_[((p * n + c) * n + a) * S + sym_index(n, d, b)] = v;
          }

    // nabla0_c dGamma^a_{db}
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

    // data part of R^a_{bcd}; contract to the Ricci deviation
    double ric[D][D];
    for (int b = 0; b < n; ++b)
      for (int d = 0; d < n; ++d) {
        double v = 0;
        for (int a = 0; a < n; ++a) {
          double r = NdG[a][a][d][b] - NdG[d][a][a][b];
          for (int e = 0; e < n; ++e)
            r += dGam[a][a][e] * dGam[e][d][b] - dGam[a][d][e] * dGam[e][a][b];
          v += r;
        }
        ric[b][d] = v;
      }
    for (int b = 0; b < n; ++b)
      for (int d = b; d < n; ++d)
        dric_[p * S + sym_index(n, b, d)] = 0.5 * (ric[b][d] + ric[d][b]);

    if (!rud_data_.empty()) {
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
          for (int c = 0; c < n; ++c)
            for (int d = 0; d < n; ++d) {
              double v = NdG[c][a][d][b] - NdG[d][a][c][b];
              for (int e = 0; e < n; ++e)
                v += dGam[a][c][e] * dGam[e][d][b] - dGam[a][d][e] * dGam[e][c][b];
              rud_data_[((p * n + a) * n + b) * n * n + c * n + d] = v;
            }
    }
  }
}

void Geometry::ensure_riem_data() const {
  if (is_background_ || !rud_data_.empty()) return;
  auto* self = const_cast<Geometry*>(this);
  self->rud_data_.assign(grid_->num_nodes() * n() * n() * n() * n(), 0.0);
  self->build();
}

double Geometry::scalar_curv(std::int64_t p) const {
  const int n = grid_->n();
  double s = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) s += ginv(p, i, j) * ricci(p, i, j);
  return s;
}

double Geometry::riem_low(std::int64_t p, int i, int k, int j, int l) const {
  // lowered pattern R_{ikjl} = g_{ie} R^e_{kjl}; background part in closed
  // form plus g-weighted data and h-weighted background mixing
  const int n = grid_->n();
  double v = bg_->riem0_low(p, i, k, j, l);
  if (is_background_) return v;
  // h_{ie} R0^e_{kjl}: R0^e_{kjl} = g0^{ea} R0_{akjl}
  for (int e = 0; e < n; ++e) {
    const double r0ud = bg_->g0_inv(p, e, e) * bg_->riem0_low(p, e, k, j, l);
    v += h(p, i, e) * r0ud;
  }
  if (!rud_data_.empty()) {
    for (int e = 0; e < n; ++e)
      v += g(p, i, e) * rud_data_[((p * n + e) * n + k) * n * n + j * n + l];
  }
  return v;
}

Field Geometry::wdev_field() const {
  Field out(*grid_, Rank::sym2, Frame::physical);
  const int n = grid_->n();
  for (std::int64_t p = 0; p < grid_->num_nodes(); ++p) {
    if (grid_->is_exterior(p)) continue;
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) out.sym_at(p, i, j) = wdev(p, i, j);
  }
  return out;
}

Field Geometry::metric_field() const {
  Field out(*grid_, Rank::sym2, Frame::physical);
  const int n = grid_->n();
  for (std::int64_t p = 0; p < grid_->num_nodes(); ++p) {
    if (grid_->is_exterior(p)) continue;
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) out.sym_at(p, i, j) = g(p, i, j);
  }
  return out;
}

Field Geometry::h_physical() const {
  Field out(*grid_, Rank::sym2, Frame::physical);
  const int n = grid_->n();
  for (std::int64_t p = 0; p < grid_->num_nodes(); ++p) {
    if (grid_->is_exterior(p)) continue;
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) out.sym_at(p, i, j) = h(p, i, j);
  }
  return out;
}

Field Geometry::ricci_field() const {
  Field out(*grid_, Rank::sym2, Frame::physical);
  const int n = grid_->n();
  for (std::int64_t p = 0; p < grid_->num_nodes(); ++p) {
    if (grid_->is_exterior(p)) continue;
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) out.sym_at(p, i, j) = ricci(p, i, j);
  }
  return out;
}

Field Geometry::scalar_curv_field() const {
  Field out(*grid_, Rank::scalar, Frame::physical);
  for (std::int64_t p = 0; p < grid_->num_nodes(); ++p) {
    if (grid_->is_exterior(p)) continue;
    out.at(p, 0) = scalar_curv(p);
  }
  return out;
}

}  // namespace ahcc
