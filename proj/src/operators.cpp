#include "ahcc/operators.hpp"

#include <cstring>

namespace ahcc {

namespace {

constexpr int D = kMaxDim;

struct NodeGeom {
  double G[D][D][D];
  double dG[D][D][D][D];
  double gi[D][D];

  void load(const OperatorContext& ctx, std::int64_t p, bool with_deriv) {
    const int n = ctx.grid.n();
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) G[k][i][j] = ctx.geo.gamma(p, k, i, j);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) gi[i][j] = ctx.geo.ginv(p, i, j);
    if (with_deriv)
      for (int c = 0; c < n; ++c)
        for (int a = 0; a < n; ++a)
          for (int d = 0; d < n; ++d)
            for (int b = 0; b < n; ++b)
              dG[c][a][d][b] = ctx.geo.dgamma_deriv(p, c, a, d, b);
  }
};

void require_physical(const Field& f, const char* op) {
  if (f.frame() != Frame::physical)
    throw std::invalid_argument(std::string(op) + ": physical-flagged field required");
}

// cached first FD pass of a C-component field over non-exterior nodes
std::vector<double> fd_all(const Grid& grid, const double* f, int C) {
  const std::int64_t P = grid.num_nodes();
  std::vector<double> out(P * grid.n() * C, 0.0);
  for (std::int64_t p = 0; p < P; ++p) {
    if (grid.is_exterior(p)) continue;
    for (int a = 0; a < grid.n(); ++a)
      for (int c = 0; c < C; ++c)
        out[(p * grid.n() + a) * C + c] = grid.fd_partial(f, C, p, a, c);
  }
  return out;
}

// Expanded second covariant derivative at a node. T given by per-node full
// component array (rank 1: T[i]; rank 2: T[i][j]); DT = cached first pass.
// Produces W[c][k][I] = nabla_c nabla_k T_I.
struct SecondCovd {
  const Grid& grid;
  const NodeGeom& ng;
  int n, rank, C;
  const double* T;        // full comps at node p (rank1: n, rank2: n*n)
  const double* DTrow;    // DT at node p: (n, C_packed) packed comps
  // gathers DT rows at stencil neighbors for DDT
  const std::vector<double>& DT;
  std::int64_t p;

  // packed accessors for operand component arrays
  static int pidx1(int n, int i) { return i; }

  double ddT(int c, int k, int i, int j) const {  // rank2
    const int S = sym_count(n);
    const std::int64_t* idx = grid.stencil_nodes(p, c);
    const double* w = grid.stencil_weights(p, c);
    double acc = 0;
    const int comp = k * S + sym_index(n, i, j);
    for (int m = 0; m < grid.stencil_size(); ++m)
      acc += w[m] * DT[idx[m] * n * S + comp];
    return acc;
  }
  double ddT1(int c, int k, int i) const {  // rank1
    const std::int64_t* idx = grid.stencil_nodes(p, c);
    const double* w = grid.stencil_weights(p, c);
    double acc = 0;
    const int comp = k * n + i;
    for (int m = 0; m < grid.stencil_size(); ++m)
      acc += w[m] * DT[idx[m] * n * n + comp];
    return acc;
  }
};

}  // namespace

std::vector<double> cov_deriv_oneform(const OperatorContext& ctx, const Field& w) {
  require_physical(w, "cov_deriv_oneform");
  const Grid& grid = ctx.grid;
  const int n = grid.n();
  const std::int64_t P = grid.num_nodes();
  std::vector<double> out(P * n * n, 0.0);
  NodeGeom ng;
  for (std::int64_t p = 0; p < P; ++p) {
    if (grid.is_exterior(p)) continue;
    ng.load(ctx, p, false);
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i) {
        double v = grid.fd_partial(w.data(), n, p, k, i);
        for (int m = 0; m < n; ++m) v -= ng.G[m][k][i] * w.at(p, m);
        out[(p * n + k) * n + i] = v;
      }
  }
  return out;
}

std::vector<double> cov_deriv_sym2(const OperatorContext& ctx, const Field& u) {
  require_physical(u, "cov_deriv_sym2");
  const Grid& grid = ctx.grid;
  const int n = grid.n();
  const int S = sym_count(n);
  const std::int64_t P = grid.num_nodes();
  std::vector<double> out(P * n * S, 0.0);
  NodeGeom ng;
  for (std::int64_t p = 0; p < P; ++p) {
    if (grid.is_exterior(p)) continue;
    ng.load(ctx, p, false);
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
          double v = grid.fd_partial(u.data(), S, p, k, sym_index(n, i, j));
          for (int m = 0; m < n; ++m)
            v -= ng.G[m][k][i] * u.sym_at(p, m, j) + ng.G[m][k][j] * u.sym_at(p, i, m);
          out[(p * n + k) * S + sym_index(n, i, j)] = v;
        }
  }
  return out;
}

Field divergence_sym2(const OperatorContext& ctx, const Field& u) {
  auto nu = cov_deriv_sym2(ctx, u);
  const Grid& grid = ctx.grid;
  const int n = grid.n();
  const int S = sym_count(n);
  Field out(grid, Rank::one_form, Frame::physical);
  for (std::int64_t p = 0; p < grid.num_nodes(); ++p) {
    if (grid.is_exterior(p)) continue;
    for (int i = 0; i < n; ++i) {
      double v = 0;
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          v += ctx.geo.ginv(p, j, k) * nu[(p * n + k) * S + sym_index(n, j, i)];
      out.at(p, i) = -v;
    }
  }
  return out;
}

Field codifferential(const OperatorContext& ctx, const Field& w) {
  auto nw = cov_deriv_oneform(ctx, w);
  const Grid& grid = ctx.grid;
  const int n = grid.n();
  Field out(grid, Rank::scalar, Frame::physical);
  for (std::int64_t p = 0; p < grid.num_nodes(); ++p) {
    if (grid.is_exterior(p)) continue;
    double v = 0;
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k)
        v += ctx.geo.ginv(p, i, k) * nw[(p * n + k) * n + i];
    out.at(p, 0) = -v;
  }
  return out;
}

Field killing_sym(const OperatorContext& ctx, const Field& w) {
  auto nw = cov_deriv_oneform(ctx, w);
  const Grid& grid = ctx.grid;
  const int n = grid.n();
  Field out(grid, Rank::sym2, Frame::physical);
  for (std::int64_t p = 0; p < grid.num_nodes(); ++p) {
    if (grid.is_exterior(p)) continue;
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j)
        out.sym_at(p, i, j) =
            0.5 * (nw[(p * n + i) * n + j] + nw[(p * n + j) * n + i]);
  }
  return out;
}

Field conformal_killing(const OperatorContext& ctx, const Field& w) {
  auto nw = cov_deriv_oneform(ctx, w);
  const Grid& grid = ctx.grid;
  const int n = grid.n();
  Field out(grid, Rank::sym2, Frame::physical);
  for (std::int64_t p = 0; p < grid.num_nodes(); ++p) {
    if (grid.is_exterior(p)) continue;
    double ds = 0;  // d*w = -g^{ik} nabla_k w_i
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k)
        ds += ctx.geo.ginv(p, i, k) * nw[(p * n + k) * n + i];
    ds = -ds;
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j)
        out.sym_at(p, i, j) =
            0.5 * (nw[(p * n + i) * n + j] + nw[(p * n + j) * n + i]) +
            ds / n * ctx.geo.g(p, i, j);
  }
  return out;
}

Field gauge_B(const OperatorContext& ctx, const Field& u) {
  const Grid& grid = ctx.grid;
  const int n = grid.n();
  Field dv = divergence_sym2(ctx, u);
  // tr_g u as a scalar field, then half its gradient
  std::vector<double> tr(grid.num_nodes(), 0.0);
  for (std::int64_t p = 0; p < grid.num_nodes(); ++p) {
    if (grid.is_exterior(p)) continue;
    double v = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) v += ctx.geo.ginv(p, i, j) * u.sym_at(p, i, j);
    tr[p] = v;
  }
  Field out(grid, Rank::one_form, Frame::physical);
  for (std::int64_t p = 0; p < grid.num_nodes(); ++p) {
    if (grid.is_exterior(p)) continue;
    for (int i = 0; i < n; ++i)
      out.at(p, i) = dv.at(p, i) + 0.5 * grid.fd_partial(tr.data(), 1, p, i, 0);
  }
  return out;
}

Field gauge_source(const OperatorContext& ctx) {
  const Grid& grid = ctx.grid;
  Field out(grid, Rank::one_form, Frame::physical);
  if (ctx.geo.is_background()) return out;  // B_{g0}(g0) = 0 exactly
  Field h = ctx.geo.h_physical();
  Field bh = gauge_B(ctx, h);
  for (std::int64_t p = 0; p < grid.num_nodes(); ++p)
    for (int i = 0; i < grid.n(); ++i) out.at(p, i) = -bh.at(p, i);
  return out;
}

namespace {

// shared expanded-second-derivative driver for one-forms
// cb(p, n2w) with n2w[c][k][i] = nabla_c nabla_k w_i
template <typename CB>
void second_covd_oneform(const OperatorContext& ctx, const Field& w, CB&& cb) {
  const Grid& grid = ctx.grid;
  const int n = grid.n();
  const std::int64_t P = grid.num_nodes();
  std::vector<double> DT = fd_all(grid, w.data(), n);  // DT[p][k][i] = d_k w_i
  NodeGeom ng;
  for (std::int64_t p = 0; p < P; ++p) {
    if (grid.is_exterior(p)) continue;
    ng.load(ctx, p, true);
    double Wv[D], DTv[D][D], NT[D][D];
    for (int i = 0; i < n; ++i) Wv[i] = w.at(p, i);
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i) {
        DTv[k][i] = DT[(p * n + k) * n + i];
        double v = DTv[k][i];
        for (int m = 0; m < n; ++m) v -= ng.G[m][k][i] * Wv[m];
        NT[k][i] = v;
      }
    double n2w[D][D][D];
    const int K = grid.stencil_size();
    for (int c = 0; c < n; ++c) {
      const std::int64_t* idx = grid.stencil_nodes(p, c);
      const double* wt = grid.stencil_weights(p, c);
      for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i) {
          double ddt = 0;
          for (int m = 0; m < K; ++m) ddt += wt[m] * DT[(idx[m] * n + k) * n + i];
          double v = ddt;
          for (int m = 0; m < n; ++m) {
            v -= ng.dG[c][m][k][i] * Wv[m] + ng.G[m][k][i] * DTv[c][m];
            v -= ng.G[m][c][k] * NT[m][i];
            v -= ng.G[m][c][i] * NT[k][m];
          }
          n2w[c][k][i] = v;
        }
    }
    cb(p, ng, n2w);
  }
}

// same driver for symmetric 2-tensors: n2u[c][k][i][j]
template <typename CB>
void second_covd_sym2(const OperatorContext& ctx, const Field& u, CB&& cb) {
  const Grid& grid = ctx.grid;
  const int n = grid.n();
  const int S = sym_count(n);
  const std::int64_t P = grid.num_nodes();
  std::vector<double> DT = fd_all(grid, u.data(), S);
  NodeGeom ng;
  for (std::int64_t p = 0; p < P; ++p) {
    if (grid.is_exterior(p)) continue;
    ng.load(ctx, p, true);
    double Uv[D][D], DTv[D][D][D], NT[D][D][D];
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) Uv[i][j] = u.sym_at(p, i, j);
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          DTv[k][i][j] = DT[(p * n + k) * S + sym_index(n, i, j)];
          double v = DTv[k][i][j];
          for (int m = 0; m < n; ++m)
            v -= ng.G[m][k][i] * Uv[m][j] + ng.G[m][k][j] * Uv[i][m];
          NT[k][i][j] = v;
        }
    double n2u[D][D][D][D];
    const int K = grid.stencil_size();
    for (int c = 0; c < n; ++c) {
      const std::int64_t* idx = grid.stencil_nodes(p, c);
      const double* wt = grid.stencil_weights(p, c);
      for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) {
            double ddt = 0;
            const int comp = k * S + sym_index(n, i, j);
            for (int m = 0; m < K; ++m) ddt += wt[m] * DT[idx[m] * n * S + comp];
            double v = ddt;
            for (int m = 0; m < n; ++m) {
              v -= ng.dG[c][m][k][i] * Uv[m][j] + ng.G[m][k][i] * DTv[c][m][j];
              v -= ng.dG[c][m][k][j] * Uv[i][m] + ng.G[m][k][j] * DTv[c][i][m];
              v -= ng.G[m][c][k] * NT[m][i][j];
              v -= ng.G[m][c][i] * NT[k][m][j];
              v -= ng.G[m][c][j] * NT[k][i][m];
            }
            n2u[c][k][i][j] = v;
          }
    }
    cb(p, ng, n2u);
  }
}

}  // namespace

Field laplacian(const OperatorContext& ctx, const Field& f) {
  require_physical(f, "laplacian");
  const Grid& grid = ctx.grid;
  const int n = grid.n();
  Field out(grid, f.rank(), Frame::physical);
  if (f.rank() == Rank::scalar) {
    // Delta f = -g^{ck}(DD f - Gamma^m_{ck} D_m f)
    std::vector<double> DT = fd_all(grid, f.data(), 1);
    NodeGeom ng;
    for (std::int64_t p = 0; p < grid.num_nodes(); ++p) {
      if (grid.is_exterior(p)) continue;
      ng.load(ctx, p, false);
      const int K = grid.stencil_size();
      double acc = 0;
      for (int c = 0; c < n; ++c) {
        const std::int64_t* idx = grid.stencil_nodes(p, c);
        const double* wt = grid.stencil_weights(p, c);
        for (int k = 0; k < n; ++k) {
          double ddt = 0;
          for (int m = 0; m < K; ++m) ddt += wt[m] * DT[idx[m] * n + k];
          double v = ddt;
          for (int m = 0; m < n; ++m) v -= ng.G[m][c][k] * DT[p * n + m];
          acc += ng.gi[c][k] * v;
        }
      }
      out.at(p, 0) = -acc;
    }
  } else if (f.rank() == Rank::one_form) {
    second_covd_oneform(ctx, f, [&](std::int64_t p, const NodeGeom& ng, double n2w[D][D][D]) {
      for (int i = 0; i < n; ++i) {
        double acc = 0;
        for (int c = 0; c < n; ++c)
          for (int k = 0; k < n; ++k) acc += ng.gi[c][k] * n2w[c][k][i];
        out.at(p, i) = -acc;
      }
    });
  } else {
    second_covd_sym2(ctx, f, [&](std::int64_t p, const NodeGeom& ng, double n2u[D][D][D][D]) {
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
          double acc = 0;
          for (int c = 0; c < n; ++c)
            for (int k = 0; k < n; ++k) acc += ng.gi[c][k] * n2u[c][k][i][j];
          out.sym_at(p, i, j) = -acc;
        }
    });
  }
  return out;
}

void curvature_action(const OperatorContext& ctx, const Field& u, Field& ric_u,
                      Field& riem_u) {
  const Grid& grid = ctx.grid;
  const int n = grid.n();
  if (!ctx.geo.is_background()) ctx.geo.ensure_riem_data();
  for (std::int64_t p = 0; p < grid.num_nodes(); ++p) {
    if (grid.is_exterior(p)) continue;
    double uud[D][D];  // u^k_j = g^{kl} u_lj
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j) {
        double v = 0;
        for (int l = 0; l < n; ++l) v += ctx.geo.ginv(p, k, l) * u.sym_at(p, l, j);
        uud[k][j] = v;
      }
    double uu[D][D];  // u^{kl}
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n; ++l) {
        double v = 0;
        for (int j = 0; j < n; ++j) v += ctx.geo.ginv(p, l, j) * uud[k][j];
        uu[k][l] = v;
      }
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        double rv = 0;
        for (int k = 0; k < n; ++k)
          rv += ctx.geo.ricci(p, i, k) * uud[k][j] + ctx.geo.ricci(p, j, k) * uud[k][i];
        ric_u.sym_at(p, i, j) = 0.5 * rv;
        double mv = 0;
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l)
            mv += ctx.geo.riem_low(p, i, k, j, l) * uu[k][l];
        riem_u.sym_at(p, i, j) = mv;
      }
  }
}

Field lichnerowicz(const OperatorContext& ctx, const Field& u) {
  Field lap = laplacian(ctx, u);
  Field ric_u(ctx.grid, Rank::sym2, Frame::physical);
  Field riem_u(ctx.grid, Rank::sym2, Frame::physical);
  curvature_action(ctx, u, ric_u, riem_u);
  const int S = sym_count(ctx.grid.n());
  for (std::int64_t p = 0; p < ctx.grid.num_nodes(); ++p) {
    if (ctx.grid.is_exterior(p)) continue;
    for (int c = 0; c < S; ++c)
      lap.at(p, c) += 2.0 * (ric_u.at(p, c) - riem_u.at(p, c));
  }
  return lap;
}

Field vector_laplacian(const OperatorContext& ctx, const Field& w) {
  require_physical(w, "vector_laplacian");
  const Grid& grid = ctx.grid;
  const int n = grid.n();
  Field out(grid, Rank::one_form, Frame::physical);
  second_covd_oneform(ctx, w, [&](std::int64_t p, const NodeGeom& ng, double n2w[D][D][D]) {
    for (int j = 0; j < n; ++j) {
      double acc = 0;
      for (int c = 0; c < n; ++c)
        for (int k = 0; k < n; ++k) acc += ng.gi[c][k] * n2w[c][k][j];
      double ric = 0;  // (Ric.w)_j = g^{kl} Ric_jl w_k
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l)
          ric += ng.gi[k][l] * ctx.geo.ricci(p, j, l) * w.at(p, k);
      out.at(p, j) = -acc - ric;
    }
  });
  return out;
}

Field div_conf_killing(const OperatorContext& ctx, const Field& w) {
  require_physical(w, "div_conf_killing");
  const Grid& grid = ctx.grid;
  const int n = grid.n();
  // d* w as pointwise data for the trace part
  Field ds = codifferential(ctx, w);
  Field out(grid, Rank::one_form, Frame::physical);
  second_covd_oneform(ctx, w, [&](std::int64_t p, const NodeGeom& ng, double n2w[D][D][D]) {
    for (int i = 0; i < n; ++i) {
      double acc = 0;
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          acc += ng.gi[j][k] * (n2w[k][j][i] + n2w[k][i][j]);
      out.at(p, i) = -0.5 * acc - (1.0 / n) * grid.fd_partial(ds.data(), 1, p, i, 0);
    }
  });
  return out;
}

Field two_gaugeB_killing(const OperatorContext& ctx, const Field& w) {
  require_physical(w, "two_gaugeB_killing");
  const Grid& grid = ctx.grid;
  const int n = grid.n();
  // tr_g(L w) = g^{jk} nabla_j w_k as pointwise data
  auto nw = cov_deriv_oneform(ctx, w);
  std::vector<double> tr(grid.num_nodes(), 0.0);
  for (std::int64_t p = 0; p < grid.num_nodes(); ++p) {
    if (grid.is_exterior(p)) continue;
    double v = 0;
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        v += ctx.geo.ginv(p, j, k) * nw[(p * n + j) * n + k];
    tr[p] = v;
  }
  Field out(grid, Rank::one_form, Frame::physical);
  second_covd_oneform(ctx, w, [&](std::int64_t p, const NodeGeom& ng, double n2w[D][D][D]) {
    for (int i = 0; i < n; ++i) {
      double acc = 0;
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          acc += ng.gi[j][k] * (n2w[k][j][i] + n2w[k][i][j]);
      out.at(p, i) = -acc + grid.fd_partial(tr.data(), 1, p, i, 0);
    }
  });
  return out;
}

}  // namespace ahcc
