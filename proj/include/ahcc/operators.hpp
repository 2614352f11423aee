#pragma once

#include "ahcc/field.hpp"
#include "ahcc/geometry.hpp"
#include "ahcc/grid.hpp"

namespace ahcc {

// Bundles one consistent geometry; every operator evaluates against it.
struct OperatorContext {
  const Grid& grid;
  const BackgroundGeometry& bg;
  const Geometry& geo;

  OperatorContext(const Geometry& g)
      : grid(g.grid()), bg(g.background()), geo(g) {}
};

// --- first-derivative operators (FD acts on the operand's components) ------

// (nabla w)_{k i} = d_k w_i - Gamma^m_{ki} w_m ; layout P*n*n, k slow
std::vector<double> cov_deriv_oneform(const OperatorContext& ctx, const Field& w);

// (nabla u)_{k ij}; layout P*n*S (ij packed)
std::vector<double> cov_deriv_sym2(const OperatorContext& ctx, const Field& u);

// (div u)_i = -g^{jk} nabla_k u_{ji}
Field divergence_sym2(const OperatorContext& ctx, const Field& u);

// d* w = -g^{ik} nabla_k w_i
Field codifferential(const OperatorContext& ctx, const Field& w);

// (L w)_ij = (nabla_i w_j + nabla_j w_i)/2
Field killing_sym(const OperatorContext& ctx, const Field& w);

// Lring w = L w + (1/n)(d* w) g
Field conformal_killing(const OperatorContext& ctx, const Field& w);

// B_g(u) = div_g u + 1/2 d(tr_g u)
Field gauge_B(const OperatorContext& ctx, const Field& u);

// B_g(g0) evaluated through the exact linearity identity B_g(g0) = -B_g(h)
// (B_g(g) vanishes identically); finite differences act on h only.
Field gauge_source(const OperatorContext& ctx);

// --- second-derivative operators (expanded: FD only on the operand, with
//     pointwise Gamma and dGamma values) --------------------------------

// rough Laplacian, positive convention: flat-space Delta f = -sum d^2 f
Field laplacian(const OperatorContext& ctx, const Field& f);

// Lichnerowicz: Delta_L u = Delta u + 2(Ric u - Riem u)
Field lichnerowicz(const OperatorContext& ctx, const Field& u);

// Delta w - Ric.w  (one-forms), the Proposition-3.1 operator
Field vector_laplacian(const OperatorContext& ctx, const Field& w);

// div(Lring w) assembled atomically from expanded second derivatives
Field div_conf_killing(const OperatorContext& ctx, const Field& w);

// 2 B_g(L_g w) assembled atomically (identity-check left-hand side)
Field two_gaugeB_killing(const OperatorContext& ctx, const Field& w);

// pointwise curvature actions entering Delta_L
// (Ric u)_ij = 1/2 (Ric_ik u^k_j + Ric_jk u^k_i); (Riem u)_ij = R_ikjl u^{kl}
void curvature_action(const OperatorContext& ctx, const Field& u, Field& ric_u,
                      Field& riem_u);

}  // namespace ahcc
