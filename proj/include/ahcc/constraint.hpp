#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "ahcc/field.hpp"
#include "ahcc/geometry.hpp"
#include "ahcc/operators.hpp"

namespace ahcc {

enum class SourceProfile { rho_power, gaussian_bump };

struct SourceRecipe {
  SourceProfile profile = SourceProfile::rho_power;
  double amplitude = 1e-3;     // eps
  double decay = 1.5;          // s_T (rho_power)
  double width = 0.25;         // sigma (gaussian_bump)
  std::uint64_t seed = 1;
};

struct SourceTensor {
  SourceRecipe recipe;
  Field T;  // physical-flagged sym2
};

SourceTensor make_source(const SourceRecipe& recipe, const Grid& grid,
                         const BackgroundGeometry& bg);

// Unknowns in rescaled components, Dirichlet-zero at every non-interior node.
struct ConstraintState {
  Field hbar;   // rescaled sym2
  Field xibar;  // rescaled one-form

  ConstraintState() = default;
  ConstraintState(const Grid& grid)
      : hbar(grid, Rank::sym2, Frame::rescaled),
        xibar(grid, Rank::one_form, Frame::rescaled) {}

  bool dirichlet_ok() const;
  void enforce_dirichlet();
};

struct ResidualPair {
  Field E1;  // physical sym2
  Field E2;  // physical one-form
  int derivative_passes = 2;

  ResidualPair() = default;
  ResidualPair(const Grid& grid)
      : E1(grid, Rank::sym2, Frame::physical),
        E2(grid, Rank::one_form, Frame::physical) {}
};

// S = T - (1/n) tr_g(T) g + Lring_g(xi)
Field source_S(const OperatorContext& ctx, const Field& T_phys, const Field& xi_phys);

// Gauge-broken residual:
//   E1 = Ric(g) + (n-1) g - L_g(B_g(g0)) - S,   E2 = div_g S,
// with g = g0 + h. Assembled in background-split form, so E1 =
// Wdev - L_g(omega) - S with omega = B_g(g0) = -B_g(h); F(0,0,0) = 0 exactly.
// If geo_out is non-null it receives the geometry used.
ResidualPair residual_gauged(const ConstraintState& state, const Field& T_phys,
                             const BackgroundGeometry& bg,
                             std::shared_ptr<Geometry>* geo_out = nullptr);

// Same system without the gauge term.
ResidualPair residual_ungauged(const ConstraintState& state, const Field& T_phys,
                               const BackgroundGeometry& bg,
                               std::shared_ptr<Geometry>* geo_out = nullptr);

// The paper's block linearization at the origin, composed from the operator
// library over the background geometry:
//   row1 = 1/2 Delta_L dh + (n-1) dh - Lring dxi,   row2 = div(Lring dxi).
ResidualPair linearized_apply(const OperatorContext& ctx0, const Field& dh_phys,
                              const Field& dxi_phys);

// Exact Frechet derivative of the discrete residual pipeline at
// (h, xi, T) = (0, 0, 0); the solver's fixed background slope L0.
ResidualPair origin_jacobian_apply(const BackgroundGeometry& bg, const Field& dhbar,
                                   const Field& dxibar);

// Central-difference directional derivative of the gauge-broken residual.
ResidualPair numeric_jacobian_apply(const ConstraintState& state0, const Field& T_phys,
                                    const BackgroundGeometry& bg, const Field& dhbar,
                                    const Field& dxibar, double step);

// Degrees of freedom: interior nodes x (sym2 + one-form) components, blocked
// [all hbar | all xibar].
std::int64_t dof_count(const Grid& grid);
std::vector<double> pack(const ConstraintState& state);
ConstraintState unpack(const Grid& grid, const std::vector<double>& v);

// Residual packing used by the linear solves: rows are weighted so the packed
// l2 norm is commensurate with the rho^{-s} weighted sup norm
// (rho^{2-s} per sym2 row, rho^{1-s} per one-form row).
std::vector<double> pack_residual(const ResidualPair& r, const BackgroundGeometry& bg,
                                  double s);

// Weighted sup norm of a residual pair (max of the two blocks).
double residual_wnorm(const ResidualPair& r, const BackgroundGeometry& bg, double s);

}  // namespace ahcc
