#pragma once

#include <memory>
#include <optional>

#include "ahcc/field.hpp"
#include "ahcc/grid.hpp"

namespace ahcc {

// Full geometry of g = g0 + h assembled by background split: background
// quantities are closed-form, finite differences act only on the perturbation.
// Curvature follows the connection-deviation identity
//   R(g)^a_{bcd} = R0^a_{bcd} + nabla0_c dG^a_{db} - nabla0_d dG^a_{cb}
//                  + dG^a_{ce} dG^e_{db} - dG^a_{de} dG^e_{cb},
// with dG^k_ij = 1/2 g^{kl} (nabla0_i h_jl + nabla0_j h_il - nabla0_l h_ij).
// The derivative of dG entering nabla0 dG is assembled by the product rule, so
// no finite difference ever lands on a background-weighted product.
class Geometry {
 public:
  // hbar: rescaled perturbation (may be empty => background geometry).
  Geometry(const Grid& grid, const BackgroundGeometry& bg, const Field* hbar);

  const Grid& grid() const { return *grid_; }
  const BackgroundGeometry& background() const { return *bg_; }
  int n() const { return grid_->n(); }
  bool is_background() const { return is_background_; }

  // physical perturbation and metric, packed symmetric
  double h(std::int64_t p, int i, int j) const {
    return is_background_ ? 0.0 : hphys_[p * S_ + sym_index(n(), i, j)];
  }
  double g(std::int64_t p, int i, int j) const { return bg_->g0(p, i, j) + h(p, i, j); }
  double ginv(std::int64_t p, int i, int j) const {
    return is_background_ ? bg_->g0_inv(p, i, j) : ginv_[p * S_ + sym_index(n(), i, j)];
  }
  double sqrt_det_g(std::int64_t p) const {
    return is_background_ ? bg_->sqrt_det_g0(p) : sqrt_det_g_[p];
  }

  // connection: Gamma^k_ij = Gamma0 (closed form) + dGamma (data)
  double dgamma(std::int64_t p, int k, int i, int j) const {
    return is_background_ ? 0.0 : dgamma_[(p * n() + k) * S_ + sym_index(n(), i, j)];
  }
  double gamma(std::int64_t p, int k, int i, int j) const {
    return bg_->gamma0(p, k, i, j) + dgamma(p, k, i, j);
  }
  // pointwise d_c Gamma^a_{db} = dGamma0 (closed form) + product-rule data
  double dgamma_deriv(std::int64_t p, int c, int a, int d, int b) const {
    const double bgv = bg_->dgamma0(p, c, a, d, b);
    if (is_background_) return bgv;
    return bgv + ddgamma_[((p * n() + c) * n() + a) * S_ + sym_index(n(), d, b)];
  }

  // curvature bundle (split): Ric = Ric0 + dric, R = tr_g Ric
  double dric(std::int64_t p, int i, int j) const {
    return is_background_ ? 0.0 : dric_[p * S_ + sym_index(n(), i, j)];
  }
  double ricci(std::int64_t p, int i, int j) const {
    return bg_->ric0(p, i, j) + dric(p, i, j);
  }
  double scalar_curv(std::int64_t p) const;

  // Einstein deviation W = Ric(g) + (n-1) g = dric + (n-1) h (pure data)
  double wdev(std::int64_t p, int i, int j) const {
    return dric(p, i, j) + (n() - 1) * h(p, i, j);
  }
  Field wdev_field() const;

  // nabla0_k h_ij (data, used by the gauge source and dGamma assembly)
  double nabla0_h(std::int64_t p, int k, int i, int j) const {
    return is_background_ ? 0.0 : nh_[(p * n() + k) * S_ + sym_index(n(), i, j)];
  }

  // lowered Riemann in the pattern R_{ikjl} (paper's (Riem u) contraction),
  // split into closed-form background part plus data.
  double riem_low(std::int64_t p, int i, int k, int j, int l) const;

  // Physical-component accessor fields (copies; for file export and checks).
  Field metric_field() const;
  Field h_physical() const;
  Field ricci_field() const;
  Field scalar_curv_field() const;

  // ensure rud data (P*n^4) exists for Riem-action on perturbed metrics
  void ensure_riem_data() const;

 private:
  void build();

  const Grid* grid_;
  const BackgroundGeometry* bg_;
  bool is_background_;
  int S_;
  std::vector<double> hphys_;    // P*S
  std::vector<double> ginv_;     // P*S
  std::vector<double> sqrt_det_g_;
  std::vector<double> nh_;       // P*n*S
  std::vector<double> dgamma_;   // P*n*S
  std::vector<double> ddgamma_;  // P*n*n*S  d_c dGamma^a_{db}
  std::vector<double> dric_;     // P*S
  mutable std::vector<double> rud_data_;  // P*n^4 (lazy) data part of R^a_{bcd}
};

// SPD failure diagnostics carry the offending node.
struct NonSpdError : std::runtime_error {
  std::int64_t node;
  explicit NonSpdError(std::int64_t p)
      : std::runtime_error("metric not positive definite at node " + std::to_string(p)),
        node(p) {}
};

}  // namespace ahcc
