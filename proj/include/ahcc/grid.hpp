#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace ahcc {

// Node classification on the truncated ball |x| <= r_max inside [-r_max, r_max]^n.
enum class NodeClass : std::uint8_t { exterior = 0, collar = 1, interior = 2 };

constexpr int kMaxDim = 4;

// Cartesian grid over [-r_max, r_max]^n masked to the ball |x| <= r_max.
// Interior nodes carry centered stencils on every axis; collar nodes fall back
// to shifted (one-sided) stencils of the same order. Nodes inside the ball for
// which no admissible stencil window exists on some axis are demoted to
// exterior and take no part in any computation.
class Grid {
 public:
  Grid(int n, int points_per_axis, double r_max, int fd_order);

  int n() const { return n_; }
  int points_per_axis() const { return N_; }
  double r_max() const { return r_max_; }
  int fd_order() const { return order_; }
  double spacing() const { return h_; }
  std::int64_t num_nodes() const { return num_nodes_; }
  int stencil_size() const { return order_ + 1; }

  NodeClass node_class(std::int64_t p) const { return cls_[p]; }
  bool is_interior(std::int64_t p) const { return cls_[p] == NodeClass::interior; }
  bool is_exterior(std::int64_t p) const { return cls_[p] == NodeClass::exterior; }

  double coord(std::int64_t p, int axis) const {
    return coords_[multi_index(p, axis)];
  }
  void position(std::int64_t p, double* x) const {
    for (int a = 0; a < n_; ++a) x[a] = coord(p, a);
  }
  double radius2(std::int64_t p) const { return r2_[p]; }

  const std::vector<std::int64_t>& interior_nodes() const { return interior_; }
  std::int64_t num_interior() const { return static_cast<std::int64_t>(interior_.size()); }
  std::int64_t num_collar() const { return num_collar_; }
  std::int64_t num_demoted() const { return num_demoted_; }

  // Stencil table row for (node, axis): K neighbor flat indices and weights
  // (weights include the 1/h factor).
  const std::int64_t* stencil_nodes(std::int64_t p, int axis) const {
    return &sidx_[(p * n_ + axis) * stencil_size()];
  }
  const double* stencil_weights(std::int64_t p, int axis) const {
    return &scoef_[(p * n_ + axis) * stencil_size()];
  }

  // d/dx_axis of a C-component field at node p, component c.
  // f is laid out node-major, components fastest.
  double fd_partial(const double* f, int ncomp, std::int64_t p, int axis, int c) const {
    const std::int64_t* idx = stencil_nodes(p, axis);
    const double* w = stencil_weights(p, axis);
    double acc = 0.0;
    for (int k = 0; k < stencil_size(); ++k) acc += w[k] * f[idx[k] * ncomp + c];
    return acc;
  }

  int multi_index(std::int64_t p, int axis) const {
    return static_cast<int>((p / strides_[axis]) % N_);
  }

 private:
  void classify_and_build();

  int n_;
  int N_;
  double r_max_;
  int order_;
  double h_;
  std::int64_t num_nodes_;
  std::vector<double> coords_;           // per-axis 1D coordinates (size N)
  std::vector<double> r2_;               // |x|^2 per node
  std::array<std::int64_t, kMaxDim> strides_{};
  std::vector<NodeClass> cls_;
  std::vector<std::int64_t> interior_;
  std::int64_t num_collar_ = 0;
  std::int64_t num_demoted_ = 0;
  std::vector<std::int64_t> sidx_;
  std::vector<double> scoef_;
};

enum class BackgroundKind { poincare_ball, flat };

// Closed-form Poincare ball background: rho = (1-|x|^2)/2, g0 = delta/rho^2.
// All background geometry (Gamma0, dGamma0, curvature) is available in closed
// form; finite differences are reserved for perturbation data. The flat
// variant (g0 = delta, rho = 1) serves the textbook degeneration checks.
class BackgroundGeometry {
 public:
  explicit BackgroundGeometry(const Grid& grid,
                              BackgroundKind kind = BackgroundKind::poincare_ball);

  const Grid& grid() const { return *grid_; }
  int n() const { return grid_->n(); }
  BackgroundKind kind() const { return kind_; }
  bool flat() const { return kind_ == BackgroundKind::flat; }

  double rho(std::int64_t p) const { return rho_[p]; }
  const std::vector<double>& rho_all() const { return rho_; }

  double rho_at(const double* x) const {
    if (flat()) return 1.0;
    double r2 = 0;
    for (int a = 0; a < n(); ++a) r2 += x[a] * x[a];
    return 0.5 * (1.0 - r2);
  }

  // g0_ij = delta_ij / rho^2, inverse = rho^2 delta, sqrt(det g0) = rho^-n.
  double g0(std::int64_t p, int i, int j) const {
    return i == j ? 1.0 / (rho_[p] * rho_[p]) : 0.0;
  }
  double g0_inv(std::int64_t p, int i, int j) const {
    return i == j ? rho_[p] * rho_[p] : 0.0;
  }
  double sqrt_det_g0(std::int64_t p) const { return sqrt_det_g0_[p]; }

  // dphi_i = x_i / rho with phi = log(2/(1-|x|^2)); Gamma0^k_ij =
  // d^k_i dphi_j + d^k_j dphi_i - delta_ij dphi^k (conformally flat form).
  double dphi(std::int64_t p, int i) const {
    return flat() ? 0.0 : grid_->coord(p, i) / rho_[p];
  }
  double gamma0(std::int64_t p, int k, int i, int j) const {
    double v = 0.0;
    if (k == i) v += dphi(p, j);
    if (k == j) v += dphi(p, i);
    if (i == j) v -= dphi(p, k);
    return v;
  }
  // d_c dphi_i = (delta_ci rho + x_i x_c)/rho^2
  double ddphi(std::int64_t p, int c, int i) const {
    if (flat()) return 0.0;
    const double r = rho_[p];
    return ((c == i ? r : 0.0) + grid_->coord(p, i) * grid_->coord(p, c)) / (r * r);
  }
  double dgamma0(std::int64_t p, int c, int k, int i, int j) const {
    double v = 0.0;
    if (k == i) v += ddphi(p, c, j);
    if (k == j) v += ddphi(p, c, i);
    if (i == j) v -= ddphi(p, c, k);
    return v;
  }
  // d_c g0_ij = delta_ij 2 x_c / rho^3
  double dg0(std::int64_t p, int c, int i, int j) const {
    if (flat() || i != j) return 0.0;
    const double r = rho_[p];
    return 2.0 * grid_->coord(p, c) / (r * r * r);
  }

  // Constant-curvature (K = -1) lowered Riemann in the index pattern
  // R_{ikjl} = -(g0_ij g0_kl - g0_il g0_kj); Ric0 = -(n-1) g0.
  double riem0_low(std::int64_t p, int i, int k, int j, int l) const {
    if (flat()) return 0.0;
    return -(g0(p, i, j) * g0(p, k, l) - g0(p, i, l) * g0(p, k, j));
  }
  double ric0(std::int64_t p, int i, int j) const {
    return flat() ? 0.0 : -(n() - 1) * g0(p, i, j);
  }
  double scalar0() const {
    return flat() ? 0.0 : -static_cast<double>(n()) * (n() - 1);
  }

 private:
  const Grid* grid_;
  BackgroundKind kind_;
  std::vector<double> rho_;
  std::vector<double> sqrt_det_g0_;
};

}  // namespace ahcc
