#include "ahcc/grid.hpp"

#include <cmath>

namespace ahcc {
namespace {

// First-derivative weights over window offsets (shift-R .. shift+R), unit h.
// Order 4, shifts 0, +-1, +-2 (fully one-sided at +-2).
const double kW4[5][5] = {
    {3.0 / 12, -16.0 / 12, 36.0 / 12, -48.0 / 12, 25.0 / 12},   // shift -2
    {-1.0 / 12, 6.0 / 12, -18.0 / 12, 10.0 / 12, 3.0 / 12},     // shift -1
    {1.0 / 12, -8.0 / 12, 0.0, 8.0 / 12, -1.0 / 12},            // centered
    {-3.0 / 12, -10.0 / 12, 18.0 / 12, -6.0 / 12, 1.0 / 12},    // shift +1
    {-25.0 / 12, 48.0 / 12, -36.0 / 12, 16.0 / 12, -3.0 / 12},  // shift +2
};
const double kW2[3][3] = {
    {1.0 / 2, -4.0 / 2, 3.0 / 2},    // shift -1
    {-1.0 / 2, 0.0, 1.0 / 2},        // centered
    {-3.0 / 2, 4.0 / 2, -1.0 / 2},   // shift +1
};

}  // namespace

Grid::Grid(int n, int points_per_axis, double r_max, int fd_order)
    : n_(n), N_(points_per_axis), r_max_(r_max), order_(fd_order) {
  if (n < 2 || n > kMaxDim) throw std::invalid_argument("grid: dimension must be in [2,4]");
  if (N_ < 9) throw std::invalid_argument("grid: points_per_axis must be >= 9");
  if (N_ % 2 == 0) throw std::invalid_argument("grid: points_per_axis must be odd");
  if (!(r_max_ > 0.0 && r_max_ < 1.0)) throw std::invalid_argument("grid: r_max must be in (0,1)");
  if (order_ != 2 && order_ != 4) throw std::invalid_argument("grid: fd_order must be 2 or 4");

  h_ = 2.0 * r_max_ / (N_ - 1);
  coords_.resize(N_);
  for (int i = 0; i < N_; ++i) coords_[i] = -r_max_ + i * h_;
  coords_[(N_ - 1) / 2] = 0.0;  // exact origin

  num_nodes_ = 1;
  for (int a = 0; a < n_; ++a) num_nodes_ *= N_;
  strides_[n_ - 1] = 1;
  for (int a = n_ - 2; a >= 0; --a) strides_[a] = strides_[a + 1] * N_;

  r2_.resize(num_nodes_);
  for (std::int64_t p = 0; p < num_nodes_; ++p) {
    double s = 0;
    for (int a = 0; a < n_; ++a) {
      double x = coords_[multi_index(p, a)];
      s += x * x;
    }
    r2_[p] = s;
  }
  classify_and_build();
}

void Grid::classify_and_build() {
  const int R = order_ / 2;
  const int K = stencil_size();
  const double rm2 = r_max_ * r_max_ + 1e-12;
  cls_.assign(num_nodes_, NodeClass::exterior);

  for (std::int64_t p = 0; p < num_nodes_; ++p) {
    if (r2_[p] > rm2) continue;
    cls_[p] = NodeClass::collar;
    if (r2_[p] >= r_max_ * r_max_ - 1e-12) continue;
    bool ok = true;
    for (int a = 0; a < n_ && ok; ++a) {
      const int ia = multi_index(p, a);
      const double xa = coords_[ia];
      for (int o = -R; o <= R && ok; ++o) {
        if (o == 0) continue;
        const int j = ia + o;
        if (j < 0 || j >= N_) { ok = false; break; }
        const double xb = coords_[j];
        if (r2_[p] - xa * xa + xb * xb > rm2) ok = false;
      }
    }
    if (ok) cls_[p] = NodeClass::interior;
  }

  sidx_.assign(num_nodes_ * n_ * K, 0);
  scoef_.assign(num_nodes_ * n_ * K, 0.0);
  const int shifts4[5] = {0, 1, -1, 2, -2};
  const int shifts2[3] = {0, 1, -1};
  const int* shifts = order_ == 4 ? shifts4 : shifts2;
  const int nshift = order_ == 4 ? 5 : 3;

  // Window members must be non-exterior nodes: a node whose every candidate
  // window crosses the mask on some axis is demoted, and selection is
  // repeated until stable so no stencil ever reads a demoted node.
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::int64_t p = 0; p < num_nodes_; ++p) {
      if (cls_[p] == NodeClass::exterior) continue;
      bool good = true;
      for (int a = 0; a < n_; ++a) {
        const int ia = multi_index(p, a);
        bool found = false;
        for (int si = 0; si < nshift && !found; ++si) {
          const int s = shifts[si];
          bool valid = true;
          for (int k = 0; k < K; ++k) {
            const int j = ia + s - R + k;
            if (j < 0 || j >= N_) { valid = false; break; }
            const std::int64_t q = p + static_cast<std::int64_t>(j - ia) * strides_[a];
            if (cls_[q] == NodeClass::exterior) { valid = false; break; }
          }
          if (!valid) continue;
          for (int k = 0; k < K; ++k) {
            const int j = ia + s - R + k;
            sidx_[(p * n_ + a) * K + k] =
                p + static_cast<std::int64_t>(j - ia) * strides_[a];
            scoef_[(p * n_ + a) * K + k] =
                (order_ == 4 ? kW4[s + 2][k] : kW2[s + 1][k]) / h_;
          }
          found = true;
        }
        if (!found) { good = false; break; }
      }
      if (!good) {
        cls_[p] = NodeClass::exterior;
        for (int a = 0; a < n_; ++a)
          for (int k = 0; k < K; ++k) {
            sidx_[(p * n_ + a) * K + k] = 0;
            scoef_[(p * n_ + a) * K + k] = 0.0;
          }
        ++num_demoted_;
        changed = true;
      }
    }
  }

  interior_.clear();
  num_collar_ = 0;
  for (std::int64_t p = 0; p < num_nodes_; ++p) {
    if (cls_[p] == NodeClass::interior) interior_.push_back(p);
    else if (cls_[p] == NodeClass::collar) ++num_collar_;
  }
}

BackgroundGeometry::BackgroundGeometry(const Grid& grid, BackgroundKind kind)
    : grid_(&grid), kind_(kind) {
  const std::int64_t P = grid.num_nodes();
  rho_.resize(P);
  sqrt_det_g0_.resize(P);
  for (std::int64_t p = 0; p < P; ++p) {
    rho_[p] = flat() ? 1.0 : 0.5 * (1.0 - grid.radius2(p));
    sqrt_det_g0_[p] = flat() ? 1.0 : std::pow(std::abs(rho_[p]), -grid.n());
  }
}

}  // namespace ahcc
