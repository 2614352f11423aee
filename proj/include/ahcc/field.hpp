#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "ahcc/grid.hpp"

namespace ahcc {

enum class Rank : int { scalar = 0, one_form = 1, sym2 = 2 };
enum class Frame : int { physical = 0, rescaled = 1 };

inline int sym_count(int n) { return n * (n + 1) / 2; }

// Upper-triangle row-major packing for symmetric 2-tensors.
inline int sym_index(int n, int i, int j) {
  if (i > j) std::swap(i, j);
  return i * n - i * (i - 1) / 2 + (j - i);
}

inline int component_count(Rank r, int n) {
  switch (r) {
    case Rank::scalar: return 1;
    case Rank::one_form: return n;
    case Rank::sym2: return sym_count(n);
  }
  return 0;
}

// Dense node-major tensor field over the grid cube. Exterior nodes hold zeros.
class Field {
 public:
  Field() = default;
  Field(const Grid& grid, Rank rank, Frame frame = Frame::physical)
      : grid_(&grid),
        rank_(rank),
        frame_(frame),
        ncomp_(component_count(rank, grid.n())),
        data_(grid.num_nodes() * ncomp_, 0.0) {}

  const Grid& grid() const { return *grid_; }
  Rank rank() const { return rank_; }
  Frame frame() const { return frame_; }
  void set_frame(Frame f) { frame_ = f; }
  int ncomp() const { return ncomp_; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::vector<double>& raw() { return data_; }
  const std::vector<double>& raw() const { return data_; }

  double& at(std::int64_t p, int c) { return data_[p * ncomp_ + c]; }
  double at(std::int64_t p, int c) const { return data_[p * ncomp_ + c]; }

  double& sym_at(std::int64_t p, int i, int j) {
    return data_[p * ncomp_ + sym_index(grid_->n(), i, j)];
  }
  double sym_at(std::int64_t p, int i, int j) const {
    return data_[p * ncomp_ + sym_index(grid_->n(), i, j)];
  }

  void fill(double v) { data_.assign(data_.size(), v); }

  bool has_nonfinite() const {
    const std::int64_t P = grid_->num_nodes();
    for (std::int64_t p = 0; p < P; ++p) {
      if (grid_->is_exterior(p)) continue;
      for (int c = 0; c < ncomp_; ++c)
        if (!std::isfinite(at(p, c))) return true;
    }
    return false;
  }

 private:
  const Grid* grid_ = nullptr;
  Rank rank_ = Rank::scalar;
  Frame frame_ = Frame::physical;
  int ncomp_ = 0;
  std::vector<double> data_;
};

// rescaled components: hbar = rho^2 h (sym2), xibar = rho xi (one-form)
Field to_physical(const Field& f, const BackgroundGeometry& bg);
Field to_rescaled(const Field& f, const BackgroundGeometry& bg);

// |u(p)|_{frame(g0)} for a physical-flagged field.
double frame_norm(const Field& f, const BackgroundGeometry& bg, std::int64_t p);

// max over region of rho^{-s} |u|_{frame(g0)}. region_radius <= 0 means all
// interior nodes; otherwise non-exterior nodes with |x| <= region_radius.
double weighted_sup_norm(const Field& f, const BackgroundGeometry& bg, double s,
                         double region_radius = 0.0);

// plain sup of the frame norm over the same regions
double frame_sup_norm(const Field& f, const BackgroundGeometry& bg,
                      double region_radius = 0.0);

// discrete L2 pairing: sum over interior nodes of <a,b>_{g0} dV_{g0},
// dV = sqrt(det g0) h^n.
double l2_inner(const Field& a, const Field& b, const BackgroundGeometry& bg);

}  // namespace ahcc
