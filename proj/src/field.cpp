#include "ahcc/field.hpp"

namespace ahcc {

namespace {

void convert(Field& out, const Field& f, const BackgroundGeometry& bg, bool to_phys) {
  const Grid& grid = f.grid();
  const std::int64_t P = grid.num_nodes();
  const int C = f.ncomp();
  int pw = 0;
  if (f.rank() == Rank::one_form) pw = 1;
  if (f.rank() == Rank::sym2) pw = 2;
  for (std::int64_t p = 0; p < P; ++p) {
    if (grid.is_exterior(p)) continue;
    const double r = bg.rho(p);
    double fac = pw == 1 ? r : r * r;
    if (to_phys) fac = 1.0 / fac;
    for (int c = 0; c < C; ++c) out.at(p, c) = f.at(p, c) * fac;
  }
}

}  // namespace

Field to_physical(const Field& f, const BackgroundGeometry& bg) {
  if (f.rank() == Rank::scalar)
    throw std::invalid_argument("to_physical: scalar fields carry no rescaling");
  if (f.frame() != Frame::rescaled)
    throw std::invalid_argument("to_physical: field already physical");
  Field out(f.grid(), f.rank(), Frame::physical);
  convert(out, f, bg, true);
  return out;
}

Field to_rescaled(const Field& f, const BackgroundGeometry& bg) {
  if (f.rank() == Rank::scalar)
    throw std::invalid_argument("to_rescaled: scalar fields carry no rescaling");
  if (f.frame() != Frame::physical)
    throw std::invalid_argument("to_rescaled: field already rescaled");
  Field out(f.grid(), f.rank(), Frame::rescaled);
  convert(out, f, bg, false);
  return out;
}

double frame_norm(const Field& f, const BackgroundGeometry& bg, std::int64_t p) {
  if (f.frame() != Frame::physical)
    throw std::invalid_argument("frame_norm: physical-flagged field required");
  const int n = f.grid().n();
  const double r = bg.rho(p);
  switch (f.rank()) {
    case Rank::scalar:
      return std::abs(f.at(p, 0));
    case Rank::one_form: {
      // g0^{ij} u_i u_j = rho^2 sum u_i^2
      double s = 0;
      for (int i = 0; i < n; ++i) s += f.at(p, i) * f.at(p, i);
      return r * std::sqrt(s);
    }
    case Rank::sym2: {
      // g0^{ik} g0^{jl} u_ij u_kl = rho^4 * Frobenius^2 (off-diagonals twice)
      double s = 0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          const double v = f.sym_at(p, i, j);
          s += v * v;
        }
      return r * r * std::sqrt(s);
    }
  }
  return 0.0;
}

namespace {

template <typename W>
double sup_over_region(const Field& f, const BackgroundGeometry& bg,
                       double region_radius, W&& weight) {
  const Grid& grid = f.grid();
  const std::int64_t P = grid.num_nodes();
  double best = 0.0;
  if (region_radius > 0.0) {
    const double r2 = region_radius * region_radius + 1e-12;
    for (std::int64_t p = 0; p < P; ++p) {
      if (grid.is_exterior(p) || grid.radius2(p) > r2) continue;
      best = std::max(best, weight(p) * frame_norm(f, bg, p));
    }
  } else {
    for (std::int64_t p : grid.interior_nodes())
      best = std::max(best, weight(p) * frame_norm(f, bg, p));
  }
  return best;
}

}  // namespace

double weighted_sup_norm(const Field& f, const BackgroundGeometry& bg, double s,
                         double region_radius) {
  return sup_over_region(f, bg, region_radius,
                         [&](std::int64_t p) { return std::pow(bg.rho(p), -s); });
}

double frame_sup_norm(const Field& f, const BackgroundGeometry& bg,
                      double region_radius) {
  return sup_over_region(f, bg, region_radius, [](std::int64_t) { return 1.0; });
}

double l2_inner(const Field& a, const Field& b, const BackgroundGeometry& bg) {
  if (a.rank() != b.rank())
    throw std::invalid_argument("l2_inner: rank mismatch");
  if (a.frame() != Frame::physical || b.frame() != Frame::physical)
    throw std::invalid_argument("l2_inner: physical-flagged fields required");
  const Grid& grid = a.grid();
  const int n = grid.n();
  const double dv0 = std::pow(grid.spacing(), n);
  double acc = 0.0;
  for (std::int64_t p : grid.interior_nodes()) {
    const double r = bg.rho(p);
    const double dV = bg.sqrt_det_g0(p) * dv0;
    double ip = 0.0;
    switch (a.rank()) {
      case Rank::scalar:
        ip = a.at(p, 0) * b.at(p, 0);
        break;
      case Rank::one_form: {
        double s = 0;
        for (int i = 0; i < n; ++i) s += a.at(p, i) * b.at(p, i);
        ip = r * r * s;
        break;
      }
      case Rank::sym2: {
        double s = 0;
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) s += a.sym_at(p, i, j) * b.sym_at(p, i, j);
        ip = r * r * r * r * s;
        break;
      }
    }
    acc += ip * dV;
  }
  return acc;
}

}  // namespace ahcc
