#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ahcc/constraint.hpp"
#include "ahcc/geometry.hpp"
#include "ahcc/operators.hpp"

namespace ahcc {

struct CheckResult {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string region;

  static CheckResult make(std::string name, double value, double tol,
                          std::string region = "core") {
    CheckResult r;
    r.name = std::move(name);
    r.value = value;
    r.tolerance = tol;
    r.pass = value <= tol;
    r.region = std::move(region);
    return r;
  }
};

struct VerificationSummary {
  std::vector<CheckResult> checks;
  bool overall() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
  void add(CheckResult c) { checks.push_back(std::move(c)); }
};

constexpr double kCoreRadius = 0.7;

// max over the core region of |R(g) + n(n-1)|. The deviation is evaluated in
// background-split form, tr_g(Ric(g) + (n-1)g), which is the same continuum
// quantity with the Einstein background identity applied exactly.
CheckResult check_constant_scalar(const Geometry& geo, double tol);

// max frame norm of Ric(g) + (n-1) g over the core region.
CheckResult check_einstein(const Geometry& geo, double tol);

// core-region weighted sup norm of the gauge one-form B_g(g0), evaluated via
// the exact linearity route B_g(g0) = -B_g(h).
CheckResult check_gauge(const Geometry& geo, double s, double tol);

// algebraic trace of S and the core norm of div_g S
struct SPropertiesResult {
  CheckResult trace;
  CheckResult divergence;
};
SPropertiesResult check_S_properties(const OperatorContext& ctx, const Field& T_phys,
                                     const Field& xi_phys, double trace_tol,
                                     double div_tol);

// core-region discrepancy of 2 B_g(L_g w) vs Delta w - Ric.w for a smooth
// one-form w (unit core frame sup norm applied internally).
CheckResult check_gauge_identity(const OperatorContext& ctx, const Field& w,
                                 double tol);

// core norm of B_g(Ric(g)), evaluated on the Einstein deviation
// B_g(Ric(g) + (n-1) g) (identical in the continuum since B_g(g) = 0).
CheckResult check_bianchi(const Geometry& geo, double tol);

// least-squares slope of log(max-over-angle |u|_frame) against log rho on the
// annulus 0.5 <= |x| <= r_max - 2h.
struct DecayFit {
  double exponent = 0.0;
  int bins = 0;
  bool valid = false;
};
DecayFit decay_fit(const Field& u, const BackgroundGeometry& bg);
CheckResult check_decay(const Field& u, const BackgroundGeometry& bg,
                        double s_expected, double tol_abs);

// minimum Rayleigh quotient of Delta_L + 2(n-1) over `trials` randomized
// trace-free compactly supported symmetric 2-tensors.
double nondegeneracy_probe(const OperatorContext& ctx0, int trials,
                           std::uint64_t seed = 20240901);

// deterministic smooth global test one-form (low-frequency), unit-normalized
// on the core region
Field smooth_test_oneform(const Grid& grid, const BackgroundGeometry& bg,
                          std::uint64_t seed);

// compactly supported trace-free sym2 bump (euclidean-trace-free equals
// g0-trace-free on the conformally flat background)
Field tracefree_bump_sym2(const Grid& grid, const BackgroundGeometry& bg,
                          std::uint64_t seed, double support_radius);

// compactly supported one-form of the same family (cos^6 radial profile,
// random constant amplitudes, mild linear modulation)
Field bump_oneform(const Grid& grid, const BackgroundGeometry& bg,
                   std::uint64_t seed, double support_radius);

// rescaled-flag random smooth perturbation used by perturbed-metric checks
Field random_perturbation_hbar(const Grid& grid, const BackgroundGeometry& bg,
                               std::uint64_t seed, double amplitude,
                               double support_radius);

// full post-solve battery
VerificationSummary verify_solution(const ConstraintState& state, const SourceTensor& T,
                                    const BackgroundGeometry& bg, double s);

}  // namespace ahcc
