#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ahcc/constraint.hpp"

namespace ahcc {

enum class SolverMode { ift_picard, newton_fd };
enum class Preconditioner { none, diagonal };

struct SolverConfig {
  SolverMode mode = SolverMode::ift_picard;
  double linear_tol = 1e-10;       // relative residual per block
  int linear_max_iter = 2000;
  double nonlinear_tol = 1e-10;    // weighted residual norm
  int nonlinear_max_iter = 25;
  double weight_s = 1.5;
  int continuation_steps = 1;
  Preconditioner precond = Preconditioner::diagonal;
  double jacobian_step = 1e-4;     // numeric-Jacobian probe step

  void validate() const;
};

struct LinearSolveStats {
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

struct SolveReport {
  bool converged = false;
  std::string mode;
  std::vector<double> residual_history;       // weighted norms, length its+1
  std::vector<int> linear_iterations;         // per outer iteration (summed blocks)
  double final_h_norm = 0.0;                  // |h|_{0,s}
  double final_xi_norm = 0.0;                 // |xi|_{0,s}
  double wall_seconds = 0.0;
  std::string failure;                        // empty on success
};

struct SolverDivergence : std::runtime_error {
  SolveReport report;
  SolverDivergence(const std::string& what, SolveReport r)
      : std::runtime_error(what), report(std::move(r)) {}
};

// Matrix-free preconditioned BiCGStab on packed vectors.
LinearSolveStats bicgstab(const std::function<std::vector<double>(const std::vector<double>&)>& apply,
                          const std::vector<double>& b, std::vector<double>& x,
                          const std::vector<double>* jacobi_diag, double tol,
                          int max_iter);

// Exact diagonal of the packed background blocks (1/2 Delta_L + (n-1) on the
// hbar block, div Lring on the xibar block), probed with basis fields through
// a node-local evaluation of the same expanded kernels.
std::vector<double> probe_block_diagonals(const BackgroundGeometry& bg, double s);

// Block-triangular solve of the fixed background linearization L0:
//   row2: (div Lring) dxi = E2,  then row1: A dh = E1 + Lring dxi,
// operator applications via origin_jacobian_apply (matrix-free).
ConstraintState linear_solve(const BackgroundGeometry& bg, const ResidualPair& rhs,
                             const SolverConfig& config,
                             LinearSolveStats* stats_row1 = nullptr,
                             LinearSolveStats* stats_row2 = nullptr);

// Fixed-slope iteration x_{k+1} = x_k - L0^{-1} F(x_k, T).
std::pair<ConstraintState, SolveReport> ift_iterate(const SourceTensor& T,
                                                    const BackgroundGeometry& bg,
                                                    const SolverConfig& config);

// Newton-Krylov with the numeric Jacobian at the current iterate.
std::pair<ConstraintState, SolveReport> newton_fd(const SourceTensor& T,
                                                  const BackgroundGeometry& bg,
                                                  const SolverConfig& config);

// Amplitude continuation: ramps the source to full strength, warm-starting.
std::pair<ConstraintState, SolveReport> continuation(const SourceTensor& T_target,
                                                     int steps,
                                                     const BackgroundGeometry& bg,
                                                     const SolverConfig& config);

}  // namespace ahcc
