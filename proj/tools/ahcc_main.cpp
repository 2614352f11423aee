#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "json.hpp"

#include "ahcc/config.hpp"
#include "ahcc/field_io.hpp"
#include "ahcc/verification.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ahcc;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string timestamp_utc() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%S", std::gmtime(&t));
  // disambiguate rapid successive runs
  const auto us = std::chrono::duration_cast<std::chrono::microseconds>(
                      now.time_since_epoch()).count() % 1000000;
  return std::string(buf) + "." + std::to_string(us);
}

fs::path make_run_dir(const std::string& out, const std::string& cmd) {
  fs::path dir = fs::path(out) / (timestamp_utc() + "-" + cmd);
  fs::create_directories(dir);
  return dir;
}

json check_to_json(const CheckResult& c) {
  return json{{"name", c.name},
              {"value", c.value},
              {"tolerance", c.tolerance},
              {"pass", c.pass},
              {"region", c.region}};
}

json summary_to_json(const VerificationSummary& s) {
  json arr = json::array();
  for (const auto& c : s.checks) arr.push_back(check_to_json(c));
  return json{{"checks", arr}, {"overall_pass", s.overall()}};
}

json report_skeleton(const RunConfig& cfg) {
  json j;
  j["config"] = json::parse(config_to_json(cfg));
  j["solve"] = nullptr;
  j["verification"] = nullptr;
  j["files"] = json::array();
  j["version"] = kVersion;
  j["timestamp"] = timestamp_utc();
  if (!cfg.warnings.empty()) j["warnings"] = cfg.warnings;
  return j;
}

json solve_report_json(const SolveReport& rep) {
  return json{{"converged", rep.converged},
              {"mode", rep.mode},
              {"residual_history", rep.residual_history},
              {"linear_iterations", rep.linear_iterations},
              {"final_h_norm", rep.final_h_norm},
              {"final_xi_norm", rep.final_xi_norm},
              {"wall_seconds", rep.wall_seconds},
              {"failure", rep.failure}};
}

void write_report(const fs::path& dir, const json& j) {
  std::ofstream os(dir / "report.json");
  os << j.dump(2) << "\n";
}

void write_history_csv(const fs::path& dir, const SolveReport& rep) {
  std::ofstream os(dir / "residual_history.csv");
  os << "iteration,weighted_residual\n";
  for (size_t i = 0; i < rep.residual_history.size(); ++i)
    os << i << "," << std::scientific << rep.residual_history[i] << "\n";
}

void write_decay_csv(const fs::path& dir, const Field& hphys,
                     const BackgroundGeometry& bg) {
  const Grid& grid = hphys.grid();
  std::map<int, std::pair<double, double>> bins;
  for (std::int64_t p = 0; p < grid.num_nodes(); ++p) {
    if (grid.is_exterior(p)) continue;
    const double r = std::sqrt(grid.radius2(p));
    const double f = frame_norm(hphys, bg, p);
    const int b = static_cast<int>(std::lround(r / grid.spacing()));
    auto it = bins.find(b);
    if (it == bins.end() || f > it->second.second) bins[b] = {bg.rho(p), f};
  }
  std::ofstream os(dir / "decay_profile.csv");
  os << "radius_bin,rho,max_frame_norm\n";
  for (auto& [b, rv] : bins)
    os << b * grid.spacing() << "," << rv.first << "," << std::scientific
       << rv.second << "\n";
}

int cmd_background(const RunConfig& cfg, const std::string& out) {
  Grid grid(cfg.n, cfg.N, cfg.r_max, cfg.fd_order);
  BackgroundGeometry bg(grid);
  Geometry geo0(grid, bg, nullptr);
  const fs::path dir = make_run_dir(out, "background");

  VerificationSummary sum;
  sum.add(check_constant_scalar(geo0, 1e-4));
  sum.add(check_einstein(geo0, 1e-4));

  // |d rho|_gbar = 1 at the boundary: gbar = rho^2 g0 = delta exactly, so
  // |d rho|^2 + 2 rho = 1 on the whole ball; sampled with the FD gradient
  // (rho is quadratic, the stencils are exact on it).
  Field rho_field(grid, Rank::scalar, Frame::physical);
  for (std::int64_t p = 0; p < grid.num_nodes(); ++p)
    if (!grid.is_exterior(p)) rho_field.at(p, 0) = bg.rho(p);
  double worst = 0;
  for (std::int64_t p : grid.interior_nodes()) {
    double s = 0;
    for (int a = 0; a < grid.n(); ++a) {
      const double d = grid.fd_partial(rho_field.data(), 1, p, a, 0);
      s += d * d;
    }
    worst = std::max(worst, std::abs(s + 2 * bg.rho(p) - 1.0));
  }
  sum.add(CheckResult::make("drho_unit_norm", worst, 1e-12, "interior"));

  Field g0f = geo0.metric_field();
  write_field((dir / "g0.ahcf").string(), g0f);

  json rep = report_skeleton(cfg);
  rep["verification"] = summary_to_json(sum);
  rep["files"] = json::array({(dir / "g0.ahcf").string()});
  write_report(dir, rep);
  std::cout << rep.dump(2) << "\n";
  return sum.overall() ? 0 : 1;
}

int cmd_solve(const RunConfig& cfg, const std::string& out) {
  Grid grid(cfg.n, cfg.N, cfg.r_max, cfg.fd_order);
  BackgroundGeometry bg(grid);
  SourceTensor T = make_source(cfg.source, grid, bg);
  const fs::path dir = make_run_dir(out, "solve");
  json rep = report_skeleton(cfg);

  ConstraintState state(grid);
  SolveReport srep;
  try {
    if (cfg.solver.continuation_steps > 1) {
      std::tie(state, srep) =
          continuation(T, cfg.solver.continuation_steps, bg, cfg.solver);
    } else if (cfg.solver.mode == SolverMode::newton_fd) {
      std::tie(state, srep) = newton_fd(T, bg, cfg.solver);
    } else {
      std::tie(state, srep) = ift_iterate(T, bg, cfg.solver);
    }
  } catch (const SolverDivergence& e) {
    rep["solve"] = solve_report_json(e.report);
    rep["solve"]["failure"] = e.what();
    write_report(dir, rep);
    write_history_csv(dir, e.report);
    std::cerr << "solver divergence: " << e.what() << "\n";
    std::cout << rep.dump(2) << "\n";
    return 2;
  }

  write_field((dir / "hbar.ahcf").string(), state.hbar);
  write_field((dir / "xibar.ahcf").string(), state.xibar);
  write_history_csv(dir, srep);

  VerificationSummary sum = verify_solution(state, T, bg, cfg.weight_s);
  std::shared_ptr<Geometry> geo;
  residual_gauged(state, T.T, bg, &geo);
  write_decay_csv(dir, geo->h_physical(), bg);

  rep["solve"] = solve_report_json(srep);
  rep["verification"] = summary_to_json(sum);
  rep["files"] = json::array({(dir / "hbar.ahcf").string(),
                              (dir / "xibar.ahcf").string(),
                              (dir / "residual_history.csv").string(),
                              (dir / "decay_profile.csv").string()});
  write_report(dir, rep);
  std::cout << rep.dump(2) << "\n";
  if (!srep.converged) return 2;
  return sum.overall() ? 0 : 1;
}

int cmd_verify(const RunConfig& cfg, const std::string& out,
               const std::string& hbar_path, const std::string& xibar_path) {
  Grid grid(cfg.n, cfg.N, cfg.r_max, cfg.fd_order);
  BackgroundGeometry bg(grid);
  ConstraintState state(grid);
  state.hbar = read_field(hbar_path, grid);
  state.xibar = read_field(xibar_path, grid);
  if (state.hbar.rank() != Rank::sym2 || state.hbar.frame() != Frame::rescaled ||
      state.xibar.rank() != Rank::one_form || state.xibar.frame() != Frame::rescaled)
    throw IoError("state files do not contain rescaled (hbar, xibar) fields");
  state.enforce_dirichlet();
  SourceTensor T = make_source(cfg.source, grid, bg);

  VerificationSummary sum = verify_solution(state, T, bg, cfg.weight_s);
  const fs::path dir = make_run_dir(out, "verify");
  json rep = report_skeleton(cfg);
  rep["verification"] = summary_to_json(sum);
  rep["files"] = json::array({hbar_path, xibar_path});
  write_report(dir, rep);
  std::cout << rep.dump(2) << "\n";
  return sum.overall() ? 0 : 1;
}

int cmd_lincheck(const RunConfig& cfg, const std::string& out) {
  Grid grid(cfg.n, cfg.N, cfg.r_max, cfg.fd_order);
  BackgroundGeometry bg(grid);
  Geometry geo0(grid, bg, nullptr);
  OperatorContext ctx0(geo0);

  double worst_rel = 0.0;
  for (int sdx = 1; sdx <= 5; ++sdx) {
    Field dh = tracefree_bump_sym2(grid, bg, 100 + sdx, 0.85);
    Field dxi(grid, Rank::one_form, Frame::physical);
    {
      Field w = smooth_test_oneform(grid, bg, 200 + sdx);
      for (std::int64_t p = 0; p < grid.num_nodes(); ++p) {
        if (grid.is_exterior(p)) continue;
        const double r = std::sqrt(grid.radius2(p));
        const double b = r < 0.85 ? std::pow(std::cos(0.5 * M_PI * r / 0.85), 6) : 0.0;
        for (int i = 0; i < grid.n(); ++i) dxi.at(p, i) = b * w.at(p, i);
      }
    }
    Field dhbar = to_rescaled(dh, bg);
    Field dxibar = to_rescaled(dxi, bg);
    ConstraintState zero(grid);
    for (std::int64_t p = 0; p < grid.num_nodes(); ++p)
      if (!grid.is_interior(p)) {
        for (int c = 0; c < dhbar.ncomp(); ++c) dhbar.at(p, c) = 0.0;
        for (int c = 0; c < dxibar.ncomp(); ++c) dxibar.at(p, c) = 0.0;
      }
    Field dh2 = to_physical(dhbar, bg);
    Field dxi2 = to_physical(dxibar, bg);

    ResidualPair lin = linearized_apply(ctx0, dh2, dxi2);
    SourceTensor T0{SourceRecipe{}, Field(grid, Rank::sym2, Frame::physical)};
    ResidualPair num =
        numeric_jacobian_apply(zero, T0.T, bg, dhbar, dxibar, 1e-4);
    ResidualPair diff(grid);
    for (size_t i = 0; i < diff.E1.raw().size(); ++i)
      diff.E1.raw()[i] = num.E1.raw()[i] - lin.E1.raw()[i];
    for (size_t i = 0; i < diff.E2.raw().size(); ++i)
      diff.E2.raw()[i] = num.E2.raw()[i] - lin.E2.raw()[i];
    const double rel = residual_wnorm(diff, bg, cfg.weight_s) /
                       residual_wnorm(lin, bg, cfg.weight_s);
    worst_rel = std::max(worst_rel, rel);
  }

  VerificationSummary sum;
  sum.add(CheckResult::make("linearization_consistency", worst_rel, 1e-3, "interior"));

  // manufactured-solution recovery through the background solve
  {
    Field dh = tracefree_bump_sym2(grid, bg, 777, 0.5);
    Field dhbar = to_rescaled(dh, bg);
    Field dxibar(grid, Rank::one_form, Frame::rescaled);
    for (std::int64_t p = 0; p < grid.num_nodes(); ++p)
      if (!grid.is_interior(p))
        for (int c = 0; c < dhbar.ncomp(); ++c) dhbar.at(p, c) = 0.0;
    ResidualPair rhs = origin_jacobian_apply(bg, dhbar, dxibar);
    SolverConfig scfg = cfg.solver;
    ConstraintState sol = linear_solve(bg, rhs, scfg);
    Field dhr(grid, Rank::sym2, Frame::rescaled);
    for (size_t i = 0; i < dhr.raw().size(); ++i)
      dhr.raw()[i] = sol.hbar.raw()[i] - dhbar.raw()[i];
    Field err_phys = to_physical(dhr, bg);
    const double rel = weighted_sup_norm(err_phys, bg, cfg.weight_s) /
                       weighted_sup_norm(to_physical(dhbar, bg), bg, cfg.weight_s);
    sum.add(CheckResult::make("manufactured_recovery", rel, 1e-8, "interior"));
  }

  const fs::path dir = make_run_dir(out, "lincheck");
  json rep = report_skeleton(cfg);
  rep["verification"] = summary_to_json(sum);
  write_report(dir, rep);
  std::cout << rep.dump(2) << "\n";
  return sum.overall() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gauge-broken extended constant-scalar-curvature solver on the "
               "truncated Poincare ball"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "runs";
  std::string hbar_path, xibar_path;

  auto add_common = [&](CLI::App* sub, bool with_state) {
    sub->add_option("--config", config_path, "JSON configuration file")->required();
    sub->add_option("--out", out_dir, "output directory (timestamped run dirs)");
    if (with_state) {
      sub->add_option("--hbar", hbar_path, "hbar field file")->required();
      sub->add_option("--xibar", xibar_path, "xibar field file")->required();
    }
  };
  CLI::App* background = app.add_subcommand("background", "background geometry checks");
  CLI::App* solve = app.add_subcommand("solve", "solve the gauge-broken system");
  CLI::App* verify = app.add_subcommand("verify", "verification battery on saved state");
  CLI::App* lincheck = app.add_subcommand("lincheck", "linearization consistency");
  add_common(background, false);
  add_common(solve, false);
  add_common(verify, true);
  add_common(lincheck, false);

  CLI11_PARSE(app, argc, argv);

  RunConfig cfg;
  try {
    cfg = load_config(config_path);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 3;
  }
  for (const auto& w : cfg.warnings) std::cerr << "warning: " << w << "\n";

  try {
    if (background->parsed()) return cmd_background(cfg, out_dir);
    if (solve->parsed()) return cmd_solve(cfg, out_dir);
    if (verify->parsed()) return cmd_verify(cfg, out_dir, hbar_path, xibar_path);
    if (lincheck->parsed()) return cmd_lincheck(cfg, out_dir);
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 4;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
