#include "ahcc/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace ahcc {

namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::set<std::string>& allowed,
                    const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      throw ConfigError("unknown config key: " + where + it.key());
}

}  // namespace

void RunConfig::validate() {
  warnings.clear();
  if (n < 3) throw ConfigError("n must be >= 3");
  if (n > kMaxDim) throw ConfigError("n must be <= 4 in this build");
  if (N < 9) throw ConfigError("grid.N must be >= 9");
  if (N % 2 == 0) throw ConfigError("grid.N must be odd");
  if (!(r_max > 0 && r_max < 1)) throw ConfigError("grid.r_max must be in (0,1)");
  if (fd_order != 2 && fd_order != 4) throw ConfigError("grid.fd_order must be 2 or 4");
  if (!(weight_s > 0) || !(weight_s < n - 1))
    warnings.push_back("weight_s outside the isomorphism range (0, n-1); "
                       "solves may not converge");
  if (source.amplitude < 0) throw ConfigError("source.amplitude must be >= 0");
  solver.weight_s = weight_s;
  solver.validate();
  if (verify_trials < 1) throw ConfigError("verify.trials must be >= 1");
}

RunConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  reject_unknown(j, {"n", "grid", "weight_s", "seed", "source", "solver", "verify"}, "");
  RunConfig cfg;
  cfg.n = j.value("n", 3);
  if (j.contains("grid")) {
    const auto& g = j["grid"];
    reject_unknown(g, {"N", "r_max", "fd_order"}, "grid.");
    cfg.N = g.value("N", cfg.n == 3 ? 33 : 17);
    cfg.r_max = g.value("r_max", 0.9);
    cfg.fd_order = g.value("fd_order", 4);
  } else if (cfg.n != 3) {
    cfg.N = 17;
  }
  cfg.weight_s = j.value("weight_s", 1.5);
  cfg.seed = j.value("seed", std::uint64_t{1});
  if (j.contains("source")) {
    const auto& s = j["source"];
    reject_unknown(s, {"profile", "amplitude", "decay", "width", "seed"}, "source.");
    const std::string prof = s.value("profile", "rho-power");
    if (prof == "rho-power")
      cfg.source.profile = SourceProfile::rho_power;
    else if (prof == "gaussian-bump")
      cfg.source.profile = SourceProfile::gaussian_bump;
    else
      throw ConfigError("source.profile must be rho-power or gaussian-bump");
    cfg.source.amplitude = s.value("amplitude", 1e-3);
    cfg.source.decay = s.value("decay", 1.5);
    cfg.source.width = s.value("width", 0.25);
    cfg.source.seed = s.value("seed", cfg.seed);
  } else {
    cfg.source.seed = cfg.seed;
  }
  if (j.contains("solver")) {
    const auto& s = j["solver"];
    reject_unknown(s,
                   {"mode", "linear_tol", "linear_max_iter", "nonlinear_tol",
                    "nonlinear_max_iter", "continuation_steps", "preconditioner",
                    "jacobian_step"},
                   "solver.");
    const std::string mode = s.value("mode", "ift-picard");
    if (mode == "ift-picard")
      cfg.solver.mode = SolverMode::ift_picard;
    else if (mode == "newton-fd")
      cfg.solver.mode = SolverMode::newton_fd;
    else
      throw ConfigError("solver.mode must be ift-picard or newton-fd");
    cfg.solver.linear_tol = s.value("linear_tol", 1e-10);
    cfg.solver.linear_max_iter = s.value("linear_max_iter", 2000);
    cfg.solver.nonlinear_tol = s.value("nonlinear_tol", 1e-10);
    cfg.solver.nonlinear_max_iter = s.value("nonlinear_max_iter", 25);
    cfg.solver.continuation_steps = s.value("continuation_steps", 1);
    const std::string pre = s.value("preconditioner", "diagonal");
    if (pre == "none")
      cfg.solver.precond = Preconditioner::none;
    else if (pre == "diagonal")
      cfg.solver.precond = Preconditioner::diagonal;
    else
      throw ConfigError("solver.preconditioner must be none or diagonal");
    cfg.solver.jacobian_step = s.value("jacobian_step", 1e-4);
  }
  if (j.contains("verify")) {
    const auto& v = j["verify"];
    reject_unknown(v, {"trials"}, "verify.");
    cfg.verify_trials = v.value("trials", 20);
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config: " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config_text(ss.str());
}

std::string config_to_json(const RunConfig& cfg) {
  json j;
  j["n"] = cfg.n;
  j["grid"] = {{"N", cfg.N}, {"r_max", cfg.r_max}, {"fd_order", cfg.fd_order}};
  j["weight_s"] = cfg.weight_s;
  j["seed"] = cfg.seed;
  j["source"] = {
      {"profile", cfg.source.profile == SourceProfile::rho_power ? "rho-power"
                                                                 : "gaussian-bump"},
      {"amplitude", cfg.source.amplitude},
      {"decay", cfg.source.decay},
      {"width", cfg.source.width},
      {"seed", cfg.source.seed}};
  j["solver"] = {
      {"mode", cfg.solver.mode == SolverMode::newton_fd ? "newton-fd" : "ift-picard"},
      {"linear_tol", cfg.solver.linear_tol},
      {"linear_max_iter", cfg.solver.linear_max_iter},
      {"nonlinear_tol", cfg.solver.nonlinear_tol},
      {"nonlinear_max_iter", cfg.solver.nonlinear_max_iter},
      {"continuation_steps", cfg.solver.continuation_steps},
      {"preconditioner",
       cfg.solver.precond == Preconditioner::none ? "none" : "diagonal"},
      {"jacobian_step", cfg.solver.jacobian_step}};
  j["verify"] = {{"trials", cfg.verify_trials}};
  return j.dump(2);
}

}  // namespace ahcc
