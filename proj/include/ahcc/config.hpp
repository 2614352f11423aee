#pragma once

#include <string>
#include <vector>

#include "ahcc/constraint.hpp"
#include "ahcc/solver.hpp"

namespace ahcc {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Run configuration, read from a JSON document. Unknown keys are hard errors.
struct RunConfig {
  int n = 3;
  int N = 33;
  double r_max = 0.9;
  int fd_order = 4;
  double weight_s = 1.5;
  std::uint64_t seed = 1;
  SourceRecipe source;
  SolverConfig solver;
  int verify_trials = 20;
  std::vector<std::string> warnings;

  void validate();
};

RunConfig parse_config_text(const std::string& text);
RunConfig load_config(const std::string& path);
std::string config_to_json(const RunConfig& cfg);

}  // namespace ahcc
