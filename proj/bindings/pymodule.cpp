#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ahcc/config.hpp"
#include "ahcc/field_io.hpp"
#include "ahcc/solver.hpp"
#include "ahcc/verification.hpp"

namespace py = pybind11;
using namespace ahcc;

namespace {

py::array_t<double> field_to_numpy(const Field& f) {
  const Grid& g = f.grid();
  py::array_t<double> out({static_cast<py::ssize_t>(g.num_nodes()),
                           static_cast<py::ssize_t>(f.ncomp())});
  auto buf = out.mutable_unchecked<2>();
  for (std::int64_t p = 0; p < g.num_nodes(); ++p)
    for (int c = 0; c < f.ncomp(); ++c) buf(p, c) = f.at(p, c);
  return out;
}

Field numpy_to_field(const Grid& g, Rank rank, Frame frame,
                     const py::array_t<double>& arr) {
  Field f(g, rank, frame);
  auto buf = arr.unchecked<2>();
  if (buf.shape(0) != g.num_nodes() || buf.shape(1) != f.ncomp())
    throw std::invalid_argument("field array shape mismatch");
  for (std::int64_t p = 0; p < g.num_nodes(); ++p)
    for (int c = 0; c < f.ncomp(); ++c) f.at(p, c) = buf(p, c);
  return f;
}

py::dict report_to_dict(const SolveReport& rep) {
  py::dict d;
  d["converged"] = rep.converged;
  d["mode"] = rep.mode;
  d["residual_history"] = rep.residual_history;
  d["linear_iterations"] = rep.linear_iterations;
  d["final_h_norm"] = rep.final_h_norm;
  d["final_xi_norm"] = rep.final_xi_norm;
  d["wall_seconds"] = rep.wall_seconds;
  d["failure"] = rep.failure;
  return d;
}

py::dict summary_to_dict(const VerificationSummary& s) {
  py::list checks;
  for (const auto& c : s.checks) {
    py::dict e;
    e["name"] = c.name;
    e["value"] = c.value;
    e["tolerance"] = c.tolerance;
    e["pass"] = c.pass;
    e["region"] = c.region;
    checks.append(e);
  }
  py::dict d;
  d["checks"] = checks;
  d["overall_pass"] = s.overall();
  return d;
}

SourceRecipe recipe_from_kwargs(const std::string& profile, double amplitude,
                                double decay, double width, std::uint64_t seed) {
  SourceRecipe r;
  if (profile == "rho-power")
    r.profile = SourceProfile::rho_power;
  else if (profile == "gaussian-bump")
    r.profile = SourceProfile::gaussian_bump;
  else
    throw std::invalid_argument("profile must be rho-power or gaussian-bump");
  r.amplitude = amplitude;
  r.decay = decay;
  r.width = width;
  r.seed = seed;
  return r;
}

SolverConfig solver_config_from(const std::string& mode, double linear_tol,
                                int linear_max_iter, double nonlinear_tol,
                                int nonlinear_max_iter, double weight_s,
                                int continuation_steps, const std::string& precond,
                                double jacobian_step) {
  SolverConfig cfg;
  if (mode == "ift-picard")
    cfg.mode = SolverMode::ift_picard;
  else if (mode == "newton-fd")
    cfg.mode = SolverMode::newton_fd;
  else
    throw std::invalid_argument("mode must be ift-picard or newton-fd");
  cfg.linear_tol = linear_tol;
  cfg.linear_max_iter = linear_max_iter;
  cfg.nonlinear_tol = nonlinear_tol;
  cfg.nonlinear_max_iter = nonlinear_max_iter;
  cfg.weight_s = weight_s;
  cfg.continuation_steps = continuation_steps;
  cfg.precond = precond == "none" ? Preconditioner::none : Preconditioner::diagonal;
  cfg.jacobian_step = jacobian_step;
  cfg.validate();
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_ahcc, m) {
  m.doc() = "solver for the gauge-broken extended constant-scalar-curvature "
            "system on the truncated Poincare ball";

  py::register_exception<NonSpdError>(m, "NonSpdError");
  py::register_exception<SolverDivergence>(m, "SolverDivergenceError");
  py::register_exception<ConfigError>(m, "ConfigError");
  py::register_exception<IoError>(m, "IoError");

  py::enum_<NodeClass>(m, "NodeClass")
      .value("exterior", NodeClass::exterior)
      .value("collar", NodeClass::collar)
      .value("interior", NodeClass::interior);

  py::class_<Grid>(m, "Grid")
      .def(py::init<int, int, double, int>(), py::arg("n"), py::arg("points_per_axis"),
           py::arg("r_max") = 0.9, py::arg("fd_order") = 4)
      .def_property_readonly("n", &Grid::n)
      .def_property_readonly("points_per_axis", &Grid::points_per_axis)
      .def_property_readonly("r_max", &Grid::r_max)
      .def_property_readonly("fd_order", &Grid::fd_order)
      .def_property_readonly("spacing", &Grid::spacing)
      .def_property_readonly("num_nodes", &Grid::num_nodes)
      .def_property_readonly("num_interior", &Grid::num_interior)
      .def_property_readonly("num_collar", &Grid::num_collar)
      .def("node_class", &Grid::node_class)
      .def("position", [](const Grid& g, std::int64_t p) {
        std::vector<double> x(g.n());
        g.position(p, x.data());
        return x;
      });

  py::class_<BackgroundGeometry>(m, "Background")
      .def(py::init([](const Grid& g, bool flat) {
             return BackgroundGeometry(
                 g, flat ? BackgroundKind::flat : BackgroundKind::poincare_ball);
           }),
           py::arg("grid"), py::arg("flat") = false, py::keep_alive<1, 2>())
      .def("rho", [](const BackgroundGeometry& b, std::int64_t p) { return b.rho(p); });

  m.def("background_checks", [](int n, int N, double r_max, int fd_order) {
    Grid grid(n, N, r_max, fd_order);
    BackgroundGeometry bg(grid);
    Geometry geo0(grid, bg, nullptr);
    VerificationSummary s;
    s.add(check_constant_scalar(geo0, 1e-4));
    s.add(check_einstein(geo0, 1e-4));
    return summary_to_dict(s);
  }, py::arg("n") = 3, py::arg("N") = 33, py::arg("r_max") = 0.9,
     py::arg("fd_order") = 4);

  m.def("solve",
        [](int n, int N, double r_max, int fd_order, const std::string& profile,
           double amplitude, double decay, double width, std::uint64_t seed,
           const std::string& mode, double linear_tol, int linear_max_iter,
           double nonlinear_tol, int nonlinear_max_iter, double weight_s,
           int continuation_steps, const std::string& precond, double jacobian_step) {
          Grid grid(n, N, r_max, fd_order);
          BackgroundGeometry bg(grid);
          SourceTensor T = make_source(
              recipe_from_kwargs(profile, amplitude, decay, width, seed), grid, bg);
          SolverConfig cfg = solver_config_from(
              mode, linear_tol, linear_max_iter, nonlinear_tol, nonlinear_max_iter,
              weight_s, continuation_steps, precond, jacobian_step);
          ConstraintState state(grid);
          SolveReport rep;
          if (cfg.continuation_steps > 1)
            std::tie(state, rep) = continuation(T, cfg.continuation_steps, bg, cfg);
          else if (cfg.mode == SolverMode::newton_fd)
            std::tie(state, rep) = newton_fd(T, bg, cfg);
          else
            std::tie(state, rep) = ift_iterate(T, bg, cfg);
          VerificationSummary sum = verify_solution(state, T, bg, cfg.weight_s);
          py::dict out;
          out["solve"] = report_to_dict(rep);
          out["verification"] = summary_to_dict(sum);
          out["hbar"] = field_to_numpy(state.hbar);
          out["xibar"] = field_to_numpy(state.xibar);
          return out;
        },
        py::arg("n") = 3, py::arg("N") = 33, py::arg("r_max") = 0.9,
        py::arg("fd_order") = 4, py::arg("profile") = "rho-power",
        py::arg("amplitude") = 1e-3, py::arg("decay") = 1.5, py::arg("width") = 0.25,
        py::arg("seed") = 1, py::arg("mode") = "ift-picard",
        py::arg("linear_tol") = 1e-10, py::arg("linear_max_iter") = 2000,
        py::arg("nonlinear_tol") = 1e-10, py::arg("nonlinear_max_iter") = 25,
        py::arg("weight_s") = 1.5, py::arg("continuation_steps") = 1,
        py::arg("preconditioner") = "diagonal", py::arg("jacobian_step") = 1e-4);

  m.def("verify_state",
        [](int n, int N, double r_max, int fd_order,
           const py::array_t<double>& hbar_arr, const py::array_t<double>& xibar_arr,
           const std::string& profile, double amplitude, double decay, double width,
           std::uint64_t seed, double weight_s) {
          Grid grid(n, N, r_max, fd_order);
          BackgroundGeometry bg(grid);
          ConstraintState state(grid);
          state.hbar = numpy_to_field(grid, Rank::sym2, Frame::rescaled, hbar_arr);
          state.xibar =
              numpy_to_field(grid, Rank::one_form, Frame::rescaled, xibar_arr);
          state.enforce_dirichlet();
          SourceTensor T = make_source(
              recipe_from_kwargs(profile, amplitude, decay, width, seed), grid, bg);
          return summary_to_dict(verify_solution(state, T, bg, weight_s));
        },
        py::arg("n"), py::arg("N"), py::arg("r_max"), py::arg("fd_order"),
        py::arg("hbar"), py::arg("xibar"), py::arg("profile") = "rho-power",
        py::arg("amplitude") = 1e-3, py::arg("decay") = 1.5, py::arg("width") = 0.25,
        py::arg("seed") = 1, py::arg("weight_s") = 1.5);

  m.def("nondegeneracy_probe", [](int n, int N, int trials) {
    Grid grid(n, N, 0.9, 4);
    BackgroundGeometry bg(grid);
    Geometry geo0(grid, bg, nullptr);
    OperatorContext ctx(geo0);
    return nondegeneracy_probe(ctx, trials);
  }, py::arg("n") = 3, py::arg("N") = 17, py::arg("trials") = 5);

  m.def("write_field_file", [](const std::string& path, int n, int N, double r_max,
                               int fd_order, const std::string& rank,
                               const std::string& frame,
                               const py::array_t<double>& arr) {
    Grid grid(n, N, r_max, fd_order);
    Rank rk = rank == "scalar" ? Rank::scalar
              : rank == "one_form" ? Rank::one_form : Rank::sym2;
    Frame fr = frame == "rescaled" ? Frame::rescaled : Frame::physical;
    write_field(path, numpy_to_field(grid, rk, fr, arr));
  });

  m.def("read_field_file", [](const std::string& path, int n, int N, double r_max,
                              int fd_order) {
    Grid grid(n, N, r_max, fd_order);
    Field f = read_field(path, grid);
    py::dict out;
    out["rank"] = static_cast<int>(f.rank());
    out["rescaled"] = f.frame() == Frame::rescaled;
    out["data"] = field_to_numpy(f);
    return out;
  });

  m.attr("__version__") = "0.1.0";
}
