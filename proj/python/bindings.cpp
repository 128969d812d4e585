#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "chemostab/commands.hpp"
#include "chemostab/convergence.hpp"

namespace py = pybind11;
using namespace chemostab;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<double> to_vector(const Array& a) { return {a.data(), a.data() + a.size()}; }

Array to_array(std::span<const double> v) {
  Array out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

Field line_field(const Array& values, double length) {
  return Field(Grid::line(length, static_cast<int>(values.size())), to_vector(values));
}

py::dict trajectory_dict(const Trajectory& traj) {
  const auto& grid = traj.samples.front().grid();
  const auto rows = static_cast<py::ssize_t>(traj.samples.size());
  const auto cols = static_cast<py::ssize_t>(grid.size());
  Array u({rows, cols});
  Array v({rows, cols});
  for (py::ssize_t k = 0; k < rows; ++k) {
    const auto& s = traj.samples[k];
    std::copy(s.u.values().begin(), s.u.values().end(), u.mutable_data(k, 0));
    std::copy(s.v.values().begin(), s.v.values().end(), v.mutable_data(k, 0));
  }
  std::vector<double> x(grid.size());
  std::vector<double> y(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto p = grid.position(i);
    x[i] = p[0];
    y[i] = p[1];
  }
  py::dict d;
  d["t"] = to_array(traj.times());
  d["u"] = u;
  d["v"] = v;
  d["x"] = to_array(x);
  d["y"] = to_array(y);
  d["accepted"] = traj.stats.accepted;
  d["rejected"] = traj.stats.rejected;
  return d;
}

py::dict report_dict(const StabilityReport& r) {
  py::dict d;
  d["conclusion"] = std::string(to_string(r.conclusion));
  d["theta"] = r.theta;
  d["eps"] = r.eps;
  d["H1"] = std::string(to_string(r.h1.status));
  d["H2"] = std::string(to_string(r.h2.status));
  d["H3"] = std::string(to_string(r.h3.status));
  auto value = [](const std::optional<KnownConstant>& c) -> std::optional<double> {
    return c ? std::optional<double>(c->value) : std::nullopt;
  };
  d["eta"] = value(r.constants.eta);
  d["M2"] = value(r.constants.M2);
  d["C3_tilde"] = value(r.constants.C3_tilde);
  d["notes"] = r.notes;
  return d;
}

}  // namespace

PYBIND11_MODULE(_chemostab, m) {
  m.doc() = "Nonlocal chemotaxis solver and stability checks";
  m.attr("__version__") = "0.1.0";

  // Later registrations are tried first, so the subclass goes last.
  py::register_exception<Error>(m, "ChemostabError", PyExc_RuntimeError);
  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);

  py::class_<ModelParams>(m, "ModelParams")
      .def(py::init([](double chi, double tau, double lambda, double mu) {
             ModelParams p{chi, tau, lambda, mu};
             p.validate();
             return p;
           }),
           py::arg("chi") = 0.0, py::arg("tau") = 1.0, py::arg("lambda_") = 1.0, py::arg("mu") = 1.0)
      .def_readwrite("chi", &ModelParams::chi)
      .def_readwrite("tau", &ModelParams::tau)
      .def_readwrite("lambda_", &ModelParams::lambda)
      .def_readwrite("mu", &ModelParams::mu);

  py::class_<StepperConfig>(m, "StepperConfig")
      .def(py::init<>())
      .def_readwrite("dt_init", &StepperConfig::dt_init)
      .def_readwrite("dt_min", &StepperConfig::dt_min)
      .def_readwrite("dt_max", &StepperConfig::dt_max)
      .def_readwrite("safety", &StepperConfig::safety)
      .def_readwrite("positivity_floor", &StepperConfig::positivity_floor)
      .def_readwrite("theta", &StepperConfig::theta)
      .def_readwrite("error_tol", &StepperConfig::error_tol)
      .def_readwrite("adaptive", &StepperConfig::adaptive)
      .def_readwrite("clamp_budget", &StepperConfig::clamp_budget);

  m.def("laplacian_neumann",
        [](const Array& values, double length) {
          return to_array(laplacian_neumann(line_field(values, length)).values());
        },
        py::arg("values"), py::arg("length") = 1.0, "Neumann Laplacian of nodal values on (0, length).");

  m.def("integrate", [](const Array& values, double length) { return integrate(line_field(values, length)); },
        py::arg("values"), py::arg("length") = 1.0, "Trapezoid integral of nodal values on (0, length).");

  m.def("simulate",
        [](const Array& u0, const Array& v0, double t_end, double a0, double a1, double a2,
           const ModelParams& params, double length, double sample_interval, const StepperConfig& stepper) {
          if (u0.size() != v0.size()) throw StructuralError("u0 and v0 differ in length");
          const Field u = line_field(u0, length);
          const Field v(u.grid_ptr(), to_vector(v0));
          const auto coeffs = CoefficientSet::constant(u.grid_ptr(), a0, a1, a2);
          RunOptions options;
          options.sample_interval = sample_interval;
          std::optional<Trajectory> traj;
          {
            py::gil_scoped_release release;
            traj = run(ModelState(0.0, u, v), t_end, coeffs, params, stepper, options);
          }
          return trajectory_dict(*traj);
        },
        py::arg("u0"), py::arg("v0"), py::arg("t_end"), py::arg("a0") = 1.0, py::arg("a1") = 1.0,
        py::arg("a2") = 0.0, py::arg("params") = ModelParams{}, py::arg("length") = 1.0,
        py::arg("sample_interval") = 0.0, py::arg("stepper") = StepperConfig{},
        "1D run with constant coefficients; returns t, x, u, v arrays.");

  m.def("simulate_config",
        [](const std::string& text, const std::filesystem::path& base_dir) {
          const RunConfig config = parse_config(text, base_dir);
          const GridPtr grid = build_grid(config.grid);
          const CoefficientSet coeffs = build_coefficients(config, grid);
          const auto seeds = build_seeds(config, grid);
          RunOptions options;
          options.sample_interval = config.time.sample_interval;
          std::optional<Trajectory> traj;
          {
            py::gil_scoped_release release;
            traj = run(ModelState(config.time.t0, seeds.front().u, seeds.front().v), config.time.t_end, coeffs,
                       config.params, config.stepper, options);
          }
          return trajectory_dict(*traj);
        },
        py::arg("config"), py::arg("base_dir") = std::filesystem::path{},
        "Runs the first initial datum of a JSON config.");

  m.def("compute_m2_convex",
        [](double a0, double a1, double a2, const ModelParams& params, double length) {
          const auto grid = Grid::line(length, 11);
          const ConvexConstants c = compute_M2_convex(CoefficientSet::constant(grid, a0, a1, a2), params, 1);
          return py::make_tuple(c.M0, c.M0ai, c.M2);
        },
        py::arg("a0"), py::arg("a1"), py::arg("a2"), py::arg("params"), py::arg("length") = 1.0,
        "Convex-domain bound (M0, M0ai, M2) for constant coefficients in 1D.");

  m.def("stability",
        [](const std::string& text, const std::filesystem::path& base_dir) {
          const RunConfig config = parse_config(text, base_dir);
          const GridPtr grid = build_grid(config.grid);
          const CoefficientSet coeffs = build_coefficients(config, grid);
          const auto resolved = resolve_constants(config, coeffs, config.constants.measure, 1);
          return report_dict(estimate_theta(coeffs, config.params, resolved.constants,
                                            stability_window(config, coeffs), config.stability.n_samples));
        },
        py::arg("config"), py::arg("base_dir") = std::filesystem::path{},
        "Hypothesis verdicts and theta for a JSON config.");

  m.def("canonical_config", [](const std::string& text) { return serialize_config(parse_config(text)); },
        py::arg("config"), "Validated config in canonical JSON form.");

  m.def("temporal_order",
        [](double theta, std::vector<double> dts, double t_end) {
          StepperConfig cfg;
          cfg.theta = theta;
          const auto coeffs = CoefficientSet::constant(Grid::line(1.0, 5), 1.0, 1.0, 0.0);
          return temporal_order(coeffs, ModelParams{}, cfg, dts, t_end).observed_order();
        },
        py::arg("theta"), py::arg("dts") = std::vector<double>{0.04, 0.02, 0.01}, py::arg("t_end") = 2.0,
        "Richardson order estimate on the flat logistic problem.");

  m.def("run_command",
        [](const std::string& command, const std::filesystem::path& config_path,
           std::optional<std::filesystem::path> out_dir, int threads, std::optional<std::uint64_t> seed) {
          CommandOptions options;
          options.out_dir = std::move(out_dir);
          options.threads = threads;
          options.seed = seed;
          std::ostringstream out, err;
          int code;
          {
            py::gil_scoped_release release;
            code = run_command(command, config_path, options, out, err);
          }
          return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("command"), py::arg("config"), py::arg("out_dir") = py::none(), py::arg("threads") = 1,
        py::arg("seed") = py::none(), "Runs a CLI command; returns (exit_code, stdout, stderr).");
}
