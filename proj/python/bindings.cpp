// Python bindings: simulation, fitting and diagnostics on numpy arrays.

#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "svtime/diagnostics.hpp"
#include "svtime/errors.hpp"
#include "svtime/io.hpp"
#include "svtime/likelihood.hpp"
#include "svtime/mcmc.hpp"
#include "svtime/models.hpp"
#include "svtime/timechange.hpp"

namespace py = pybind11;
using namespace svtime;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Array to_array(std::span<const double> v) {
  Array out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

std::vector<double> to_vector(const Array& a) {
  if (a.ndim() != 1) throw ValidationError("expected a one-dimensional array");
  return {a.data(), a.data() + a.size()};
}

Observations make_observations(const Array& times, const Array& values) {
  Observations obs{to_vector(times), to_vector(values)};
  if (obs.times.size() != obs.values.size()) {
    throw ValidationError("times and values differ in length");
  }
  return obs;
}

py::dict simulate(const std::string& config_json) {
  const SimulationOutput sim = simulate_dataset(parse_config(config_json));
  py::dict out;
  out["times"] = to_array(sim.observations.times);
  out["values"] = to_array(sim.observations.values);
  out["fine_times"] = to_array(sim.x.times());
  out["x"] = to_array(sim.x.values());
  out["alpha"] = to_array(sim.alpha.values());
  return out;
}

py::dict fit(const std::string& config_json, const Array& times, const Array& values) {
  const RunConfig cfg = parse_config(config_json);
  const ModelSpec model = make_model(cfg.model);
  const Observations data = make_observations(times, values);
  Trace trace;
  {
    py::gil_scoped_release release;
    trace = run_chain(cfg.sampler, data, model, cfg.prior, cfg.params);
  }
  const std::size_t rows = trace.rows();
  const std::size_t cols = trace.param_names.size();
  py::array_t<double> draws({rows, cols});
  auto d = draws.mutable_unchecked<2>();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) d(r, c) = trace.draws[r][c];
  }
  py::dict acc;
  for (const auto& [key, t] : trace.acceptance) acc[py::str(key)] = t.rate();
  py::dict out;
  out["names"] = trace.param_names;
  out["iters"] = trace.iters;
  out["draws"] = draws;
  out["loglik"] = to_array(trace.loglik);
  out["acceptance"] = acc;
  out["scales"] = to_array(trace.final_scales);
  return out;
}

py::dict summary_row(const std::string& name, const Array& draws) {
  const SummaryRow r = summarize_column(name, to_vector(draws));
  py::dict out;
  out["param"] = r.name;
  out["mean"] = r.mean;
  out["sd"] = r.sd;
  out["q2.5"] = r.q025;
  out["median"] = r.median;
  out["q97.5"] = r.q975;
  return out;
}

py::tuple kde(const Array& draws, std::size_t points) {
  const auto grid = kde_export(to_vector(draws), points);
  Array x(static_cast<py::ssize_t>(grid.size())), y(static_cast<py::ssize_t>(grid.size()));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    x.mutable_data()[i] = grid[i].first;
    y.mutable_data()[i] = grid[i].second;
  }
  return py::make_tuple(x, y);
}

py::tuple ingest(const std::filesystem::path& path, std::optional<double> spacing,
                 std::optional<std::string> model_name) {
  std::optional<ModelSpec> model;
  if (model_name) model = make_model(*model_name);
  const Observations obs = ingest_csv(path, CsvSchema{spacing}, model ? &*model : nullptr);
  return py::make_tuple(to_array(obs.times), to_array(obs.values));
}

double girsanov(const Array& times, const Array& values,
                const std::function<double(double, double)>& drift) {
  return log_girsanov_U(Path(TimeGrid(to_vector(times)), to_vector(values)), drift);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Bayesian estimation of stochastic volatility diffusions by time-changed data augmentation";

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  m.def("models", &registered_models, "Names of the built-in models.");
  m.def("model_params", [](const std::string& name) { return make_model(name).param_names(); },
        py::arg("model"));

  m.def("simulate", &simulate, py::arg("config_json"),
        "Euler simulation from a JSON run configuration. Returns observations and the fine skeleton.");
  m.def("fit", &fit, py::arg("config_json"), py::arg("times"), py::arg("values"),
        "Runs the MCMC sampler on observations and returns the trace.");
  m.def("ingest_csv", &ingest, py::arg("path"), py::arg("spacing") = py::none(),
        py::arg("model") = py::none());

  m.def("summarize", &summary_row, py::arg("name"), py::arg("draws"));
  m.def("acf", [](const Array& s, std::size_t max_lag) { return to_array(acf(to_vector(s), max_lag)); },
        py::arg("series"), py::arg("max_lag"));
  m.def("iact", [](const Array& s) { return iact(to_vector(s)); }, py::arg("series"));
  m.def("kde", &kde, py::arg("draws"), py::arg("points") = 256);
  m.def("ks_two_sample", [](const Array& a, const Array& b) {
          return ks_two_sample(to_vector(a), to_vector(b));
        }, py::arg("a"), py::arg("b"));

  m.def("z_time", &z_time, py::arg("t"), py::arg("T"));
  m.def("u_time", &u_time, py::arg("s"), py::arg("T"));
  m.def("log_end_density", &log_end_density, py::arg("y1"), py::arg("y0"), py::arg("T"));
  m.def("log_girsanov", &girsanov, py::arg("times"), py::arg("values"), py::arg("drift"),
        "Left-point log Radon-Nikodym derivative of a unit-volatility path with drift(t, u).");
}
