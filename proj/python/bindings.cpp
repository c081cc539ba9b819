#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <sstream>

#include "predtrig/cli.hpp"
#include "predtrig/config.hpp"
#include "predtrig/errors.hpp"
#include "predtrig/harness.hpp"
#include "predtrig/triggering.hpp"

namespace py = pybind11;
using namespace predtrig;

namespace {

using Rows = std::vector<std::vector<double>>;

Matrix to_matrix(const Rows& rows) {
  if (rows.empty()) throw DimensionError("matrix must have at least one row");
  const std::size_t cols = rows.front().size();
  std::vector<double> data;
  data.reserve(rows.size() * cols);
  for (const auto& r : rows) {
    if (r.size() != cols) throw DimensionError("ragged matrix rows");
    data.insert(data.end(), r.begin(), r.end());
  }
  return Matrix(rows.size(), cols, std::move(data));
}

Rows to_rows(const Matrix& m) {
  Rows out(m.rows(), std::vector<double>(m.cols()));
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out[i][j] = m(i, j);
  return out;
}

TriggerSpec make_spec(const std::string& kind, double cost, std::size_t horizon,
                      std::size_t max_horizon) {
  const auto c = CostSchedule::constant(cost);
  switch (parse_trigger_kind(kind)) {
    case TriggerKind::Event: return TriggerSpec::event(c);
    case TriggerKind::Predictive:
      return horizon == 0 ? TriggerSpec::predictive_zero_horizon(c)
                          : TriggerSpec::predictive(c, horizon);
    case TriggerKind::Self: return TriggerSpec::self(c, max_horizon);
  }
  throw ConfigError("unknown trigger kind");
}

py::dict point_dict(const TradeoffPoint& p) {
  py::dict d;
  d["trigger"] = to_string(p.kind);
  d["M"] = p.horizon;
  d["C"] = p.cost;
  d["runs"] = p.runs;
  d["K"] = p.steps;
  d["seed"] = p.seed;
  d["comm_mean"] = p.comm_mean;
  d["err_mean"] = p.err_mean;
  d["err_std"] = p.err_std;
  return d;
}

}  // namespace

PYBIND11_MODULE(_predtrig, m) {
  m.doc() = "Event, predictive and self triggered remote state estimation";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
  py::register_exception<RangeError>(m, "RangeError", PyExc_IndexError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

  py::class_<ModelProvider>(m, "Model")
      .def(py::init([](const Rows& a, const Rows& h, const Rows& q, const Rows& r) {
             return ModelProvider::lti(to_matrix(a), to_matrix(h), to_matrix(q), to_matrix(r));
           }),
           py::arg("A"), py::arg("H"), py::arg("Q"), py::arg("R"))
      .def_property_readonly("nx", &ModelProvider::state_dim)
      .def_property_readonly("ny", &ModelProvider::measurement_dim);

  py::class_<Prior>(m, "Prior")
      .def(py::init([](Vector mean, const Rows& cov) { return Prior{std::move(mean), to_matrix(cov)}; }),
           py::arg("mean"), py::arg("cov"))
      .def_readonly("mean", &Prior::mean)
      .def_property_readonly("cov", [](const Prior& p) { return to_rows(p.cov); });

  m.def("preset", [](const std::string& name) {
    const ScenarioConfig cfg = preset_config(name);
    return py::make_tuple(cfg.build_model(), cfg.build_prior());
  }, py::arg("name"), "Model and prior of a named preset (example1, example2).");

  m.def("steady_state_posterior",
        [](const ModelProvider& model) { return to_rows(steady_state_posterior(model)); },
        py::arg("model"));

  m.def("steady_state_gap",
        [](const ModelProvider& model, std::size_t steps) {
          return steady_state_gap(model, steady_state_posterior(model), steps);
        },
        py::arg("model"), py::arg("steps"));

  m.def("steady_state_period",
        [](const ModelProvider& model, double cost, std::size_t max_horizon) {
          return steady_state_period(model, cost, max_horizon);
        },
        py::arg("model"), py::arg("cost"), py::arg("max_horizon") = 10000,
        "Asymptotic self-trigger period, or None when the cost is never reached.");

  m.def("simulate",
        [](const ModelProvider& model, const Prior& prior, const std::string& kind, double cost,
           std::size_t steps, std::uint64_t seed, std::size_t horizon, std::size_t max_horizon) {
          const TriggerSpec spec = make_spec(kind, cost, horizon, max_horizon);
          SimulationTrace trace;
          {
            py::gil_scoped_release release;
            const Trajectory traj = paired_trajectory(model, prior, steps, seed, 0);
            trace = run_closed_loop(model, prior, spec, traj,
                                    closed_loop_schedule(model, prior, spec, steps));
          }
          std::vector<Vector> remote, filter, states;
          std::vector<double> signal;
          for (const auto& s : trace.steps) {
            states.push_back(s.state);
            filter.push_back(s.filter_estimate);
            remote.push_back(s.remote_estimate);
            signal.push_back(s.signals.combined);
          }
          const RunMetrics metrics = run_metrics(trace);
          py::dict d;
          d["transmit"] = trace.decisions();
          d["state"] = states;
          d["filter_estimate"] = filter;
          d["remote_estimate"] = remote;
          d["signal"] = signal;
          d["mse"] = metrics.mean_squared_error;
          d["communication"] = metrics.communication;
          return d;
        },
        py::arg("model"), py::arg("prior"), py::arg("trigger"), py::arg("cost"),
        py::arg("steps") = 200, py::arg("seed") = 1, py::arg("horizon") = 0,
        py::arg("max_horizon") = 10000);

  m.def("sweep",
        [](const ModelProvider& model, const Prior& prior, const std::string& kind,
           const std::vector<double>& costs, std::size_t steps, std::size_t runs,
           std::uint64_t seed, std::size_t horizon, std::size_t workers) {
          std::vector<TradeoffPoint> pts;
          {
            py::gil_scoped_release release;
            const TriggerSpec spec = make_spec(kind, 0.0, horizon, 10000);
            pts = sweep(model, prior, spec, costs, steps, runs, seed, MonteCarloOptions{workers});
          }
          py::list out;
          for (const auto& p : pts) out.append(point_dict(p));
          return out;
        },
        py::arg("model"), py::arg("prior"), py::arg("trigger"), py::arg("costs"),
        py::arg("steps") = 200, py::arg("runs") = 2000, py::arg("seed") = 1,
        py::arg("horizon") = 0, py::arg("workers") = 1);

  m.def("run_cli",
        [](const std::vector<std::string>& args) {
          std::ostringstream out, err;
          int code = 0;
          {
            py::gil_scoped_release release;
            code = cli::run(args, out, err);
          }
          return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Runs the command line tool in-process; returns (code, stdout, stderr).");
}
