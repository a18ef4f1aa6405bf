#include "cdp/builtins.hpp"
#include "cdp/cndp.hpp"
#include "cdp/harness.hpp"
#include "cdp/network_io.hpp"
#include "cdp/qp.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using cdp::Matrix;
using cdp::Vector;

namespace {

py::dict summary_dict(const cdp::RunSummary& s) {
  py::dict d;
  d["problem"] = s.problem;
  d["scenario"] = s.scenario;
  d["algorithm"] = std::string(cdp::to_string(s.algorithm));
  d["status"] = std::string(cdp::to_string(s.status));
  d["iterations"] = s.iterations;
  d["phi0"] = s.phi0;
  d["phi1"] = s.phi1;
  d["gap"] = s.gap ? py::object(py::float_(*s.gap)) : py::object(py::none());
  d["p"] = s.p;
  d["alpha"] = s.alpha;
  d["lambda"] = s.lambda;
  d["kkt_stationarity"] = s.kkt_stationarity;
  d["wall_time_s"] = s.wall_time_s;
  d["config"] = s.config;
  d["network_objective"] =
      s.network_objective ? py::object(py::float_(*s.network_objective)) : py::object(py::none());
  d["x_final"] = s.x_final;

  // Per-iteration columns as plain lists; numpy can take it from there.
  std::vector<double> d_norm, tau, p, alpha, lambda, phi0, phi1, merit;
  for (const auto& row : s.trace) {
    d_norm.push_back(row.d_norm);
    tau.push_back(row.tau);
    p.push_back(row.p);
    alpha.push_back(row.alpha);
    lambda.push_back(row.lambda);
    phi0.push_back(row.phi0);
    phi1.push_back(row.phi1);
    merit.push_back(row.merit);
  }
  py::dict trace;
  trace["d_norm"] = d_norm;
  trace["tau"] = tau;
  trace["p"] = p;
  trace["alpha"] = alpha;
  trace["lambda"] = lambda;
  trace["phi0"] = phi0;
  trace["phi1"] = phi1;
  trace["merit"] = merit;
  d["trace"] = trace;
  return d;
}

cdp::RunSpec make_spec(const std::string& builtin, const std::string& network, const std::string& scenario,
                       const std::string& algorithm, const std::map<std::string, double>& overrides) {
  cdp::RunSpec spec;
  spec.builtin = builtin;
  spec.network_path = network;
  spec.scenario = scenario;
  spec.algorithm = cdp::parse_algorithm(algorithm);
  for (const auto& [key, value] : overrides) {
    std::ostringstream os;
    os.precision(17);
    os << value;
    spec.overrides.emplace_back(key, os.str());
  }
  return spec;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Sequential quadratic methods for constrained difference programs";

  // Translators registered later are tried first, so the base class goes first.
  py::register_exception<cdp::Error>(m, "SolverError", PyExc_RuntimeError);
  py::register_exception<cdp::ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<cdp::ParseError>(m, "ParseError", PyExc_ValueError);

  m.def("builtin_names", &cdp::builtin_names);

  m.def(
      "run",
      [](const std::string& builtin, const std::string& network, const std::string& scenario,
         const std::string& algorithm, const std::map<std::string, double>& overrides) {
        const auto spec = make_spec(builtin, network, scenario, algorithm, overrides);
        cdp::RunSummary s;
        {
          py::gil_scoped_release release;
          s = cdp::run_command(spec);
        }
        return summary_dict(s);
      },
      py::arg("builtin") = "", py::arg("network") = "", py::arg("scenario") = "", py::arg("algorithm") = "esqm",
      py::arg("overrides") = std::map<std::string, double>{},
      "Run one problem; exactly one of builtin/network must be given.");

  m.def(
      "effective_config",
      [](const std::string& builtin, const std::string& network, const std::string& algorithm,
         const std::map<std::string, double>& overrides) {
        return cdp::effective_config(make_spec(builtin, network, "", algorithm, overrides));
      },
      py::arg("builtin") = "", py::arg("network") = "", py::arg("algorithm") = "esqm",
      py::arg("overrides") = std::map<std::string, double>{});

  m.def(
      "solve_qp",
      [](const Matrix& Q, const Vector& q, const Matrix& G, const Vector& g, const Matrix& E, const Vector& e,
         double tol) {
        const auto sol = cdp::qp_solve(cdp::QpProblem(Q, q, G, g, E, e), tol, 100);
        py::dict d;
        d["d"] = sol.d_star;
        d["mu"] = sol.mu;
        d["nu"] = sol.nu;
        d["status"] = std::string(cdp::to_string(sol.status));
        d["kkt_residual"] = sol.kkt_residual;
        return d;
      },
      py::arg("Q"), py::arg("q"), py::arg("G"), py::arg("g"), py::arg("E"), py::arg("e"), py::arg("tol") = 1e-9,
      "min ½dᵀQd + qᵀd  s.t.  Gd ≤ g, Ed = e");

  m.def(
      "project_polyhedron",
      [](const Vector& target, const Matrix& C, const Vector& c0, const Matrix& E, const Vector& e0) {
        const auto pr = cdp::project_polyhedron(target, C, c0, E, e0);
        return py::make_tuple(pr.point, pr.ineq_duals, pr.eq_duals);
      },
      py::arg("target"), py::arg("C"), py::arg("c0"), py::arg("E"), py::arg("e0"));

  py::class_<cdp::NetworkInstance>(m, "Network")
      .def_readonly("link_ids", &cdp::NetworkInstance::link_ids)
      .def_readonly("path_ids", &cdp::NetworkInstance::path_ids)
      .def_readonly("od_ids", &cdp::NetworkInstance::od_ids)
      .def_readonly("A", &cdp::NetworkInstance::A)
      .def_readonly("B", &cdp::NetworkInstance::B)
      .def_readonly("K", &cdp::NetworkInstance::K)
      .def_readonly("D", &cdp::NetworkInstance::D)
      .def_readonly("Delta", &cdp::NetworkInstance::Delta)
      .def_readonly("Lambda", &cdp::NetworkInstance::Lambda)
      .def_readonly("demand", &cdp::NetworkInstance::r)
      .def("with_demand", [](const cdp::NetworkInstance& n, const Vector& r) { return cdp::with_demand(n, r); })
      .def("travel_time", [](const cdp::NetworkInstance& n, const Vector& y, const Vector& v) {
        return cdp::travel_time(n, y, v);
      })
      .def("objective", [](const cdp::NetworkInstance& n, const Vector& y, const Vector& v) {
        return cdp::cndp_objective(n, y, v);
      })
      .def(
          "equilibrium",
          [](const cdp::NetworkInstance& n, const Vector& y, double tol) {
            const auto st = cdp::solve_lower_equilibrium(n, y, tol);
            return py::make_tuple(st.v, st.h);
          },
          py::arg("y"), py::arg("tol") = 1e-8, "Link and path flows of the user equilibrium at expansions y.")
      .def("kappa", [](const cdp::NetworkInstance& n, const Vector& y, const Vector& v, double gamma) {
        return cdp::kappa_measure(n, y, v, gamma);
      })
      .def("to_text", [](const cdp::NetworkInstance& n) {
        std::ostringstream os;
        cdp::write_network(os, n);
        return os.str();
      });

  m.def("load_network", &cdp::load_network, py::arg("path"));
  m.def(
      "parse_network",
      [](const std::string& text) {
        std::istringstream in(text);
        return cdp::parse_network(in, "<string>");
      },
      py::arg("text"));
  m.def("synthetic_network", &cdp::synthetic_network, py::arg("demand"));
  m.def("scenario_demand", &cdp::scenario_demand, py::arg("name"));
}
