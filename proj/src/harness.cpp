#include "cdp/harness.hpp"

#include "cdp/aesqm.hpp"
#include "cdp/builtins.hpp"
#include "cdp/network_io.hpp"

#include <json.hpp>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace cdp {

namespace {

using json = nlohmann::json;

const std::set<std::string> kCommonKeys = {"beta",    "sigma",     "p0",       "rho_p",         "c_p",
                                           "d_tol",   "phi1_tol",  "zero_tol", "max_iter",      "max_backtracks"};
const std::set<std::string> kEsqmKeys = {"alpha"};
const std::set<std::string> kAesqmKeys = {"alpha0", "rho_alpha", "sigma_alpha"};
const std::set<std::string> kViKeys = {"gamma", "epsilon"};
const std::set<std::string> kNetworkKeys = {"lower_tol"};

bool is_network(const RunSpec& spec) { return !spec.network_path.empty(); }
bool is_vi(const RunSpec& spec) { return is_network(spec) || spec.builtin == "toy-vi"; }

void check_source(const RunSpec& spec) {
  if (spec.builtin.empty() == spec.network_path.empty())
    throw ConfigError("exactly one of a builtin problem or a network file must be given");
  if (!spec.builtin.empty()) {
    const auto names = builtin_names();
    if (std::find(names.begin(), names.end(), spec.builtin) == names.end())
      throw ConfigError("unknown builtin problem '" + spec.builtin + "'");
    if (!spec.scenario.empty()) throw ConfigError("a demand scenario only applies to network problems");
  }
}

double parse_value(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("value for '" + key + "' is not a number: '" + text + "'");
  }
}

int as_count(const std::map<std::string, double>& cfg, const std::string& key) {
  const double v = cfg.at(key);
  if (v < 1.0 || v != std::floor(v) || v > 1e9) throw ConfigError(key + " must be a positive integer");
  return static_cast<int>(v);
}

EsqmConfig esqm_config(const std::map<std::string, double>& cfg) {
  EsqmConfig c;
  c.beta = cfg.at("beta");
  c.sigma = cfg.at("sigma");
  c.alpha = cfg.at("alpha");
  c.p0 = cfg.at("p0");
  c.rho_p = cfg.at("rho_p");
  c.c_p = cfg.at("c_p");
  c.d_tol = cfg.at("d_tol");
  c.phi1_tol = cfg.at("phi1_tol");
  c.zero_tol = cfg.at("zero_tol");
  c.max_iter = as_count(cfg, "max_iter");
  c.max_backtracks = as_count(cfg, "max_backtracks");
  c.validate();
  return c;
}

AesqmConfig aesqm_config(const std::map<std::string, double>& cfg) {
  AesqmConfig c;
  c.beta = cfg.at("beta");
  c.sigma = cfg.at("sigma");
  c.alpha0 = cfg.at("alpha0");
  c.rho_alpha = cfg.at("rho_alpha");
  c.sigma_alpha = cfg.at("sigma_alpha");
  c.p0 = cfg.at("p0");
  c.rho_p = cfg.at("rho_p");
  c.c_p = cfg.at("c_p");
  c.d_tol = cfg.at("d_tol");
  c.phi1_tol = cfg.at("phi1_tol");
  c.zero_tol = cfg.at("zero_tol");
  c.max_iter = as_count(cfg, "max_iter");
  c.max_backtracks = as_count(cfg, "max_backtracks");
  c.validate();
  return c;
}

json number_or_null(const std::optional<double>& v) {
  if (!v || !std::isfinite(*v)) return nullptr;
  return *v;
}

std::optional<double> optional_number(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

// The y block of an iterate, with rounding-level negatives removed.
Vector expansions(const ViProblem& vi, const Vector& x) { return split_vi_point(vi, x).y.cwiseMax(0.0); }

SolveStatus parse_status(const std::string& s) {
  for (SolveStatus st : {SolveStatus::StationaryStop, SolveStatus::DirectionTolStop, SolveStatus::MaxIterStop}) {
    if (to_string(st) == s) return st;
  }
  throw ParseError("unknown status '" + s + "'");
}

}  // namespace

std::string_view to_string(Algorithm alg) { return alg == Algorithm::Esqm ? "esqm" : "aesqm"; }

Algorithm parse_algorithm(const std::string& name) {
  if (name == "esqm") return Algorithm::Esqm;
  if (name == "aesqm") return Algorithm::Aesqm;
  throw ConfigError("algorithm must be 'esqm' or 'aesqm', got '" + name + "'");
}

std::map<std::string, double> effective_config(const RunSpec& spec) {
  check_source(spec);
  std::map<std::string, double> cfg;
  if (is_network(spec)) {
    // Standard parameters for the network-design experiments.
    cfg = {{"beta", 0.7},     {"sigma", 0.5},      {"p0", 0.01},         {"rho_p", 0.05},
           {"c_p", 50.0},     {"d_tol", 1e-4},     {"phi1_tol", 1e-3},   {"zero_tol", 1e-12},
           {"max_iter", 20000.0}, {"max_backtracks", 60.0}, {"gamma", 0.1}, {"epsilon", 1.0},
           {"lower_tol", 1e-8}};
    if (spec.algorithm == Algorithm::Esqm) {
      cfg["alpha"] = 100.0;
    } else {
      cfg["alpha0"] = 100.0;
      cfg["rho_alpha"] = 10.0;
      cfg["sigma_alpha"] = 0.5;
    }
  } else {
    // The small analytic problems use the library defaults.
    const EsqmConfig e;
    const AesqmConfig a;
    cfg = {{"beta", e.beta},         {"sigma", e.sigma},       {"p0", e.p0},
           {"rho_p", e.rho_p},       {"c_p", e.c_p},           {"d_tol", e.d_tol},
           {"phi1_tol", e.phi1_tol}, {"zero_tol", e.zero_tol}, {"max_iter", static_cast<double>(e.max_iter)},
           {"max_backtracks", static_cast<double>(e.max_backtracks)}};
    if (spec.algorithm == Algorithm::Esqm) {
      cfg["alpha"] = e.alpha;
    } else {
      cfg["alpha0"] = a.alpha0;
      cfg["rho_alpha"] = a.rho_alpha;
      cfg["sigma_alpha"] = a.sigma_alpha;
    }
    if (is_vi(spec)) {
      cfg["gamma"] = 0.1;
      cfg["epsilon"] = 1e-4;
    }
  }

  for (const auto& [key, text] : spec.overrides) {
    const bool known = kCommonKeys.count(key) || kEsqmKeys.count(key) || kAesqmKeys.count(key) ||
                       kViKeys.count(key) || kNetworkKeys.count(key);
    if (!known) throw ConfigError("unknown parameter '" + key + "'");
    if (!cfg.count(key)) {
      throw ConfigError("parameter '" + key + "' does not apply to " + std::string(to_string(spec.algorithm)) +
                        " on this problem");
    }
    cfg[key] = parse_value(key, text);
  }

  // Validation of the algorithm parameters happens here so that a bad
  // override is reported before any work is done.
  if (spec.algorithm == Algorithm::Esqm) {
    esqm_config(cfg);
  } else {
    aesqm_config(cfg);
  }
  if (cfg.count("gamma") && !(cfg["gamma"] > 0.0)) throw ConfigError("gamma must be positive");
  if (cfg.count("epsilon") && !(cfg["epsilon"] >= 0.0)) throw ConfigError("epsilon must be nonnegative");
  if (cfg.count("lower_tol") && !(cfg["lower_tol"] > 0.0)) throw ConfigError("lower_tol must be positive");
  return cfg;
}

RunSummary run_command(const RunSpec& spec) {
  const auto cfg = effective_config(spec);

  std::optional<NetworkInstance> net;
  BuiltinProblem problem;
  if (is_network(spec)) {
    net = load_network(spec.network_path);
    if (!spec.scenario.empty()) net = with_demand(*net, scenario_demand(spec.scenario));
    problem = make_network_problem(*net, cfg.at("gamma"), cfg.at("epsilon"));
    problem.name = spec.network_path;
  } else {
    std::optional<double> gamma, eps;
    if (cfg.count("gamma")) gamma = cfg.at("gamma");
    if (cfg.count("epsilon")) eps = cfg.at("epsilon");
    problem = make_builtin(spec.builtin, gamma, eps);
  }

  const double eps = problem.vi ? problem.epsilon : 0.0;
  const double lower_tol = cfg.count("lower_tol") ? cfg.at("lower_tol") : 1e-8;
  IterationObserver observer = [&](IterateTrace& row) {
    // φ₁ = gap − ε on the relaxed program, so κ comes for free.
    if (problem.vi) row.kappa = row.phi1 + eps;
    if (net && spec.evaluate_every_iterate) {
      const Vector y = expansions(*problem.vi, row.x);
      const CndpState eq = solve_lower_equilibrium(*net, y, lower_tol);
      row.objective_eval = cndp_objective(*net, y, eq.v);
    }
  };

  const auto start = std::chrono::steady_clock::now();
  SolveReport report = spec.algorithm == Algorithm::Esqm
                           ? run_esqm(problem.prog, problem.x0, esqm_config(cfg), observer)
                           : run_aesqm(problem.prog, problem.x0, aesqm_config(cfg), observer);

  RunSummary s;
  s.problem = is_network(spec) ? spec.network_path : spec.builtin;
  s.scenario = spec.scenario;
  s.algorithm = spec.algorithm;
  s.status = report.status;
  s.iterations = static_cast<int>(report.trace.size());
  s.phi0 = problem.prog.phi0(report.x_final);
  s.phi1 = problem.prog.phi1(report.x_final);
  if (problem.vi) s.gap = s.phi1 + eps;
  s.p = report.final_p;
  s.alpha = report.final_alpha;
  s.lambda = report.final_lambda;
  s.kkt_stationarity = report.certificate.stationarity_residual;
  s.config = cfg;
  s.x_final = report.x_final;
  if (net) {
    const Vector y = expansions(*problem.vi, report.x_final);
    const CndpState eq = solve_lower_equilibrium(*net, y, lower_tol);
    s.network_objective = cndp_objective(*net, y, eq.v);
    s.network_lower_gap = linear_gap(*net, y, eq.v);
  }
  s.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  s.trace = std::move(report.trace);

  if (!spec.trace_path.empty()) {
    std::ostringstream os;
    write_trace_csv(os, s.trace, spec.algorithm == Algorithm::Aesqm);
    write_file_atomic(spec.trace_path, os.str());
  }
  if (!spec.summary_path.empty()) write_file_atomic(spec.summary_path, summary_to_json(s) + "\n");
  return s;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ParseError*>(&e) || dynamic_cast<const ConfigError*>(&e)) return 1;
  return 2;
}

std::string summary_to_json(const RunSummary& s) {
  json j;
  j["problem"] = s.problem;
  j["scenario"] = s.scenario;
  j["algorithm"] = std::string(to_string(s.algorithm));
  j["status"] = std::string(to_string(s.status));
  j["iterations"] = s.iterations;
  j["phi0"] = s.phi0;
  j["phi1"] = s.phi1;
  j["gap"] = number_or_null(s.gap);
  j["p"] = s.p;
  j["alpha"] = s.alpha;
  j["lambda"] = s.lambda;
  j["kkt_stationarity"] = s.kkt_stationarity;
  j["wall_time_s"] = s.wall_time_s;
  j["config"] = s.config;
  j["network_objective"] = number_or_null(s.network_objective);
  j["network_lower_gap"] = number_or_null(s.network_lower_gap);
  j["x_final"] = std::vector<double>(s.x_final.data(), s.x_final.data() + s.x_final.size());
  return j.dump(2);
}

RunSummary summary_from_json(const std::string& text, const std::string& source) {
  try {
    const json j = json::parse(text);
    RunSummary s;
    s.problem = j.at("problem").get<std::string>();
    s.scenario = j.at("scenario").get<std::string>();
    s.algorithm = parse_algorithm(j.at("algorithm").get<std::string>());
    s.status = parse_status(j.at("status").get<std::string>());
    s.iterations = j.at("iterations").get<int>();
    s.phi0 = j.at("phi0").get<double>();
    s.phi1 = j.at("phi1").get<double>();
    s.gap = optional_number(j, "gap");
    s.p = j.at("p").get<double>();
    s.alpha = j.at("alpha").get<double>();
    s.lambda = j.at("lambda").get<double>();
    s.kkt_stationarity = j.value("kkt_stationarity", 0.0);
    s.wall_time_s = j.at("wall_time_s").get<double>();
    s.config = j.at("config").get<std::map<std::string, double>>();
    s.network_objective = optional_number(j, "network_objective");
    s.network_lower_gap = optional_number(j, "network_lower_gap");
    const auto x = j.at("x_final").get<std::vector<double>>();
    s.x_final = Eigen::Map<const Vector>(x.data(), static_cast<Eigen::Index>(x.size()));
    return s;
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception& e) {
    throw ParseError(source + ": " + e.what());
  }
}

TableReport report_table(const std::vector<RunSummary>& summaries) {
  static const std::array<std::string, 3> scenarios = {"low", "mid", "high"};
  struct Row {
    std::string name;
    std::array<std::optional<double>, 3> cells;
  };
  std::vector<Row> rows = {
      {"CDP-ESQM", {}},
      {"CDP-AESQM", {}},
      {"MINOS", {92.10, 211.25, 557.14}},
      {"H-J", {90.10, 215.08, 557.22}},
      {"EDO", {92.41, 201.84, 540.74}},
      {"IOA", {100.25, 210.86, 556.61}},
  };
  for (const RunSummary& s : summaries) {
    if (!s.network_objective) continue;
    const auto it = std::find(scenarios.begin(), scenarios.end(), s.scenario);
    if (it == scenarios.end()) continue;
    const auto col = static_cast<std::size_t>(it - scenarios.begin());
    rows[s.algorithm == Algorithm::Esqm ? 0 : 1].cells[col] = *s.network_objective;
  }

  std::ostringstream os;
  os << std::left << std::setw(12) << "method";
  for (const auto& sc : scenarios) {
    const Vector r = scenario_demand(sc);
    std::ostringstream head;
    head << "r=(" << std::fixed << std::setprecision(1) << r(0) << "," << r(1) << ")";
    os << std::right << std::setw(16) << head.str();
  }
  os << '\n';
  bool complete = !summaries.empty();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    os << std::left << std::setw(12) << rows[i].name;
    for (const auto& cell : rows[i].cells) {
      std::ostringstream c;
      if (cell) {
        c << std::fixed << std::setprecision(2) << *cell;
      } else {
        c << "--";
        complete = false;
      }
      os << std::right << std::setw(16) << c.str();
    }
    os << '\n';
  }
  return {os.str(), complete};
}

void emit_feasibility_series(std::ostream& os, const std::vector<IterateTrace>& trace, bool vi) {
  os << "k,wall_time_s,objective_after_lower_solve,feasibility\n";
  if (trace.empty()) return;
  const auto measure = [vi](const IterateTrace& row) { return vi ? row.kappa : row.phi1; };
  const double denom = std::max(1.0, measure(trace.front()));
  const auto prec = os.precision(17);
  for (const IterateTrace& row : trace) {
    const double obj = std::isnan(row.objective_eval) ? row.phi0 : row.objective_eval;
    os << row.k << ',' << row.wall_time_s << ',' << obj << ',' << std::max(0.0, measure(row)) / denom << '\n';
  }
  os.precision(prec);
}

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw Error("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw Error("cannot rename " + tmp.string() + " to " + path + ": " + ec.message());
  }
}

}  // namespace cdp
