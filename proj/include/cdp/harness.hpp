#pragma once

#include "cdp/esqm.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace cdp {

enum class Algorithm { Esqm, Aesqm };

std::string_view to_string(Algorithm alg);
/// Accepts "esqm" / "aesqm"; throws ConfigError otherwise.
Algorithm parse_algorithm(const std::string& name);

struct RunSpec {
  /// Exactly one of builtin / network_path is set.
  std::string builtin;
  std::string network_path;
  std::string scenario;  ///< low, mid or high; empty keeps the file's demand
  Algorithm algorithm = Algorithm::Esqm;
  /// key=value overrides applied on top of the defaults, in order.
  std::vector<std::pair<std::string, std::string>> overrides;
  std::string trace_path;
  std::string summary_path;
  std::uint64_t seed = 0;
  /// Fill objective_eval on every trace row by solving the lower level
  /// (network problems only; costs one equilibrium solve per iteration).
  bool evaluate_every_iterate = false;
};

struct RunSummary {
  std::string problem;
  std::string scenario;
  Algorithm algorithm = Algorithm::Esqm;
  SolveStatus status = SolveStatus::MaxIterStop;
  int iterations = 0;
  double phi0 = 0.0;
  double phi1 = 0.0;
  std::optional<double> gap;  ///< κ at the final point, VI problems only
  double p = 0.0;
  double alpha = 0.0;
  double lambda = 0.0;
  double kkt_stationarity = 0.0;
  double wall_time_s = 0.0;
  /// Every effective parameter, sorted by name.
  std::map<std::string, double> config;
  /// Network problems: objective after re-solving the equilibrium at y_final.
  std::optional<double> network_objective;
  std::optional<double> network_lower_gap;
  Vector x_final;
  std::vector<IterateTrace> trace;
};

/// Effective parameters for a spec with the overrides applied. Network
/// problems default to the standard experiment settings (p0 = 0.01,
/// ρ_p = 0.05, c_p = 50, β = 0.7, σ = 0.5, α or α₀ = 100, ρ_α = 10,
/// σ_α = 0.5, γ = 0.1, ε = 1, stop at ‖d‖ ≤ 1e-4 once κ ≤ ε + 1e-3).
/// Built-in problems use the EsqmConfig/AesqmConfig defaults, plus
/// γ = 0.1 and ε = 1e-4 for toy-vi. Throws ConfigError on unknown or
/// inapplicable keys and on values that fail validation.
std::map<std::string, double> effective_config(const RunSpec& spec);

/// Loads the problem, runs the algorithm, re-solves the lower level for
/// network problems and writes the requested outputs atomically.
/// Throws ParseError / ConfigError for bad input and the solver's
/// exceptions (LineSearchFailure, QpFailure, DomainError) otherwise.
RunSummary run_command(const RunSpec& spec);

/// 1 for ParseError/ConfigError, 2 for solver failures.
int exit_code_for(const std::exception& e);

/// JSON form of a summary (the trace is not included).
std::string summary_to_json(const RunSummary& s);
/// Reads back the fields written by summary_to_json; throws ParseError.
RunSummary summary_from_json(const std::string& text, const std::string& source = "<json>");

struct TableReport {
  std::string text;
  bool complete = false;  ///< every algorithm × scenario cell present
};

/// Objective table over the low/mid/high demand scenarios with rows for
/// both algorithms and four fixed reference methods. Missing cells print
/// as "--". The latest summary wins when a cell is given twice.
TableReport report_table(const std::vector<RunSummary>& summaries);

/// CSV with columns k, wall_time_s, objective_after_lower_solve, feasibility.
/// Feasibility is max{0, κ_k}/max{1, κ₀} when `vi` is set (κ from the
/// trace), otherwise the same formula applied to φ₁. The objective column
/// falls back to φ₀ where no lower-level evaluation was recorded.
void emit_feasibility_series(std::ostream& os, const std::vector<IterateTrace>& trace, bool vi);

/// Writes `content` to a temporary sibling of `path`, then renames it over
/// `path`. Throws Error on I/O failure.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace cdp
