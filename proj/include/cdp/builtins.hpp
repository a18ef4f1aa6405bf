#pragma once

#include "cdp/cndp.hpp"
#include "cdp/problem.hpp"
#include "cdp/vi_gap.hpp"

#include <optional>
#include <string>
#include <vector>

namespace cdp {

/// A ready-to-run problem with its starting point.
struct BuiltinProblem {
  std::string name;
  std::string description;
  DifferenceProgram prog;
  Vector x0;
  /// Set for VI-constrained problems.
  std::optional<ViProblem> vi;
  double gamma = 0.0;
  double epsilon = 0.0;
};

/// Names accepted by make_builtin.
std::vector<std::string> builtin_names();

/// "dc-abs"       min x² − |x| over [−2, 2], x₀ = 0.3
/// "constrained"  min x  s.t. x² − 1 ≤ 0 over [−3, 3], x₀ = 0
/// "toy-vi"       min (z − 1)² s.t. z solves VI(z − y, [0, 2]), y ∈ [−1, 1]
/// Throws ConfigError for unknown names. `gamma`/`epsilon` override the
/// defaults of "toy-vi" (0.1 and 1e-4) when given.
BuiltinProblem make_builtin(const std::string& name, std::optional<double> gamma = std::nullopt,
                            std::optional<double> epsilon = std::nullopt);

/// Network-design problem with the starting point y = 0 and evenly split path flows.
BuiltinProblem make_network_problem(const NetworkInstance& inst, double gamma, double epsilon);

/// Four-link test network: two OD pairs, each served by two parallel links
/// (links 1–2 for the first pair, 3–4 for the second).
NetworkInstance synthetic_network(const Vector& demand);

}  // namespace cdp
