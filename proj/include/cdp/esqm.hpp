#pragma once

#include "cdp/problem.hpp"
#include "cdp/subproblem.hpp"

#include <functional>
#include <iosfwd>
#include <limits>
#include <string_view>
#include <vector>

namespace cdp {

/// Parameters of the fixed-α method.
struct EsqmConfig {
  double beta = 0.7;    ///< backtracking factor, (0,1)
  double sigma = 0.5;   ///< sufficient-decrease factor, (0,1)
  double alpha = 1.0;   ///< proximal parameter
  double p0 = 1.0;      ///< initial penalty parameter
  double rho_p = 0.05;  ///< penalty increment
  double c_p = 50.0;    ///< penalty trigger: increase when t_k ≥ c_p‖d‖
  double d_tol = 1e-6;  ///< stop once ‖d‖ ≤ d_tol at a feasible iterate
  /// φ₁ ≤ phi1_tol counts as feasible for the stopping tests.
  double phi1_tol = 1e-6;
  /// ‖d‖∞ below this is treated as d = 0.
  double zero_tol = 1e-12;
  int max_iter = 1000;
  int max_backtracks = 60;

  /// Throws ConfigError naming the violated bound.
  void validate() const;
};

/// One row per outer iteration, describing iterate x^k and the step taken from it.
struct IterateTrace {
  int k = 0;
  Vector x;
  double d_norm = 0.0;
  double tau = 0.0;  ///< 0 on the terminating iteration (no step taken)
  double p = 0.0;
  double alpha = 0.0;
  double lambda = 0.0;
  double t_k = 0.0;
  double phi0 = 0.0;
  double phi1 = 0.0;
  double merit = 0.0;       ///< φ_{p_k}(x^k)
  double merit_next = 0.0;  ///< φ_{p_k}(x^{k+1})
  double A_k = 0.0;         ///< (φ₀(x^k) − m_φ₀)/p_k + max{φ₁(x^k), 0}
  /// φ₁(x^k) + ⟨w₁, d^k⟩, the linearized constraint at the new direction.
  double lin_constraint = 0.0;
  double step_sq = 0.0;  ///< ‖x^{k+1} − x^k‖²
  int backtracks = 0;
  /// d = 0 at an infeasible point; the penalty is increased and the run continues.
  bool infeasible_stationary = false;
  double wall_time_s = 0.0;
  /// Filled by observers for VI problems (κ_k) and network problems.
  double kappa = std::numeric_limits<double>::quiet_NaN();
  double objective_eval = std::numeric_limits<double>::quiet_NaN();
};

enum class SolveStatus { StationaryStop, DirectionTolStop, MaxIterStop };

std::string_view to_string(SolveStatus status);

struct SolveReport {
  Vector x_final;
  SolveStatus status = SolveStatus::MaxIterStop;
  std::vector<IterateTrace> trace;
  /// Certificate at x_final with the original-problem multiplier p·λ.
  KktCertificate certificate;
  double final_p = 0.0;
  double final_alpha = 0.0;
  double final_lambda = 0.0;  ///< subproblem multiplier λ ∈ [0,1]
};

/// Called after every trace row is complete; may fill kappa/objective_eval.
using IterationObserver = std::function<void(IterateTrace&)>;

struct LineSearchResult {
  double tau = 1.0;
  Vector x_new;
  double merit_new = 0.0;
  int backtracks = 0;
};

/// τ = β^q for the smallest q with φ_p(x + τd) ≤ φ_p(x) − στα‖d‖².
/// Throws LineSearchFailure when q would exceed max_backtracks.
LineSearchResult backtrack(const DifferenceProgram& prog, const Vector& x, const Vector& d, double p, double alpha,
                           double beta, double sigma, int max_backtracks);

/// Same test with φ_p(x) supplied by the caller.
LineSearchResult backtrack(const DifferenceProgram& prog, const Vector& x, double merit_x, const Vector& d, double p,
                           double alpha, double beta, double sigma, int max_backtracks);

/// p + ρ_p if t_k ≥ c_p · d_norm, else p.
double update_penalty(double p, double t_k, double d_norm, double c_p, double rho_p);

SolveReport run_esqm(const DifferenceProgram& prog, const Vector& x0, const EsqmConfig& config,
                     const IterationObserver& observer = {});

/// Writes the trace as CSV (17 significant digits). The alpha column is
/// present only when `with_alpha` is set.
void write_trace_csv(std::ostream& os, const std::vector<IterateTrace>& trace, bool with_alpha);

}  // namespace cdp
