#pragma once

#include "cdp/vi_gap.hpp"

#include <string>
#include <vector>

namespace cdp {

/// Link data and path structure of a continuous network design instance.
///
/// Travel time on link a: t_a = A_a + B_a (v_a / (K_a + y_a))⁴.
/// Expansion cost: D_a y_a. Path flows h satisfy v = Δh, Λh = r, h ≥ 0.
struct NetworkInstance {
  std::vector<std::string> link_ids;
  std::vector<std::string> path_ids;
  std::vector<std::string> od_ids;
  Vector A, B, K, D;
  Matrix Delta;   ///< n_links × n_paths, 0/1
  Matrix Lambda;  ///< n_od × n_paths, 0/1, one 1 per column
  Vector r;       ///< demand per OD pair

  [[nodiscard]] Eigen::Index n_links() const { return A.size(); }
  [[nodiscard]] Eigen::Index n_paths() const { return Delta.cols(); }
  [[nodiscard]] Eigen::Index n_od() const { return r.size(); }

  /// Throws ConfigError naming the first violated invariant.
  void validate() const;

  /// Path indices belonging to OD pair w.
  [[nodiscard]] std::vector<Eigen::Index> paths_of(Eigen::Index w) const;
};

struct CndpState {
  Vector y;  ///< capacity expansions
  Vector v;  ///< link flows
  Vector h;  ///< path flows
};

/// Componentwise A + B (v/(K+y))⁴. Throws DomainError if K + y ≤ 0.
Vector travel_time(const NetworkInstance& inst, const Vector& y, const Vector& v);

/// Σ_a t_a(y_a, v_a) v_a + D_a y_a.
double cndp_objective(const NetworkInstance& inst, const Vector& y, const Vector& v);

/// Beckmann potential Σ_a A_a v_a + B_a v_a⁵ / (5 (K_a + y_a)⁴).
double beckmann_potential(const NetworkInstance& inst, const Vector& y, const Vector& v);

/// ⟨t(y,v), v⟩ − min over Ω of ⟨t(y,v), v'⟩: the linear (all-or-nothing) gap.
double linear_gap(const NetworkInstance& inst, const Vector& y, const Vector& v);

/// VI view of the instance: y = expansions (y ≥ 0), z = link flows v with
/// path flows h as the auxiliary block of Γ = {v : ∃h ≥ 0, v = Δh, Λh = r}.
/// F = t(y, v); Ψ₁ = cndp_objective; Ψ₂ = 0.
ViProblem build_vi(const NetworkInstance& inst);

struct EquilibriumOptions {
  double tol = 1e-8;
  int max_iter = 200000;
};

/// User equilibrium at fixed y: minimizes the Beckmann potential over Ω by
/// path-based Newton flow shifts toward the shortest path of each OD pair,
/// sweeping until the linear gap, an upper bound on κ, is ≤ tol. Throws
/// QpFailure if max_iter sweeps run out first.
CndpState solve_lower_equilibrium(const NetworkInstance& inst, const Vector& y, const EquilibriumOptions& opts = {});

inline CndpState solve_lower_equilibrium(const NetworkInstance& inst, const Vector& y, double tol) {
  EquilibriumOptions opts;
  opts.tol = tol;
  return solve_lower_equilibrium(inst, y, opts);
}

/// κ = ⟨t, v⟩ − min_{v'∈Ω} {⟨t, v'⟩ + ‖v' − v‖²/(2γ)} with t = t(y, v),
/// evaluated by a QP over path flows.
double kappa_measure(const NetworkInstance& inst, const Vector& y, const Vector& v, double gamma);

/// y = 0 and each OD demand split evenly over its paths.
CndpState initial_point(const NetworkInstance& inst);

/// Named demand presets: "low" (2.5, 5.0), "mid" (5.0, 10.0), "high" (10.0, 20.0).
Vector scenario_demand(const std::string& name);

/// Copy of `inst` with demand replaced; throws ConfigError on size mismatch.
NetworkInstance with_demand(const NetworkInstance& inst, const Vector& r);

/// Euclidean projection onto {x ≥ 0, Σx = total}.
Vector project_simplex(const Vector& x, double total);

}  // namespace cdp
