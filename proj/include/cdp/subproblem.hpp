#pragma once

#include "cdp/problem.hpp"
#include "cdp/qp.hpp"

namespace cdp {

struct DirectionResult {
  Vector d;
  /// Multiplier of the linearized constraint, in [0, 1].
  double lambda = 0.0;
  /// max{φ₁(x) + ⟨w₁, d⟩, 0}
  double t_lin = 0.0;
  /// Full model value φ̃(x + d) + (α/2)‖d‖², constant term included.
  double subproblem_objective = 0.0;
  QpStatus qp_status = QpStatus::Optimal;
  double qp_residual = 0.0;
};

/// Solves
///   min_d  (1/p)⟨w₀, d⟩ + max{φ₁ + ⟨w₁, d⟩, 0} + (α/2)‖d‖²   s.t.  x + d ∈ X
/// through the epigraph QP in (d, s):
///   min (1/p)⟨w₀, d⟩ + s + (α/2)‖d‖²,  s ≥ 0,  s ≥ φ₁ + ⟨w₁, d⟩,  x + d ∈ X.
/// λ is read off the dual of the second epigraph row.
///
/// Throws QpFailure if the QP is infeasible (X empty, a bug upstream) or
/// fails to converge.
DirectionResult solve_direction(const Polyhedron& X, const Linearization& lin, const Vector& x, double p,
                                double alpha, const QpOptions& qp = {});

DirectionResult solve_direction(const DifferenceProgram& prog, const Vector& x, double p, double alpha);

/// t^k = max{φ₁(x^k) + ⟨w₁, d^k⟩, 0}.
inline double constraint_violation_estimate(const DirectionResult& result) { return result.t_lin; }

}  // namespace cdp
