#pragma once

#include "cdp/types.hpp"

#include <string_view>

namespace cdp {

/// Convex quadratic program
///
///   minimize    ½ dᵀQd + qᵀd
///   subject to  G d ≤ g,  E d = e.
///
/// The constructor checks dimensions, symmetry of Q and (for n ≤ 50)
/// positive semidefiniteness; it throws ConfigError on violation.
struct QpProblem {
  Matrix Q;
  Vector q;
  Matrix G;
  Vector g;
  Matrix E;
  Vector e;

  QpProblem(Matrix Q, Vector q, Matrix G, Vector g, Matrix E, Vector e);

  /// Unconstrained problem.
  QpProblem(Matrix Q, Vector q);

  [[nodiscard]] Eigen::Index num_variables() const { return q.size(); }
  [[nodiscard]] Eigen::Index num_inequalities() const { return g.size(); }
  [[nodiscard]] Eigen::Index num_equalities() const { return e.size(); }
  [[nodiscard]] double objective(const Vector& d) const { return 0.5 * d.dot(Q * d) + q.dot(d); }
};

enum class QpStatus { Optimal, MaxIterations, Infeasible };

std::string_view to_string(QpStatus status);

struct QpSolution {
  Vector d_star;
  Vector mu;  ///< inequality duals, ≥ 0
  Vector nu;  ///< equality duals
  QpStatus status = QpStatus::MaxIterations;
  /// Scaled ∞-norm of the stationarity, feasibility and complementarity
  /// residuals (see qp_kkt_residual).
  double kkt_residual = 0.0;
  int iterations = 0;
};

struct QpOptions {
  double tol = 1e-9;
  int max_iter = 100;
  /// Re-solve the KKT system on the identified active set after the
  /// interior-point phase; accepted only when it lowers the residual.
  bool polish = true;
};

/// KKT residual of (d, mu, nu) for `problem`, each block divided by
/// (1 + magnitude of the data it is measured against):
///   stationarity     ‖Qd + q + Gᵀμ + Eᵀν‖∞ / (1 + ‖q‖∞)
///   equality         ‖Ed − e‖∞ / (1 + ‖e‖∞)
///   inequality       ‖(Gd − g)₊‖∞ / (1 + ‖g‖∞)
///   complementarity  maxᵢ |μᵢ (Gd − g)ᵢ| / (1 + ‖q‖∞)
///   dual sign        ‖(−μ)₊‖∞ / (1 + ‖q‖∞)
double qp_kkt_residual(const QpProblem& problem, const Vector& d, const Vector& mu, const Vector& nu);

/// Dense primal-dual interior point with Mehrotra predictor-corrector.
QpSolution qp_solve(const QpProblem& problem, const QpOptions& options = {});

/// Convenience overload matching the (tol, max_iter) calling convention.
QpSolution qp_solve(const QpProblem& problem, double tol, int max_iter);

/// Euclidean projection onto a polyhedron, with KKT multipliers.
struct Projection {
  Vector point;
  Vector aux;         ///< auxiliary (lifting) variables, empty unless lifted
  Vector ineq_duals;  ///< ≥ 0, one per inequality row
  Vector eq_duals;    ///< one per equality row
  double kkt_residual = 0.0;
};

/// Projects `target` onto {θ : Cθ ≤ c0, Eq θ = e0}. The duals satisfy
/// target − point = Cᵀ ineq_duals + Eqᵀ eq_duals. Throws QpFailure if the
/// set is empty or the solve does not converge.
Projection project_polyhedron(const Vector& target, const Matrix& C, const Vector& c0, const Matrix& Eq,
                              const Vector& e0, double tol = 1e-9);

/// Projection onto a polyhedron given as the image of a lifted description
/// {θ : ∃w, Cθ + C_aux w ≤ c0, Eq θ + Eq_aux w = e0}. Only θ enters the
/// distance. Same dual convention as project_polyhedron on the θ-block.
Projection project_lifted(const Vector& target, const Matrix& C, const Matrix& C_aux, const Vector& c0,
                          const Matrix& Eq, const Matrix& Eq_aux, const Vector& e0, double tol = 1e-9);

}  // namespace cdp
