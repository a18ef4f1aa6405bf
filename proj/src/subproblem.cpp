#include "cdp/subproblem.hpp"

#include <algorithm>
#include <string>

namespace cdp {

DirectionResult solve_direction(const Polyhedron& X, const Linearization& lin, const Vector& x, double p,
                                double alpha, const QpOptions& qp) {
  if (!(p > 0.0)) throw ConfigError("solve_direction: p must be positive");
  if (!(alpha > 0.0)) throw ConfigError("solve_direction: alpha must be positive");
  const Eigen::Index n = x.size();
  const Matrix& A = X.A_ineq();
  const Eigen::Index mx = A.rows();
  const Eigen::Index pe = X.Eq().rows();

  // Variables (d, s).
  Matrix Q = Matrix::Zero(n + 1, n + 1);
  Q.topLeftCorner(n, n).diagonal().setConstant(alpha);
  Vector q(n + 1);
  q << lin.w0 / p, 1.0;

  Matrix G = Matrix::Zero(2 + mx, n + 1);
  Vector g(2 + mx);
  G(0, n) = -1.0;  // s ≥ 0
  g(0) = 0.0;
  G.row(1).head(n) = lin.w1.transpose();  // φ₁ + ⟨w₁, d⟩ ≤ s
  G(1, n) = -1.0;
  g(1) = -lin.phi1;
  if (mx > 0) {
    G.bottomLeftCorner(mx, n) = A;
    g.tail(mx) = X.b_ineq() - A * x;
  }
  Matrix E = Matrix::Zero(pe, n + 1);
  Vector e(pe);
  if (pe > 0) {
    E.leftCols(n) = X.Eq();
    e = X.e0() - X.Eq() * x;
  }

  const QpSolution sol = qp_solve(QpProblem(std::move(Q), std::move(q), std::move(G), std::move(g), std::move(E),
                                            std::move(e)),
                                  qp);
  if (sol.status == QpStatus::Infeasible) throw QpFailure("direction subproblem infeasible: X is empty");
  if (sol.status != QpStatus::Optimal && sol.kkt_residual > 1e-7)
    throw QpFailure("direction subproblem did not converge (residual " + std::to_string(sol.kkt_residual) + ")");

  DirectionResult out;
  out.d = sol.d_star.head(n);
  out.lambda = std::clamp(sol.mu(1), 0.0, 1.0);
  const double lin_con = lin.phi1 + lin.w1.dot(out.d);
  out.t_lin = std::max(lin_con, 0.0);
  out.subproblem_objective =
      (lin.phi0 + lin.w0.dot(out.d)) / p + out.t_lin + 0.5 * alpha * out.d.squaredNorm();
  out.qp_status = sol.status;
  out.qp_residual = sol.kkt_residual;
  return out;
}

DirectionResult solve_direction(const DifferenceProgram& prog, const Vector& x, double p, double alpha) {
  return solve_direction(prog.X, linearize(prog, x), x, p, alpha);
}

}  // namespace cdp
