#include "outer_loop.hpp"

#include "cdp/aesqm.hpp"

#include <chrono>
#include <cmath>

namespace cdp::detail {

SolveReport run_outer_loop(const DifferenceProgram& prog, const Vector& x0, const LoopParams& par,
                           const IterationObserver& observer) {
  if (x0.size() != prog.n) throw ConfigError("initial point has wrong dimension");
  if (prog.X.violation(x0) > 1e-6) throw ConfigError("initial point is not in X");

  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };

  SolveReport report;
  report.status = SolveStatus::MaxIterStop;
  Vector x = x0;
  double p = par.p0;
  double alpha = par.alpha0;
  double last_lambda = 0.0;
  double last_p = p;

  for (int k = 0; k < par.max_iter; ++k) {
    const Linearization lin = linearize(prog, x);
    const DirectionResult dir = solve_direction(prog.X, lin, x, p, alpha);
    const Vector& d = dir.d;

    IterateTrace row;
    row.k = k;
    row.x = x;
    row.d_norm = d.norm();
    row.p = p;
    row.alpha = alpha;
    row.lambda = dir.lambda;
    row.t_k = constraint_violation_estimate(dir);
    row.phi0 = lin.phi0;
    row.phi1 = lin.phi1;
    row.merit = lin.phi0 / p + std::max(lin.phi1, 0.0);
    row.A_k = std::isfinite(prog.m_phi0) ? (lin.phi0 - prog.m_phi0) / p + std::max(lin.phi1, 0.0)
                                         : std::numeric_limits<double>::quiet_NaN();
    row.lin_constraint = lin.phi1 + lin.w1.dot(d);
    last_lambda = dir.lambda;
    last_p = p;

    const bool feasible = lin.phi1 <= par.phi1_tol;
    const bool d_zero = d.lpNorm<Eigen::Infinity>() <= par.zero_tol;
    if (feasible && (d_zero || row.d_norm <= par.d_tol)) {
      report.status = d_zero ? SolveStatus::StationaryStop : SolveStatus::DirectionTolStop;
      row.tau = 0.0;
      row.merit_next = row.merit;
      row.wall_time_s = elapsed();
      if (observer) observer(row);
      report.trace.push_back(std::move(row));
      break;
    }
    row.infeasible_stationary = d_zero;

    const LineSearchResult ls =
        backtrack(prog, x, row.merit, d, p, alpha, par.beta, par.sigma, par.max_backtracks);
    row.tau = ls.tau;
    row.backtracks = ls.backtracks;
    row.merit_next = ls.merit_new;
    row.step_sq = (ls.x_new - x).squaredNorm();

    double alpha_next = alpha;
    if (par.adaptive) {
      // The model test is written at the unit step x + d.
      const double lhs = ls.tau == 1.0 ? ls.merit_new : merit_value(prog, x + d, p);
      const double rhs = model_value(lin, d, p) + 0.5 * par.sigma_alpha * alpha * d.squaredNorm();
      alpha_next = update_alpha(alpha, ls.tau, lhs, rhs, par.rho_alpha);
    }
    const double p_next = update_penalty(p, row.t_k, row.d_norm, par.c_p, par.rho_p);

    row.wall_time_s = elapsed();
    if (observer) observer(row);
    report.trace.push_back(std::move(row));

    x = ls.x_new;
    p = p_next;
    alpha = alpha_next;
  }

  report.x_final = x;
  report.final_p = last_p;
  report.final_alpha = report.trace.empty() ? alpha : report.trace.back().alpha;
  report.final_lambda = last_lambda;
  report.certificate = kkt_residual(prog, x, last_p * last_lambda);
  return report;
}

}  // namespace cdp::detail
