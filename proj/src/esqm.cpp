#include "cdp/esqm.hpp"

#include "outer_loop.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace cdp {

namespace {

void require_open_unit(double v, const char* name) {
  if (!(v > 0.0 && v < 1.0)) {
    std::ostringstream msg;
    msg << name << " must lie in (0,1), got " << v;
    throw ConfigError(msg.str());
  }
}

void require_positive(double v, const char* name) {
  if (!(v > 0.0)) {
    std::ostringstream msg;
    msg << name << " must be > 0, got " << v;
    throw ConfigError(msg.str());
  }
}

}  // namespace

void EsqmConfig::validate() const {
  require_open_unit(beta, "beta");
  require_open_unit(sigma, "sigma");
  require_positive(alpha, "alpha");
  require_positive(p0, "p0");
  require_positive(rho_p, "rho_p");
  require_positive(c_p, "c_p");
  if (!(d_tol >= 0.0)) throw ConfigError("d_tol must be >= 0");
  if (max_iter < 1) throw ConfigError("max_iter must be >= 1");
  if (max_backtracks < 0) throw ConfigError("max_backtracks must be >= 0");
}

std::string_view to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::StationaryStop: return "StationaryStop";
    case SolveStatus::DirectionTolStop: return "DirectionTolStop";
    case SolveStatus::MaxIterStop: return "MaxIterStop";
  }
  return "Unknown";
}

LineSearchResult backtrack(const DifferenceProgram& prog, const Vector& x, const Vector& d, double p, double alpha,
                           double beta, double sigma, int max_backtracks) {
  return backtrack(prog, x, merit_value(prog, x, p), d, p, alpha, beta, sigma, max_backtracks);
}

LineSearchResult backtrack(const DifferenceProgram& prog, const Vector& x, double merit_x, const Vector& d, double p,
                           double alpha, double beta, double sigma, int max_backtracks) {
  const double decrease = sigma * alpha * d.squaredNorm();
  LineSearchResult out;
  double tau = 1.0;
  for (int q = 0; q <= max_backtracks; ++q) {
    Vector trial = x + tau * d;
    const double m = merit_value(prog, trial, p);
    if (m <= merit_x - tau * decrease) {
      out.tau = tau;
      out.x_new = std::move(trial);
      out.merit_new = m;
      out.backtracks = q;
      return out;
    }
    tau *= beta;
  }
  std::ostringstream msg;
  msg << "line search failed after " << max_backtracks << " backtracks (|d| = " << d.norm() << ", p = " << p << ")";
  throw LineSearchFailure(msg.str());
}

double update_penalty(double p, double t_k, double d_norm, double c_p, double rho_p) {
  return t_k >= c_p * d_norm ? p + rho_p : p;
}

SolveReport run_esqm(const DifferenceProgram& prog, const Vector& x0, const EsqmConfig& config,
                     const IterationObserver& observer) {
  config.validate();
  detail::LoopParams par;
  par.beta = config.beta;
  par.sigma = config.sigma;
  par.alpha0 = config.alpha;
  par.adaptive = false;
  par.p0 = config.p0;
  par.rho_p = config.rho_p;
  par.c_p = config.c_p;
  par.d_tol = config.d_tol;
  par.phi1_tol = config.phi1_tol;
  par.zero_tol = config.zero_tol;
  par.max_iter = config.max_iter;
  par.max_backtracks = config.max_backtracks;
  return detail::run_outer_loop(prog, x0, par, observer);
}

void write_trace_csv(std::ostream& os, const std::vector<IterateTrace>& trace, bool with_alpha) {
  os << "k,d_norm,tau,p,";
  if (with_alpha) os << "alpha,";
  os << "lambda,t_k,phi0,phi1,merit,A_k,backtracks\n";
  const auto old_prec = os.precision(17);
  for (const IterateTrace& r : trace) {
    os << r.k << ',' << r.d_norm << ',' << r.tau << ',' << r.p << ',';
    if (with_alpha) os << r.alpha << ',';
    os << r.lambda << ',' << r.t_k << ',' << r.phi0 << ',' << r.phi1 << ',' << r.merit << ',' << r.A_k << ','
       << r.backtracks << '\n';
  }
  os.precision(old_prec);
}

}  // namespace cdp
