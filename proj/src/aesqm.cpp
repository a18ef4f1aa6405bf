#include "cdp/aesqm.hpp"

#include "outer_loop.hpp"

#include <sstream>

namespace cdp {

void AesqmConfig::validate() const {
  auto open_unit = [](double v, const char* name) {
    if (!(v > 0.0 && v < 1.0)) {
      std::ostringstream msg;
      msg << name << " must lie in (0,1), got " << v;
      throw ConfigError(msg.str());
    }
  };
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0)) {
      std::ostringstream msg;
      msg << name << " must be > 0, got " << v;
      throw ConfigError(msg.str());
    }
  };
  open_unit(beta, "beta");
  open_unit(sigma, "sigma");
  open_unit(sigma_alpha, "sigma_alpha");
  positive(alpha0, "alpha0");
  positive(rho_alpha, "rho_alpha");
  positive(p0, "p0");
  positive(rho_p, "rho_p");
  positive(c_p, "c_p");
  if (!(d_tol >= 0.0)) throw ConfigError("d_tol must be >= 0");
  if (max_iter < 1) throw ConfigError("max_iter must be >= 1");
  if (max_backtracks < 0) throw ConfigError("max_backtracks must be >= 0");
}

double model_value(const Linearization& lin, const Vector& d, double p) {
  return (lin.phi0 + lin.w0.dot(d)) / p + std::max(lin.phi1 + lin.w1.dot(d), 0.0);
}

double model_value(const DifferenceProgram& prog, const Vector& x, const Vector& d, double p) {
  return model_value(linearize(prog, x), d, p);
}

double update_alpha(double alpha, double tau, double lhs, double rhs, double rho_alpha) {
  return (tau < 1.0 || lhs > rhs) ? alpha + rho_alpha : alpha;
}

SolveReport run_aesqm(const DifferenceProgram& prog, const Vector& x0, const AesqmConfig& config,
                      const IterationObserver& observer) {
  config.validate();
  detail::LoopParams par;
  par.beta = config.beta;
  par.sigma = config.sigma;
  par.alpha0 = config.alpha0;
  par.adaptive = true;
  par.rho_alpha = config.rho_alpha;
  par.sigma_alpha = config.sigma_alpha;
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

}  // namespace cdp
