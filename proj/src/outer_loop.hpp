#pragma once

#include "cdp/esqm.hpp"

namespace cdp::detail {

// Parameters shared by both methods; `adaptive` switches on the α update.
struct LoopParams {
  double beta = 0.7;
  double sigma = 0.5;
  double alpha0 = 1.0;
  bool adaptive = false;
  double rho_alpha = 0.0;
  double sigma_alpha = 0.5;
  double p0 = 1.0;
  double rho_p = 0.05;
  double c_p = 50.0;
  double d_tol = 1e-6;
  double phi1_tol = 1e-6;
  double zero_tol = 1e-12;
  int max_iter = 1000;
  int max_backtracks = 60;
};

SolveReport run_outer_loop(const DifferenceProgram& prog, const Vector& x0, const LoopParams& params,
                           const IterationObserver& observer);

}  // namespace cdp::detail
