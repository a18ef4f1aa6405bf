#pragma once

#include "cdp/esqm.hpp"

namespace cdp {

/// Parameters of the adaptive-α method. The proximal parameter starts at
/// alpha0 and grows by rho_alpha whenever the unit step is rejected or the
/// model-accuracy test fails.
struct AesqmConfig {
  double beta = 0.7;
  double sigma = 0.5;
  double alpha0 = 1.0;
  double rho_alpha = 1.0;
  double sigma_alpha = 0.5;  ///< (0,1)
  double p0 = 1.0;
  double rho_p = 0.05;
  double c_p = 50.0;
  double d_tol = 1e-6;
  double phi1_tol = 1e-6;
  double zero_tol = 1e-12;
  int max_iter = 1000;
  int max_backtracks = 60;

  void validate() const;
};

/// φ̃(x + d) = (φ₀(x) + ⟨w₀, d⟩)/p + max{φ₁(x) + ⟨w₁, d⟩, 0}.
double model_value(const Linearization& lin, const Vector& d, double p);

double model_value(const DifferenceProgram& prog, const Vector& x, const Vector& d, double p);

/// α + ρ_α if τ < 1 or lhs > rhs, else α; lhs = φ_p(x + d),
/// rhs = φ̃(x + d) + (σ_α α / 2)‖d‖².
double update_alpha(double alpha, double tau, double lhs, double rhs, double rho_alpha);

SolveReport run_aesqm(const DifferenceProgram& prog, const Vector& x0, const AesqmConfig& config,
                      const IterationObserver& observer = {});

}  // namespace cdp
