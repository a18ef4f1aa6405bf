#pragma once

#include "cdp/problem.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <utility>

namespace cdp {

/// Γ(y) = {z : ∃w, C z + C_aux w ≤ c0 + C_y y,  E z + E_aux w = e0 + E_y y}.
///
/// Every row is affine in (y, z, w). The auxiliary block w lets sets such as
/// the path-flow image {Δh : Λh = r, h ≥ 0} be written exactly; it never
/// enters the distance that defines the projection.
struct ParametricPolyhedron {
  Matrix C, C_aux, C_y;
  Vector c0;
  Matrix E, E_aux, E_y;
  Vector e0;

  [[nodiscard]] Eigen::Index num_aux() const { return std::max(C_aux.cols(), E_aux.cols()); }
};

using YzScalar = std::function<double(const Vector& y, const Vector& z)>;
using YzVector = std::function<Vector(const Vector& y, const Vector& z)>;
using YzMatrix = std::function<Matrix(const Vector& y, const Vector& z)>;

/// min Ψ₁(y,z) − Ψ₂(y,z)  s.t.  y ∈ Y,  z solves VI(F(y,·), Γ(y)).
struct ViProblem {
  Eigen::Index m1 = 0;
  Eigen::Index m2 = 0;
  YzScalar psi1_value;
  YzVector psi1_grad;  ///< length m1 + m2, (∇_y; ∇_z)
  YzScalar psi2_value;
  YzVector psi2_subgrad;  ///< length m1 + m2
  YzVector F_value;       ///< ℝ^{m1+m2} → ℝ^{m2}
  YzMatrix F_jac_y;       ///< m2 × m1
  YzMatrix F_jac_z;       ///< m2 × m2
  ParametricPolyhedron gamma_set;
  Polyhedron Y{0};
  double psi_lower_bound = -std::numeric_limits<double>::infinity();
};

struct ThetaStar {
  Vector theta;
  Vector aux;
  /// Raw multipliers of the projection: (target − θ) = Cᵀ ineq + Eᵀ eq.
  Vector ineq_duals;
  Vector eq_duals;
};

struct GapEvaluation {
  Vector theta_star;
  double mu = 0.0;
  double gap = 0.0;  ///< ⟨F(y,z), z⟩ − μ_γ(y,z)
  Vector subgrad_y;
  Vector subgrad_z;
  /// Multipliers ν of the subdifferential formula, i.e. the raw
  /// projection duals divided by γ.
  Vector ineq_duals;
  Vector eq_duals;
};

/// θ*_γ(y,z) = Proj_Γ(y)(z − γF(y,z)). Throws QpFailure when Γ(y) is empty.
ThetaStar theta_star(const ViProblem& vi, const Vector& y, const Vector& z, double gamma);

/// μ_γ(y,z) = ⟨F, θ*⟩ + ‖θ* − z‖²/(2γ).
double mu_gamma(const ViProblem& vi, const Vector& y, const Vector& z, double gamma);

/// ⟨F(y,z), z⟩ − μ_γ(y,z); nonnegative on Γ(y), zero exactly at VI solutions.
double gap_value(const ViProblem& vi, const Vector& y, const Vector& z, double gamma);

/// One element of ∂μ_γ(y,z):
///   g_y = ∇_yFᵀθ* − C_yᵀν − E_yᵀη,   g_z = ∇_zFᵀθ* + (z − θ*)/γ
/// with (ν, η) the projection multipliers scaled by 1/γ.
std::pair<Vector, Vector> mu_subgradient(const ViProblem& vi, const Vector& y, const Vector& z, double gamma);

/// All of the above from a single projection.
GapEvaluation evaluate_gap(const ViProblem& vi, const Vector& y, const Vector& z, double gamma);

/// Difference program over x = (y, z, w) for the ε-relaxed gap constraint:
///   g₀ = Ψ₁, h₀ = Ψ₂, g₁ = ⟨F(y,z), z⟩ − ε, h₁ = μ_γ,
///   X = {y ∈ Y, rows of Γ(y) in (y, z, w)}.
DifferenceProgram to_difference_program(const ViProblem& vi, double gamma, double epsilon);

/// Splits x = (y, z, w) for programs built by to_difference_program.
struct ViSplit {
  Vector y, z, w;
};
ViSplit split_vi_point(const ViProblem& vi, const Vector& x);
Vector join_vi_point(const Vector& y, const Vector& z, const Vector& w);

}  // namespace cdp
