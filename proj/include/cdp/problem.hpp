#pragma once

#include "cdp/qp.hpp"
#include "cdp/types.hpp"

#include <functional>
#include <limits>

namespace cdp {

/// Closed convex polyhedron {x : Cx ≤ c0, Eq x = e0, lower ≤ x ≤ upper}.
/// Infinite bounds are allowed and dropped from the row description.
class Polyhedron {
 public:
  /// The whole space ℝⁿ.
  explicit Polyhedron(Eigen::Index n);

  /// Throws ConfigError on inconsistent dimensions and QpFailure when the
  /// set is empty.
  Polyhedron(Matrix C, Vector c0, Matrix Eq, Vector e0, Vector lower, Vector upper);

  static Polyhedron box(const Vector& lower, const Vector& upper);

  [[nodiscard]] Eigen::Index dim() const { return n_; }
  [[nodiscard]] const Matrix& C() const { return C_; }
  [[nodiscard]] const Vector& c0() const { return c0_; }
  [[nodiscard]] const Matrix& Eq() const { return Eq_; }
  [[nodiscard]] const Vector& e0() const { return e0_; }
  [[nodiscard]] const Vector& lower() const { return lower_; }
  [[nodiscard]] const Vector& upper() const { return upper_; }

  /// All inequality rows, bounds included, as A x ≤ b.
  [[nodiscard]] const Matrix& A_ineq() const { return A_; }
  [[nodiscard]] const Vector& b_ineq() const { return b_; }

  /// Largest violation of any row (∞-norm of inequality excess and equality residual).
  [[nodiscard]] double violation(const Vector& x) const;
  [[nodiscard]] bool contains(const Vector& x, double tol = 1e-8) const { return violation(x) <= tol; }

  [[nodiscard]] Vector project(const Vector& x, double tol = 1e-10) const;

 private:
  void assemble_rows();

  Eigen::Index n_;
  Matrix C_;
  Vector c0_;
  Matrix Eq_;
  Vector e0_;
  Vector lower_;
  Vector upper_;
  Matrix A_;
  Vector b_;
};

using ScalarOracle = std::function<double(const Vector&)>;
using VectorOracle = std::function<Vector(const Vector&)>;

/// minimize φ₀(x) = g₀(x) − h₀(x)  subject to  φ₁(x) = g₁(x) − h₁(x) ≤ 0,  x ∈ X.
///
/// g's are smooth; the h-subgradient oracles return one element of the
/// (limiting) subdifferential. Oracles must be safe to call concurrently.
/// The caller asserts that h₀ and h₁ are prox-regular and locally Lipschitz;
/// the solvers rely on it for the line search but cannot check it.
struct DifferenceProgram {
  Eigen::Index n = 0;
  ScalarOracle g0_value;
  VectorOracle g0_grad;
  ScalarOracle h0_value;
  VectorOracle h0_subgrad;
  ScalarOracle g1_value;
  VectorOracle g1_grad;
  ScalarOracle h1_value;
  VectorOracle h1_subgrad;
  Polyhedron X{0};
  /// Lower bound of φ₀ over X; only used for the A_k diagnostic.
  double m_phi0 = -std::numeric_limits<double>::infinity();

  [[nodiscard]] double phi0(const Vector& x) const;
  [[nodiscard]] double phi1(const Vector& x) const;
};

/// First-order data of a difference program sampled at one point, with the
/// subgradients fixed: w₀ = ∇g₀ − v₀ and w₁ = ∇g₁ − v₁.
struct Linearization {
  double phi0 = 0.0;
  double phi1 = 0.0;
  Vector w0;
  Vector w1;
};

Linearization linearize(const DifferenceProgram& prog, const Vector& x);

struct KktCertificate {
  double lambda = 0.0;
  double stationarity_residual = 0.0;
  double complementarity_residual = 0.0;
  double feasibility_residual = 0.0;
};

/// φ_p(x) = φ₀(x)/p + max{φ₁(x), 0}.
double merit_value(const DifferenceProgram& prog, const Vector& x, double p);

/// Residuals of the stationarity system
///   0 ∈ ∇g₀ − v₀ + λ(∇g₁ − v₁) + N_X(x),   λ φ₁(x) = 0
/// with the normal cone measured as ‖x − Proj_X(x − r)‖∞.
KktCertificate kkt_residual(const DifferenceProgram& prog, const Vector& x, double lambda);

/// x ∈ X and φ₁(x) ≤ tol, both within `tol`.
bool is_feasible(const DifferenceProgram& prog, const Vector& x, double tol);

/// Separate tolerances for X (default 1e-8) and φ₁ (default 1e-6).
bool is_feasible(const DifferenceProgram& prog, const Vector& x, double x_tol, double phi1_tol);

}  // namespace cdp
