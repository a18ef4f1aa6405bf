#pragma once

// Reference solvers used only by the tests. None of them call into the
// library's QP kernel, projection or equilibrium code, so agreement with the
// library is evidence rather than tautology.

#include "cdp/cndp.hpp"
#include "cdp/vi_gap.hpp"
#include "cdp/types.hpp"

#include <functional>
#include <random>
#include <vector>

namespace oracle {

using cdp::Matrix;
using cdp::Vector;

struct GridMin {
  double x = 0.0;
  double value = 0.0;
};

/// Exhaustive search of f over lo, lo + h, ..., hi.
GridMin grid_minimize(const std::function<double(double)>& f, double lo, double hi, double h);

/// Dual of  min ½dᵀQd + qᵀd  s.t.  Gd ≤ g, Ed = e  solved by accelerated
/// projected gradient ascent (projection = clamp of the inequality block at
/// zero), with Q ≻ 0.
struct DualQpResult {
  double dual_value = 0.0;  ///< lower bound on the primal optimum
  Vector d;                 ///< primal point recovered from the multipliers
  Vector mu;
  Vector nu;
  int iterations = 0;
  double projected_grad_norm = 0.0;
};
DualQpResult dual_projected_gradient(const Matrix& Q, const Vector& q, const Matrix& G, const Vector& g,
                                     const Matrix& E, const Vector& e, int max_iter = 100000, double tol = 1e-13);

/// Random strongly convex QP with the shape used throughout the tests:
/// entries U[−1,1], Q = MᵀM + 0.1·I, and right-hand sides chosen so that a
/// random point is feasible (some inequalities tight there).
struct RandomQp {
  Matrix Q, G, E;
  Vector q, g, e;
};
RandomQp random_qp(std::mt19937_64& rng, int n, int m, int p);

/// Solution of the affine VI  find z ∈ {Cz ≤ c}: ⟨Mz + b, z' − z⟩ ≥ 0 ∀z'
/// by enumerating every subset of active rows (M positive definite, small m).
/// Returns false if no subset yields a solution.
bool brute_force_affine_vi(const Matrix& M, const Vector& b, const Matrix& C, const Vector& c, Vector& z_out);

/// Beckmann potential written out independently of the library.
double beckmann(const cdp::NetworkInstance& inst, const Vector& y, const Vector& v);

/// Pairwise Frank-Wolfe over path flows with exact line search on the
/// Beckmann potential. Returns the best path flow found.
Vector frank_wolfe_paths(const cdp::NetworkInstance& inst, const Vector& y, int iterations);

/// Equilibrium split of demand r over two parallel links a and b by
/// bisection on t_a(v) − t_b(r − v).
double two_link_split(const cdp::NetworkInstance& inst, int a, int b, double ya, double yb, double r);

/// Random VI data  F(y,z) = Mz + Ny + b + κ·z³ (componentwise cube),
/// Γ(y) = {z : Cz ≤ c0 + C_y y}, Y = [−1,1]^m1. M = SᵀS + 0.5·I so F is
/// strongly monotone in z. Γ(y) contains a ball around 0 for every y ∈ Y and
/// sits inside [−2,2]^m2.
struct RandomVi {
  Matrix M, N, C, Cy;
  Vector b, c0;
  double cubic = 0.0;
};
RandomVi random_vi(std::mt19937_64& rng, int m1, int m2, int extra_rows, double cubic);
cdp::ViProblem to_vi_problem(const RandomVi& data);

/// Small networks with overlapping paths for equilibrium checks. The diamond
/// has links 1,2 then 3,4 in series for the first OD pair and links 3 or 4
/// alone for the second; the other has OD 1 on {1} or {2,3} and OD 2 on {3}.
cdp::NetworkInstance diamond_network(const Vector& r);
cdp::NetworkInstance shared_tail_network(const Vector& r);

std::mt19937_64 make_rng(std::uint64_t seed);
Vector uniform(std::mt19937_64& rng, Eigen::Index n, double lo, double hi);
Matrix uniform(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols, double lo, double hi);

}  // namespace oracle
