#include "cdp/problem.hpp"

#include <cassert>
#include <cmath>
#include <string>

namespace cdp {

namespace {

double finite_or_throw(double v, const char* what) {
  if (!std::isfinite(v)) throw DomainError(std::string(what) + " returned a non-finite value");
  return v;
}

}  // namespace

Polyhedron::Polyhedron(Eigen::Index n)
    : n_(n),
      C_(0, n),
      c0_(0),
      Eq_(0, n),
      e0_(0),
      lower_(Vector::Constant(n, -std::numeric_limits<double>::infinity())),
      upper_(Vector::Constant(n, std::numeric_limits<double>::infinity())) {
  assemble_rows();
}

Polyhedron::Polyhedron(Matrix C, Vector c0, Matrix Eq, Vector e0, Vector lower, Vector upper)
    : n_(lower.size()),
      C_(std::move(C)),
      c0_(std::move(c0)),
      Eq_(std::move(Eq)),
      e0_(std::move(e0)),
      lower_(std::move(lower)),
      upper_(std::move(upper)) {
  if (upper_.size() != n_) throw ConfigError("Polyhedron: lower/upper size mismatch");
  if (C_.rows() != c0_.size() || (C_.rows() > 0 && C_.cols() != n_)) throw ConfigError("Polyhedron: C must be m×n");
  if (Eq_.rows() != e0_.size() || (Eq_.rows() > 0 && Eq_.cols() != n_)) throw ConfigError("Polyhedron: Eq must be p×n");
  if (C_.rows() == 0) C_.resize(0, n_);
  if (Eq_.rows() == 0) Eq_.resize(0, n_);
  if ((lower_.array() > upper_.array()).any()) throw QpFailure("Polyhedron: empty box (lower > upper)");
  assemble_rows();
  // Nonemptiness: one projection of the origin.
  (void)project(Vector::Zero(n_), 1e-9);
}

Polyhedron Polyhedron::box(const Vector& lower, const Vector& upper) {
  const Eigen::Index n = lower.size();
  return Polyhedron(Matrix(0, n), Vector(0), Matrix(0, n), Vector(0), lower, upper);
}

void Polyhedron::assemble_rows() {
  Eigen::Index rows = C_.rows();
  for (Eigen::Index i = 0; i < n_; ++i) {
    if (std::isfinite(lower_(i))) ++rows;
    if (std::isfinite(upper_(i))) ++rows;
  }
  A_ = Matrix::Zero(rows, n_);
  b_ = Vector::Zero(rows);
  Eigen::Index r = 0;
  for (; r < C_.rows(); ++r) {
    A_.row(r) = C_.row(r);
    b_(r) = c0_(r);
  }
  for (Eigen::Index i = 0; i < n_; ++i) {
    if (std::isfinite(lower_(i))) {
      A_(r, i) = -1.0;
      b_(r++) = -lower_(i);
    }
    if (std::isfinite(upper_(i))) {
      A_(r, i) = 1.0;
      b_(r++) = upper_(i);
    }
  }
}

double Polyhedron::violation(const Vector& x) const {
  double v = 0.0;
  if (A_.rows() > 0) v = std::max(v, (A_ * x - b_).cwiseMax(0.0).maxCoeff());
  if (Eq_.rows() > 0) v = std::max(v, (Eq_ * x - e0_).cwiseAbs().maxCoeff());
  return v;
}

Vector Polyhedron::project(const Vector& x, double tol) const {
  if (A_.rows() == 0 && Eq_.rows() == 0) return x;
  if (Eq_.rows() == 0 && C_.rows() == 0) return x.cwiseMax(lower_).cwiseMin(upper_);
  return project_polyhedron(x, A_, b_, Eq_, e0_, tol).point;
}

double DifferenceProgram::phi0(const Vector& x) const {
  const double v = finite_or_throw(g0_value(x), "g0") - finite_or_throw(h0_value(x), "h0");
  assert(v >= m_phi0 - 1e-9 * (1.0 + std::abs(m_phi0)) && "phi0 below its declared lower bound");
  return v;
}

double DifferenceProgram::phi1(const Vector& x) const {
  return finite_or_throw(g1_value(x), "g1") - finite_or_throw(h1_value(x), "h1");
}

Linearization linearize(const DifferenceProgram& prog, const Vector& x) {
  Linearization lin;
  lin.phi0 = prog.phi0(x);
  lin.phi1 = prog.phi1(x);
  lin.w0 = prog.g0_grad(x) - prog.h0_subgrad(x);
  lin.w1 = prog.g1_grad(x) - prog.h1_subgrad(x);
  if (lin.w0.size() != prog.n || lin.w1.size() != prog.n) throw DomainError("gradient oracle returned wrong length");
  if (!lin.w0.allFinite() || !lin.w1.allFinite()) throw DomainError("gradient oracle returned a non-finite value");
  return lin;
}

double merit_value(const DifferenceProgram& prog, const Vector& x, double p) {
  if (!(p > 0.0)) throw ConfigError("merit_value: penalty parameter must be positive");
  return prog.phi0(x) / p + std::max(prog.phi1(x), 0.0);
}

KktCertificate kkt_residual(const DifferenceProgram& prog, const Vector& x, double lambda) {
  const Linearization lin = linearize(prog, x);
  const Vector r = lin.w0 + lambda * lin.w1;
  KktCertificate cert;
  cert.lambda = lambda;
  cert.stationarity_residual = (x - prog.X.project(x - r)).lpNorm<Eigen::Infinity>();
  cert.complementarity_residual = std::abs(lambda * lin.phi1);
  cert.feasibility_residual = std::max(std::max(lin.phi1, 0.0), prog.X.violation(x));
  return cert;
}

bool is_feasible(const DifferenceProgram& prog, const Vector& x, double tol) {
  return is_feasible(prog, x, tol, tol);
}

bool is_feasible(const DifferenceProgram& prog, const Vector& x, double x_tol, double phi1_tol) {
  return prog.X.violation(x) <= x_tol && prog.phi1(x) <= phi1_tol;
}

}  // namespace cdp
