#include "cdp/vi_gap.hpp"

#include <memory>
#include <mutex>

namespace cdp {

namespace {

Matrix cols_or_zero(const Matrix& M, Eigen::Index rows, Eigen::Index cols) {
  if (M.rows() == rows && M.cols() == cols) return M;
  if (M.size() == 0) return Matrix::Zero(rows, cols);
  throw ConfigError("ViProblem: Γ block has inconsistent dimensions");
}

// Γ(y) rows at fixed y, normalized to full (possibly zero) blocks.
struct GammaRows {
  Matrix C, C_aux;
  Vector c;
  Matrix E, E_aux;
  Vector e;
};

GammaRows gamma_rows(const ViProblem& vi, const Vector& y) {
  const ParametricPolyhedron& g = vi.gamma_set;
  const Eigen::Index m = g.c0.size();
  const Eigen::Index p = g.e0.size();
  const Eigen::Index na = g.num_aux();
  GammaRows r;
  r.C = cols_or_zero(g.C, m, vi.m2);
  r.C_aux = cols_or_zero(g.C_aux, m, na);
  r.c = g.c0;
  if (g.C_y.size() > 0) r.c += cols_or_zero(g.C_y, m, vi.m1) * y;
  r.E = cols_or_zero(g.E, p, vi.m2);
  r.E_aux = cols_or_zero(g.E_aux, p, na);
  r.e = g.e0;
  if (g.E_y.size() > 0) r.e += cols_or_zero(g.E_y, p, vi.m1) * y;
  return r;
}

void check_gamma(double gamma) {
  if (!(gamma > 0.0)) throw ConfigError("gamma must be > 0");
}

}  // namespace

ThetaStar theta_star(const ViProblem& vi, const Vector& y, const Vector& z, double gamma) {
  check_gamma(gamma);
  const GammaRows r = gamma_rows(vi, y);
  const Vector target = z - gamma * vi.F_value(y, z);
  const Projection proj = project_lifted(target, r.C, r.C_aux, r.c, r.E, r.E_aux, r.e, 1e-11);
  return ThetaStar{proj.point, proj.aux, proj.ineq_duals, proj.eq_duals};
}

GapEvaluation evaluate_gap(const ViProblem& vi, const Vector& y, const Vector& z, double gamma) {
  const Vector F = vi.F_value(y, z);
  const ThetaStar ts = theta_star(vi, y, z, gamma);
  GapEvaluation ev;
  ev.theta_star = ts.theta;
  ev.mu = F.dot(ts.theta) + (ts.theta - z).squaredNorm() / (2.0 * gamma);
  ev.gap = F.dot(z) - ev.mu;
  ev.ineq_duals = ts.ineq_duals / gamma;
  ev.eq_duals = ts.eq_duals / gamma;

  ev.subgrad_y = vi.F_jac_y(y, z).transpose() * ts.theta;
  const ParametricPolyhedron& g = vi.gamma_set;
  if (g.C_y.size() > 0 && ev.ineq_duals.size() > 0) ev.subgrad_y -= g.C_y.transpose() * ev.ineq_duals;
  if (g.E_y.size() > 0 && ev.eq_duals.size() > 0) ev.subgrad_y -= g.E_y.transpose() * ev.eq_duals;
  ev.subgrad_z = vi.F_jac_z(y, z).transpose() * ts.theta + (z - ts.theta) / gamma;
  return ev;
}

double mu_gamma(const ViProblem& vi, const Vector& y, const Vector& z, double gamma) {
  return evaluate_gap(vi, y, z, gamma).mu;
}

double gap_value(const ViProblem& vi, const Vector& y, const Vector& z, double gamma) {
  return evaluate_gap(vi, y, z, gamma).gap;
}

std::pair<Vector, Vector> mu_subgradient(const ViProblem& vi, const Vector& y, const Vector& z, double gamma) {
  GapEvaluation ev = evaluate_gap(vi, y, z, gamma);
  return {std::move(ev.subgrad_y), std::move(ev.subgrad_z)};
}

ViSplit split_vi_point(const ViProblem& vi, const Vector& x) {
  const Eigen::Index na = vi.gamma_set.num_aux();
  if (x.size() != vi.m1 + vi.m2 + na) throw ConfigError("point does not match the VI dimensions");
  return ViSplit{x.head(vi.m1), x.segment(vi.m1, vi.m2), x.tail(na)};
}

Vector join_vi_point(const Vector& y, const Vector& z, const Vector& w) {
  Vector x(y.size() + z.size() + w.size());
  x << y, z, w;
  return x;
}

DifferenceProgram to_difference_program(const ViProblem& vi, double gamma, double epsilon) {
  check_gamma(gamma);
  if (!(epsilon >= 0.0)) throw ConfigError("epsilon must be >= 0");
  const Eigen::Index m1 = vi.m1;
  const Eigen::Index m2 = vi.m2;
  const Eigen::Index na = vi.gamma_set.num_aux();
  const Eigen::Index n = m1 + m2 + na;

  // X = {y ∈ Y} ∩ {(y,z,w) : Γ rows}.
  const ParametricPolyhedron& g = vi.gamma_set;
  const GammaRows r0 = gamma_rows(vi, Vector::Zero(m1));
  const Eigen::Index mg = g.c0.size();
  const Eigen::Index pg = g.e0.size();
  const Eigen::Index my = vi.Y.C().rows();
  const Eigen::Index py = vi.Y.Eq().rows();

  Matrix C = Matrix::Zero(my + mg, n);
  Vector c(my + mg);
  if (my > 0) {
    C.topLeftCorner(my, m1) = vi.Y.C();
    c.head(my) = vi.Y.c0();
  }
  if (mg > 0) {
    if (g.C_y.size() > 0) C.block(my, 0, mg, m1) = -g.C_y;
    C.block(my, m1, mg, m2) = r0.C;
    if (na > 0) C.block(my, m1 + m2, mg, na) = r0.C_aux;
    c.tail(mg) = g.c0;
  }
  Matrix Eq = Matrix::Zero(py + pg, n);
  Vector e(py + pg);
  if (py > 0) {
    Eq.topLeftCorner(py, m1) = vi.Y.Eq();
    e.head(py) = vi.Y.e0();
  }
  if (pg > 0) {
    if (g.E_y.size() > 0) Eq.block(py, 0, pg, m1) = -g.E_y;
    Eq.block(py, m1, pg, m2) = r0.E;
    if (na > 0) Eq.block(py, m1 + m2, pg, na) = r0.E_aux;
    e.tail(pg) = g.e0;
  }
  Vector lower = Vector::Constant(n, -std::numeric_limits<double>::infinity());
  Vector upper = Vector::Constant(n, std::numeric_limits<double>::infinity());
  lower.head(m1) = vi.Y.lower();
  upper.head(m1) = vi.Y.upper();

  DifferenceProgram prog;
  prog.n = n;
  prog.X = Polyhedron(std::move(C), std::move(c), std::move(Eq), std::move(e), std::move(lower), std::move(upper));
  prog.m_phi0 = vi.psi_lower_bound;

  auto y_of = [m1](const Vector& x) -> Vector { return x.head(m1); };
  auto z_of = [m1, m2](const Vector& x) -> Vector { return x.segment(m1, m2); };
  auto pad = [n](const Vector& v) {
    Vector out = Vector::Zero(n);
    out.head(v.size()) = v;
    return out;
  };

  // h₁ value and subgradient come from the same projection; the linearization
  // asks for both at the same point, so keep the last evaluation.
  struct Cache {
    std::mutex mtx;
    Vector x;
    GapEvaluation ev;
  };
  auto cache = std::make_shared<Cache>();
  auto viptr = std::make_shared<const ViProblem>(vi);
  auto gap_at = [viptr, cache, gamma, y_of, z_of](const Vector& x) {
    {
      const std::lock_guard<std::mutex> lock(cache->mtx);
      if (cache->x.size() == x.size() && cache->x == x) return cache->ev;
    }
    GapEvaluation ev = evaluate_gap(*viptr, y_of(x), z_of(x), gamma);
    const std::lock_guard<std::mutex> lock(cache->mtx);
    cache->x = x;
    cache->ev = ev;
    return ev;
  };

  prog.g0_value = [viptr, y_of, z_of](const Vector& x) { return viptr->psi1_value(y_of(x), z_of(x)); };
  prog.g0_grad = [viptr, y_of, z_of, pad](const Vector& x) { return pad(viptr->psi1_grad(y_of(x), z_of(x))); };
  prog.h0_value = [viptr, y_of, z_of](const Vector& x) {
    return viptr->psi2_value ? viptr->psi2_value(y_of(x), z_of(x)) : 0.0;
  };
  prog.h0_subgrad = [viptr, y_of, z_of, pad, n](const Vector& x) {
    return viptr->psi2_subgrad ? pad(viptr->psi2_subgrad(y_of(x), z_of(x))) : Vector(Vector::Zero(n));
  };
  prog.g1_value = [viptr, y_of, z_of, epsilon](const Vector& x) {
    const Vector z = z_of(x);
    return viptr->F_value(y_of(x), z).dot(z) - epsilon;
  };
  prog.g1_grad = [viptr, y_of, z_of, m1, m2, n](const Vector& x) {
    const Vector y = y_of(x);
    const Vector z = z_of(x);
    Vector out = Vector::Zero(n);
    out.head(m1) = viptr->F_jac_y(y, z).transpose() * z;
    out.segment(m1, m2) = viptr->F_jac_z(y, z).transpose() * z + viptr->F_value(y, z);
    return out;
  };
  prog.h1_value = [gap_at](const Vector& x) { return gap_at(x).mu; };
  prog.h1_subgrad = [gap_at, m1, m2, n](const Vector& x) {
    const GapEvaluation ev = gap_at(x);
    Vector out = Vector::Zero(n);
    out.head(m1) = ev.subgrad_y;
    out.segment(m1, m2) = ev.subgrad_z;
    return out;
  };
  return prog;
}

}  // namespace cdp
