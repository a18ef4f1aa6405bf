#include "cdp/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/QR>

namespace cdp {

namespace {

double inf_norm(const Vector& v) { return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>(); }

double inf_norm(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

bool is_diagonal(const Matrix& Q) {
  for (Eigen::Index j = 0; j < Q.cols(); ++j) {
    for (Eigen::Index i = 0; i < Q.rows(); ++i) {
      if (i != j && Q(i, j) != 0.0) return false;
    }
  }
  return true;
}

// Solves the saddle-point system
//   [H  Aᵀ] [x]   [r1]
//   [A  0 ] [y] = [r2]
// through a small primal/dual regularization followed by iterative
// refinement against the unregularized matrix. Tolerates rank-deficient A
// and H that is only positive definite on ker A.
class SaddleSolver {
 public:
  SaddleSolver(const Matrix& H, const Matrix& A) : n_(H.rows()), p_(A.rows()), K_(n_ + p_, n_ + p_) {
    K_.setZero();
    K_.topLeftCorner(n_, n_) = H;
    if (p_ > 0) {
      K_.topRightCorner(n_, p_) = A.transpose();
      K_.bottomLeftCorner(p_, n_) = A;
    }
    const double scale = 1.0 + inf_norm(K_);
    const double reg = 1e-13 * scale;
    Matrix Kreg = K_;
    Kreg.topLeftCorner(n_, n_).diagonal().array() += reg;
    if (p_ > 0) Kreg.bottomRightCorner(p_, p_).diagonal().array() -= reg;
    lu_.compute(Kreg);
  }

  Vector solve(const Vector& rhs) const {
    Vector x = lu_.solve(rhs);
    for (int k = 0; k < 3; ++k) {
      const Vector r = rhs - K_ * x;
      if (inf_norm(r) <= 1e-15 * (1.0 + inf_norm(rhs))) break;
      x += lu_.solve(r);
    }
    return x;
  }

 private:
  Eigen::Index n_;
  Eigen::Index p_;
  Matrix K_;
  Eigen::PartialPivLU<Matrix> lu_;
};

// Factorization of a symmetric positive semidefinite matrix with a tiny
// diagonal shift, refined against the unshifted matrix. The shift is set
// by `base_scale` rather than by ‖H‖: barrier terms make the diagonal span
// many orders of magnitude, and a shift proportional to the largest entry
// would swamp the small ones.
class SpdSolver {
 public:
  explicit SpdSolver(Matrix H, double base_scale = 1.0) : H_(std::move(H)) {
    const double reg = 1e-14 * base_scale;
    Matrix Hreg = H_;
    Hreg.diagonal().array() += reg;
    ldlt_.compute(Hreg);
  }

  Vector solve(const Vector& rhs) const {
    if (rhs.size() == 0) return Vector(0);
    Vector x = ldlt_.solve(rhs);
    for (int k = 0; k < 3; ++k) {
      const Vector r = rhs - H_ * x;
      if (inf_norm(r) <= 1e-15 * (1.0 + inf_norm(rhs))) break;
      x += ldlt_.solve(r);
    }
    return x;
  }

 private:
  Matrix H_;
  Eigen::LDLT<Matrix> ldlt_;
};

// Particular solution and null-space basis of E d = e, plus least-squares
// recovery of equality multipliers from a stationarity residual.
struct EqualityReduction {
  Vector d0;
  Matrix Z;
  bool consistent = true;
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod_t;  // of Eᵀ

  EqualityReduction(const Matrix& E, const Vector& e) {
    const Eigen::Index n = E.cols();
    if (E.rows() == 0) {
      d0 = Vector::Zero(n);
      Z = Matrix::Identity(n, n);
      return;
    }
    const double scale = 1.0 + inf_norm(E);
    Eigen::ColPivHouseholderQR<Matrix> qr(E.transpose());
    qr.setThreshold(1e-12);
    const Eigen::Index rank = qr.rank();
    const Matrix Qfull = qr.householderQ() * Matrix::Identity(n, n);
    Z = Qfull.rightCols(n - rank);
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(E);
    cod.setThreshold(1e-12);
    d0 = cod.solve(e);
    consistent = inf_norm(Vector(E * d0 - e)) <= 1e-9 * scale * (1.0 + inf_norm(e)) * (1.0 + inf_norm(d0));
    cod_t.setThreshold(1e-12);
    cod_t.compute(E.transpose());
  }

  // ν minimizing ‖Eᵀν + r‖.
  Vector multipliers(const Vector& r) const {
    if (cod_t.rows() == 0 || cod_t.cols() == 0) return Vector(0);
    return cod_t.solve(Vector(-r));
  }
};

double max_step(const Vector& v, const Vector& dv) {
  double step = 1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (dv(i) < 0.0) step = std::min(step, -v(i) / dv(i));
  }
  return step;
}

struct IpmState {
  Vector d, y, s, z;
};

// Re-solves the equality-constrained QP obtained by fixing the inequality
// rows flagged in `active` to equality. Returns false when the result is not
// a valid KKT point of the original problem.
bool polish(const QpProblem& prob, const std::vector<Eigen::Index>& active, QpSolution& out) {
  const Eigen::Index n = prob.num_variables();
  const Eigen::Index na = static_cast<Eigen::Index>(active.size());
  const Eigen::Index p = prob.num_equalities();
  Matrix A(na + p, n);
  Vector b(na + p);
  for (Eigen::Index k = 0; k < na; ++k) {
    A.row(k) = prob.G.row(active[static_cast<std::size_t>(k)]);
    b(k) = prob.g(active[static_cast<std::size_t>(k)]);
  }
  if (p > 0) {
    A.bottomRows(p) = prob.E;
    b.tail(p) = prob.e;
  }
  // The saddle matrix is singular whenever Q has a null direction that the
  // fixed rows leave free (flows on parallel paths, say). Solving for the
  // minimum-norm correction to the interior-point iterate with a
  // rank-revealing factorization keeps the free variables where the
  // interior-point phase left them instead of sliding along that direction.
  Matrix K = Matrix::Zero(n + na + p, n + na + p);
  K.topLeftCorner(n, n) = prob.Q;
  K.topRightCorner(n, na + p) = A.transpose();
  K.bottomLeftCorner(na + p, n) = A;
  Vector rhs(n + na + p);
  rhs << -prob.q, b;
  Vector sol(n + na + p);
  sol.head(n) = out.d_star;
  for (Eigen::Index k = 0; k < na; ++k) sol(n + k) = out.mu(active[static_cast<std::size_t>(k)]);
  sol.tail(p) = out.nu;
  const Eigen::CompleteOrthogonalDecomposition<Matrix> cod(K);
  for (int k = 0; k < 3; ++k) sol += cod.solve(Vector(rhs - K * sol));
  if (!sol.allFinite()) return false;

  QpSolution cand;
  cand.d_star = sol.head(n);
  cand.mu = Vector::Zero(prob.num_inequalities());
  for (Eigen::Index k = 0; k < na; ++k) cand.mu(active[static_cast<std::size_t>(k)]) = std::max(0.0, sol(n + k));
  cand.nu = sol.tail(p);
  for (Eigen::Index k = 0; k < na; ++k) {
    if (sol(n + k) < -1e-10 * (1.0 + inf_norm(prob.q))) return false;
  }
  cand.kkt_residual = qp_kkt_residual(prob, cand.d_star, cand.mu, cand.nu);
  if (!(cand.kkt_residual <= out.kkt_residual)) return false;
  cand.status = out.status;
  cand.iterations = out.iterations;
  out = std::move(cand);
  return true;
}

}  // namespace

std::string_view to_string(QpStatus status) {
  switch (status) {
    case QpStatus::Optimal: return "Optimal";
    case QpStatus::MaxIterations: return "MaxIterations";
    case QpStatus::Infeasible: return "Infeasible";
  }
  return "Unknown";
}

QpProblem::QpProblem(Matrix Q_, Vector q_, Matrix G_, Vector g_, Matrix E_, Vector e_)
    : Q(std::move(Q_)), q(std::move(q_)), G(std::move(G_)), g(std::move(g_)), E(std::move(E_)), e(std::move(e_)) {
  const Eigen::Index n = q.size();
  if (Q.rows() != n || Q.cols() != n) throw ConfigError("QpProblem: Q must be n×n with n = size(q)");
  if (G.rows() != g.size() || (G.rows() > 0 && G.cols() != n)) throw ConfigError("QpProblem: G must be m×n");
  if (E.rows() != e.size() || (E.rows() > 0 && E.cols() != n)) throw ConfigError("QpProblem: E must be p×n");
  if (G.rows() == 0) G.resize(0, n);
  if (E.rows() == 0) E.resize(0, n);

  const double qscale = std::max(1.0, inf_norm(Q));
  if (inf_norm(Matrix(Q - Q.transpose())) > 1e-12 * qscale) throw ConfigError("QpProblem: Q is not symmetric");
  Q = 0.5 * (Q + Q.transpose());
  if (is_diagonal(Q)) {
    if (n > 0 && Q.diagonal().minCoeff() < -1e-10) throw ConfigError("QpProblem: Q is not positive semidefinite");
  } else if (n <= 50) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(Q, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -1e-10 * qscale) throw ConfigError("QpProblem: Q is not positive semidefinite");
  }
}

QpProblem::QpProblem(Matrix Q_, Vector q_)
    : QpProblem(std::move(Q_), q_, Matrix(0, q_.size()), Vector(0), Matrix(0, q_.size()), Vector(0)) {}

double qp_kkt_residual(const QpProblem& prob, const Vector& d, const Vector& mu, const Vector& nu) {
  const double qs = 1.0 + inf_norm(prob.q);
  Vector stat = prob.Q * d + prob.q;
  if (prob.num_inequalities() > 0) stat += prob.G.transpose() * mu;
  if (prob.num_equalities() > 0) stat += prob.E.transpose() * nu;
  double res = inf_norm(stat) / qs;
  if (prob.num_equalities() > 0) res = std::max(res, inf_norm(Vector(prob.E * d - prob.e)) / (1.0 + inf_norm(prob.e)));
  if (prob.num_inequalities() > 0) {
    const Vector slack = prob.G * d - prob.g;
    res = std::max(res, inf_norm(Vector(slack.cwiseMax(0.0))) / (1.0 + inf_norm(prob.g)));
    res = std::max(res, inf_norm(Vector(mu.cwiseProduct(slack))) / qs);
    res = std::max(res, inf_norm(Vector((-mu).cwiseMax(0.0))) / qs);
  }
  return res;
}

QpSolution qp_solve(const QpProblem& prob, double tol, int max_iter) {
  QpOptions opts;
  opts.tol = tol;
  opts.max_iter = max_iter;
  return qp_solve(prob, opts);
}

QpSolution qp_solve(const QpProblem& prob, const QpOptions& opts) {
  const Eigen::Index n = prob.num_variables();
  const Eigen::Index m = prob.num_inequalities();
  const Eigen::Index p = prob.num_equalities();
  const Matrix& G = prob.G;
  const Matrix& E = prob.E;

  QpSolution out;

  if (m == 0) {
    const SaddleSolver solver(prob.Q, E);
    Vector rhs(n + p);
    rhs << -prob.q, prob.e;
    const Vector sol = solver.solve(rhs);
    out.d_star = sol.head(n);
    out.nu = sol.tail(p);
    out.mu = Vector(0);
    out.iterations = 1;
    out.kkt_residual = qp_kkt_residual(prob, out.d_star, out.mu, out.nu);
    out.status = out.kkt_residual <= opts.tol ? QpStatus::Optimal
                 : (E.rows() > 0 && inf_norm(Vector(E * out.d_star - prob.e)) > 1e-6 * (1.0 + inf_norm(prob.e)))
                     ? QpStatus::Infeasible
                     : QpStatus::MaxIterations;
    return out;
  }

  // Equalities are eliminated up front: d = d0 + Z u with E d0 = e and
  // the columns of Z spanning ker E. The interior-point iteration then runs
  // on u with SPD Newton systems, and E d = e holds to rounding throughout.
  const EqualityReduction red(E, prob.e);
  if (!red.consistent) {
    out.status = QpStatus::Infeasible;
    out.d_star = red.d0;
    out.mu = Vector::Zero(m);
    out.nu = Vector::Zero(p);
    out.iterations = 0;
    out.kkt_residual = qp_kkt_residual(prob, out.d_star, out.mu, out.nu);
    return out;
  }
  const Matrix& Z = red.Z;
  const Eigen::Index nr = Z.cols();
  Matrix Qr = Z.transpose() * prob.Q * Z;
  Vector qr = Z.transpose() * (prob.Q * red.d0 + prob.q);
  Matrix Gr = G * Z;
  Vector gr = prob.g - G * red.d0;

  // Equilibrate each inequality row by its largest coefficient and the
  // objective by the curvature scale. Multipliers are mapped back in
  // full_point().
  const double obj_scale = std::max(1.0, inf_norm(Qr));
  Qr /= obj_scale;
  qr /= obj_scale;
  Vector row_scale = Vector::Ones(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double r = nr > 0 ? Gr.row(i).cwiseAbs().maxCoeff() : 0.0;
    if (r > 0.0) row_scale(i) = 1.0 / r;
  }
  Gr = row_scale.asDiagonal() * Gr;
  gr = gr.cwiseProduct(row_scale);

  const double qs = 1.0 + inf_norm(qr);
  const double gs = 1.0 + inf_norm(gr);

  // Starting point from the least-squares KKT system with unit barrier
  // weights, shifted into the interior. This puts z on the scale of q.
  IpmState st;
  Vector u;
  {
    const SpdSolver init(Matrix(Qr + Gr.transpose() * Gr));
    u = init.solve(Vector(-qr + Gr.transpose() * gr));
    st.z = Gr * u - gr;
    st.s = -st.z;
    const double ap = -st.s.minCoeff();
    if (ap >= 0.0) st.s.array() += 1.0 + ap;
    const double ad = -st.z.minCoeff();
    if (ad >= 0.0) st.z.array() += 1.0 + ad;
  }

  double best_primal = std::numeric_limits<double>::infinity();
  int stall = 0;
  bool converged = false;
  int it = 0;
  double best_score = std::numeric_limits<double>::infinity();
  Vector best_u, best_s, best_z;
  int since_best = 0;

  // Writes the original-space point and multipliers into st.d/st.y and
  // returns the unscaled inequality multipliers.
  const auto full_point = [&]() {
    st.d = red.d0 + Z * u;
    const Vector z = obj_scale * st.z.cwiseProduct(row_scale);
    st.y = red.multipliers(Vector(prob.Q * st.d + prob.q + G.transpose() * z));
    return z;
  };

  for (; it < opts.max_iter; ++it) {
    const Vector r_d = Qr * u + qr + Gr.transpose() * st.z;
    const Vector r_i = Gr * u + st.s - gr;
    const double mu = st.s.dot(st.z) / static_cast<double>(m);

    const double primal = inf_norm(r_i) / gs;
    const double dual = inf_norm(r_d) / qs;
    const double comp = (st.s.cwiseProduct(st.z)).maxCoeff() / qs;
    if (primal <= opts.tol && dual <= opts.tol && comp <= opts.tol) {
      converged = true;
      break;
    }

    if (primal > 1e-6 && primal > 0.9 * best_primal) {
      if (++stall >= 30) {
        out.mu = full_point();
        out.status = QpStatus::Infeasible;
        out.d_star = st.d;
        out.nu = st.y;
        out.iterations = it;
        out.kkt_residual = qp_kkt_residual(prob, st.d, out.mu, st.y);
        return out;
      }
    } else {
      stall = 0;
    }
    best_primal = std::min(best_primal, primal);

    // Once the residuals reach their rounding floor, further centering only
    // drives s∘z toward underflow; keep the best iterate and stop when it has
    // not improved for a while.
    const double score = std::max({primal, dual, comp});
    if (score < best_score) {
      best_score = score;
      best_u = u;
      best_s = st.s;
      best_z = st.z;
      since_best = 0;
    } else if (++since_best >= 20) {
      break;
    }

    const Vector w = st.z.cwiseQuotient(st.s);
    const SpdSolver solver(Matrix(Qr + Gr.transpose() * w.asDiagonal() * Gr));

    auto direction = [&](const Vector& r_c, Vector& du, Vector& ds, Vector& dz) {
      const Vector rhs = -r_d - Gr.transpose() * ((-r_c + st.z.cwiseProduct(r_i)).cwiseQuotient(st.s));
      du = solver.solve(rhs);
      ds = -r_i - Gr * du;
      dz = (-r_c - st.z.cwiseProduct(ds)).cwiseQuotient(st.s);
    };

    Vector du, ds, dz;
    direction(st.s.cwiseProduct(st.z), du, ds, dz);
    const double a_aff = std::min(max_step(st.s, ds), max_step(st.z, dz));
    const double mu_aff = (st.s + a_aff * ds).dot(st.z + a_aff * dz) / static_cast<double>(m);
    const double sigma = std::pow(mu_aff / mu, 3.0);

    const Vector r_c = st.s.cwiseProduct(st.z) + ds.cwiseProduct(dz) - Vector::Constant(m, sigma * mu);
    direction(r_c, du, ds, dz);
    const double a_max = std::min(max_step(st.s, ds), max_step(st.z, dz));
    const double step = std::min(1.0, 0.995 * a_max);
    if (!du.allFinite() || !ds.allFinite() || !dz.allFinite() || !(step > 0.0)) break;

    u += step * du;
    st.s += step * ds;
    st.z += step * dz;
    st.s = st.s.cwiseMax(1e-300);
    st.z = st.z.cwiseMax(1e-300);
  }

  if (!converged && best_u.size() == u.size()) {
    u = best_u;
    st.s = best_s;
    st.z = best_z;
  }
  out.mu = full_point();
  out.d_star = st.d;
  out.nu = st.y;
  out.iterations = it;
  out.kkt_residual = qp_kkt_residual(prob, st.d, out.mu, st.y);
  out.status = QpStatus::MaxIterations;

  if (opts.polish) {
    std::vector<Eigen::Index> active;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (st.z(i) > st.s(i)) active.push_back(i);
    }
    polish(prob, active, out);
  }
  if (converged || out.kkt_residual <= opts.tol) out.status = QpStatus::Optimal;
  // Stopped without ever getting close to Gd ≤ g: treat as infeasible rather
  // than as a slow solve.
  if (out.status != QpStatus::Optimal && best_primal > 1e-6) out.status = QpStatus::Infeasible;
  if (out.status == QpStatus::Optimal && out.kkt_residual > opts.tol) {
    // The stopping test is on the slack-form residuals; the reported one
    // uses Gd − g directly and can differ by rounding.
    out.status = out.kkt_residual <= 10.0 * opts.tol ? QpStatus::Optimal : QpStatus::MaxIterations;
  }
  return out;
}

Projection project_polyhedron(const Vector& target, const Matrix& C, const Vector& c0, const Matrix& Eq,
                              const Vector& e0, double tol) {
  return project_lifted(target, C, Matrix(C.rows(), 0), c0, Eq, Matrix(Eq.rows(), 0), e0, tol);
}

Projection project_lifted(const Vector& target, const Matrix& C, const Matrix& C_aux, const Vector& c0,
                          const Matrix& Eq, const Matrix& Eq_aux, const Vector& e0, double tol) {
  const Eigen::Index n = target.size();
  const Eigen::Index na = std::max(C_aux.cols(), Eq_aux.cols());
  const Eigen::Index m = c0.size();
  const Eigen::Index p = e0.size();
  if ((m > 0 && (C.rows() != m || C.cols() != n)) || (p > 0 && (Eq.rows() != p || Eq.cols() != n)))
    throw ConfigError("projection: constraint dimensions do not match target");

  Matrix Q = Matrix::Zero(n + na, n + na);
  Q.topLeftCorner(n, n).setIdentity();
  Vector q = Vector::Zero(n + na);
  q.head(n) = -target;

  Matrix G(m, n + na);
  if (m > 0) {
    G.leftCols(n) = C;
    if (na > 0) G.rightCols(na) = C_aux.cols() == na ? C_aux : Matrix::Zero(m, na);
  }
  Matrix A(p, n + na);
  if (p > 0) {
    A.leftCols(n) = Eq;
    if (na > 0) A.rightCols(na) = Eq_aux.cols() == na ? Eq_aux : Matrix::Zero(p, na);
  }

  QpOptions opts;
  opts.tol = tol;
  opts.max_iter = 200;
  const QpSolution sol = qp_solve(QpProblem(std::move(Q), std::move(q), std::move(G), c0, std::move(A), e0), opts);
  if (sol.status == QpStatus::Infeasible) throw QpFailure("projection: polyhedron is empty");
  if (sol.status != QpStatus::Optimal && sol.kkt_residual > 1e-6)
    throw QpFailure("projection: solver did not converge (residual " + std::to_string(sol.kkt_residual) + ")");

  Projection out;
  out.point = sol.d_star.head(n);
  out.aux = sol.d_star.tail(na);
  out.ineq_duals = sol.mu;
  out.eq_duals = sol.nu;
  out.kkt_residual = sol.kkt_residual;
  return out;
}

}  // namespace cdp
