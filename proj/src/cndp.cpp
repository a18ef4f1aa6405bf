#include "cdp/cndp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace cdp {

void NetworkInstance::validate() const {
  const Eigen::Index n = A.size();
  if (B.size() != n || K.size() != n || D.size() != n) throw ConfigError("network: A, B, K, D must have equal length");
  if (Delta.rows() != n) throw ConfigError("network: Delta must have one row per link");
  if (Lambda.rows() != r.size() || Lambda.cols() != Delta.cols())
    throw ConfigError("network: Lambda must be n_od × n_paths");
  if ((A.array() < 0).any() || (B.array() < 0).any() || (D.array() < 0).any())
    throw ConfigError("network: A, B, D must be nonnegative");
  if ((K.array() <= 0).any()) throw ConfigError("network: K must be positive");
  if ((r.array() < 0).any()) throw ConfigError("network: demands must be nonnegative");
  for (Eigen::Index j = 0; j < Delta.cols(); ++j) {
    if (((Delta.col(j).array() != 0.0) && (Delta.col(j).array() != 1.0)).any())
      throw ConfigError("network: Delta entries must be 0 or 1");
    if (Delta.col(j).sum() < 1.0) throw ConfigError("network: path " + std::to_string(j) + " uses no link");
    if (((Lambda.col(j).array() != 0.0) && (Lambda.col(j).array() != 1.0)).any() || Lambda.col(j).sum() != 1.0)
      throw ConfigError("network: path " + std::to_string(j) + " must belong to exactly one OD pair");
  }
  for (Eigen::Index w = 0; w < r.size(); ++w) {
    if (r(w) > 0.0 && paths_of(w).empty())
      throw ConfigError("network: OD pair " + std::to_string(w) + " has demand but no path");
  }
}

std::vector<Eigen::Index> NetworkInstance::paths_of(Eigen::Index w) const {
  std::vector<Eigen::Index> out;
  for (Eigen::Index j = 0; j < Lambda.cols(); ++j) {
    if (Lambda(w, j) != 0.0) out.push_back(j);
  }
  return out;
}

namespace {

Vector capacity(const NetworkInstance& inst, const Vector& y) {
  if (y.size() != inst.n_links()) throw ConfigError("y has wrong length");
  Vector cap = inst.K + y;
  if ((cap.array() <= 0.0).any()) throw DomainError("travel time: K + y must be positive");
  return cap;
}

// Path-space Beckmann objective and gradient at fixed y.
struct PathProblem {
  const NetworkInstance& inst;
  Vector y;
  std::vector<std::vector<Eigen::Index>> groups;

  double value(const Vector& h) const { return beckmann_potential(inst, y, inst.Delta * h); }
  Vector grad(const Vector& h) const { return inst.Delta.transpose() * travel_time(inst, y, inst.Delta * h); }

  Vector project(const Vector& h) const {
    Vector out = Vector::Zero(h.size());
    for (std::size_t w = 0; w < groups.size(); ++w) {
      const auto& idx = groups[w];
      if (idx.empty()) continue;
      Vector sub(static_cast<Eigen::Index>(idx.size()));
      for (std::size_t k = 0; k < idx.size(); ++k) sub(static_cast<Eigen::Index>(k)) = h(idx[k]);
      const Vector proj = project_simplex(sub, inst.r(static_cast<Eigen::Index>(w)));
      for (std::size_t k = 0; k < idx.size(); ++k) out(idx[k]) = proj(static_cast<Eigen::Index>(k));
    }
    return out;
  }

  // Σ_w Σ_p h_p (c_p − min c) with c the path costs.
  double gap(const Vector& h, const Vector& c) const {
    double total = 0.0;
    for (std::size_t w = 0; w < groups.size(); ++w) {
      const auto& idx = groups[w];
      if (idx.empty()) continue;
      double cmin = c(idx.front());
      for (Eigen::Index j : idx) cmin = std::min(cmin, c(j));
      for (Eigen::Index j : idx) total += h(j) * (c(j) - cmin);
    }
    return total;
  }
};

PathProblem make_path_problem(const NetworkInstance& inst, const Vector& y) {
  (void)capacity(inst, y);
  PathProblem pp{inst, y, {}};
  for (Eigen::Index w = 0; w < inst.n_od(); ++w) pp.groups.push_back(inst.paths_of(w));
  return pp;
}

}  // namespace

Vector travel_time(const NetworkInstance& inst, const Vector& y, const Vector& v) {
  const Vector cap = capacity(inst, y);
  if (v.size() != inst.n_links()) throw ConfigError("v has wrong length");
  return inst.A.array() + inst.B.array() * (v.array() / cap.array()).pow(4);
}

double cndp_objective(const NetworkInstance& inst, const Vector& y, const Vector& v) {
  return travel_time(inst, y, v).dot(v) + inst.D.dot(y);
}

double beckmann_potential(const NetworkInstance& inst, const Vector& y, const Vector& v) {
  const Vector cap = capacity(inst, y);
  return (inst.A.array() * v.array() + inst.B.array() * v.array().pow(5) / (5.0 * cap.array().pow(4))).sum();
}

double linear_gap(const NetworkInstance& inst, const Vector& y, const Vector& v) {
  const Vector t = travel_time(inst, y, v);
  const Vector c = inst.Delta.transpose() * t;
  double best = 0.0;
  for (Eigen::Index w = 0; w < inst.n_od(); ++w) {
    const auto idx = inst.paths_of(w);
    if (idx.empty()) continue;
    double cmin = c(idx.front());
    for (Eigen::Index j : idx) cmin = std::min(cmin, c(j));
    best += inst.r(w) * cmin;
  }
  return t.dot(v) - best;
}

ViProblem build_vi(const NetworkInstance& inst) {
  inst.validate();
  const Eigen::Index n = inst.n_links();
  const Eigen::Index np = inst.n_paths();
  const Eigen::Index nod = inst.n_od();
  const NetworkInstance net = inst;

  ViProblem vi;
  vi.m1 = n;
  vi.m2 = n;
  vi.psi1_value = [net](const Vector& y, const Vector& v) { return cndp_objective(net, y, v); };
  vi.psi1_grad = [net, n](const Vector& y, const Vector& v) {
    const Vector cap = capacity(net, y);
    const Eigen::ArrayXd ratio = v.array() / cap.array();
    Vector g(2 * n);
    g.head(n) = net.D.array() - 4.0 * net.B.array() * ratio.pow(5);
    g.tail(n) = net.A.array() + 5.0 * net.B.array() * ratio.pow(4);
    return g;
  };
  vi.psi2_value = [](const Vector&, const Vector&) { return 0.0; };
  vi.psi2_subgrad = [n](const Vector&, const Vector&) { return Vector(Vector::Zero(2 * n)); };
  vi.F_value = [net](const Vector& y, const Vector& v) { return travel_time(net, y, v); };
  vi.F_jac_z = [net](const Vector& y, const Vector& v) {
    const Vector cap = capacity(net, y);
    const Vector diag = 4.0 * net.B.array() * v.array().pow(3) / cap.array().pow(4);
    return Matrix(diag.asDiagonal());
  };
  vi.F_jac_y = [net](const Vector& y, const Vector& v) {
    const Vector cap = capacity(net, y);
    const Vector diag = -4.0 * net.B.array() * v.array().pow(4) / cap.array().pow(5);
    return Matrix(diag.asDiagonal());
  };

  ParametricPolyhedron& g = vi.gamma_set;
  g.C = Matrix::Zero(np, n);
  g.C_aux = -Matrix::Identity(np, np);
  g.c0 = Vector::Zero(np);
  g.E = Matrix::Zero(n + nod, n);
  g.E.topRows(n).setIdentity();
  g.E_aux = Matrix::Zero(n + nod, np);
  g.E_aux.topRows(n) = -inst.Delta;
  g.E_aux.bottomRows(nod) = inst.Lambda;
  g.e0 = Vector::Zero(n + nod);
  g.e0.tail(nod) = inst.r;

  vi.Y = Polyhedron::box(Vector::Zero(n), Vector::Constant(n, std::numeric_limits<double>::infinity()));
  vi.psi_lower_bound = 0.0;
  return vi;
}

Vector project_simplex(const Vector& x, double total) {
  const Eigen::Index n = x.size();
  if (n == 0) return x;
  if (total <= 0.0) return Vector::Zero(n);
  std::vector<double> u(x.data(), x.data() + n);
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumsum = 0.0;
  double theta = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    cumsum += u[static_cast<std::size_t>(k)];
    const double t = (cumsum - total) / static_cast<double>(k + 1);
    if (u[static_cast<std::size_t>(k)] - t > 0.0) theta = t;
  }
  return (x.array() - theta).cwiseMax(0.0);
}

CndpState solve_lower_equilibrium(const NetworkInstance& inst, const Vector& y, const EquilibriumOptions& opts) {
  if ((y.array() < 0.0).any()) throw ConfigError("solve_lower_equilibrium: y must be nonnegative");
  const PathProblem pp = make_path_problem(inst, y);
  const Vector cap = inst.K + y;
  CndpState st = initial_point(inst);
  st.y = y;
  Vector h = st.h;
  Vector v = inst.Delta * h;

  const auto link_time = [&](Eigen::Index a) { return inst.A(a) + inst.B(a) * std::pow(v(a) / cap(a), 4); };
  const auto link_slope = [&](Eigen::Index a) { return 4.0 * inst.B(a) * std::pow(v(a), 3) / std::pow(cap(a), 4); };
  const auto path_cost = [&](Eigen::Index j) {
    double c = 0.0;
    for (Eigen::Index a = 0; a < inst.n_links(); ++a) {
      if (inst.Delta(a, j) != 0.0) c += link_time(a);
    }
    return c;
  };

  // Path-based Newton shifts: within each OD pair, move flow from every
  // costlier path to the current shortest one by (c_p − c_s)/Σ t'_a over the
  // links the two paths do not share, capped at the flow available.
  for (int sweep = 0; sweep < opts.max_iter; ++sweep) {
    if (pp.gap(h, pp.grad(h)) <= opts.tol) {
      st.h = h;
      st.v = inst.Delta * h;
      return st;
    }
    for (const auto& group : pp.groups) {
      if (group.size() < 2) continue;
      for (Eigen::Index p : group) {
        if (h(p) <= 0.0) continue;
        Eigen::Index best = group.front();
        double c_best = path_cost(best);
        for (Eigen::Index q : group) {
          const double c = path_cost(q);
          if (c < c_best) {
            c_best = c;
            best = q;
          }
        }
        if (best == p) continue;
        const double diff = path_cost(p) - c_best;
        if (!(diff > 0.0)) continue;
        double curvature = 0.0;
        for (Eigen::Index a = 0; a < inst.n_links(); ++a) {
          if (inst.Delta(a, p) != inst.Delta(a, best)) curvature += link_slope(a);
        }
        const double shift = curvature > 0.0 ? std::min(h(p), diff / curvature) : h(p);
        h(p) -= shift;
        h(best) += shift;
        v += shift * (inst.Delta.col(best) - inst.Delta.col(p));
      }
    }
    v = inst.Delta * h;  // clear drift from the incremental updates
  }
  std::ostringstream msg;
  msg << "lower-level equilibrium did not reach gap " << opts.tol << " (gap " << pp.gap(h, pp.grad(h)) << ")";
  throw QpFailure(msg.str());
}

double kappa_measure(const NetworkInstance& inst, const Vector& y, const Vector& v, double gamma) {
  if (!(gamma > 0.0)) throw ConfigError("gamma must be > 0");
  const Vector t = travel_time(inst, y, v);
  const Eigen::Index np = inst.n_paths();
  // min_h ⟨t, Δh⟩ + ‖Δh − v‖²/(2γ)  s.t.  Λh = r, h ≥ 0.
  Matrix Q = inst.Delta.transpose() * inst.Delta / gamma;
  Vector q = inst.Delta.transpose() * (t - v / gamma);
  QpOptions opts;
  opts.tol = 1e-12;
  opts.max_iter = 200;
  const QpSolution sol = qp_solve(
      QpProblem(std::move(Q), std::move(q), -Matrix::Identity(np, np), Vector::Zero(np), inst.Lambda, inst.r), opts);
  if (sol.status == QpStatus::Infeasible) throw QpFailure("kappa_measure: flow polytope is empty");
  const Vector v_min = inst.Delta * sol.d_star;
  const double inner = t.dot(v_min) + (v_min - v).squaredNorm() / (2.0 * gamma);
  return t.dot(v) - inner;
}

CndpState initial_point(const NetworkInstance& inst) {
  CndpState st;
  st.y = Vector::Zero(inst.n_links());
  st.h = Vector::Zero(inst.n_paths());
  for (Eigen::Index w = 0; w < inst.n_od(); ++w) {
    const auto idx = inst.paths_of(w);
    for (Eigen::Index j : idx) st.h(j) = inst.r(w) / static_cast<double>(idx.size());
  }
  st.v = inst.Delta * st.h;
  return st;
}

Vector scenario_demand(const std::string& name) {
  Vector r(2);
  if (name == "low") {
    r << 2.5, 5.0;
  } else if (name == "mid") {
    r << 5.0, 10.0;
  } else if (name == "high") {
    r << 10.0, 20.0;
  } else {
    throw ConfigError("unknown scenario '" + name + "' (expected low, mid or high)");
  }
  return r;
}

NetworkInstance with_demand(const NetworkInstance& inst, const Vector& r) {
  if (r.size() != inst.n_od()) throw ConfigError("demand vector does not match the number of OD pairs");
  NetworkInstance out = inst;
  out.r = r;
  return out;
}

}  // namespace cdp
