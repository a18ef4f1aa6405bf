#include "cdp/builtins.hpp"

#include <cmath>

namespace cdp {

namespace {

Vector vec1(double v) { return Vector::Constant(1, v); }

BuiltinProblem dc_abs() {
  BuiltinProblem b;
  b.name = "dc-abs";
  b.description = "min x^2 - |x| over [-2, 2]";
  DifferenceProgram& p = b.prog;
  p.n = 1;
  p.g0_value = [](const Vector& x) { return x(0) * x(0); };
  p.g0_grad = [](const Vector& x) { return vec1(2.0 * x(0)); };
  p.h0_value = [](const Vector& x) { return std::abs(x(0)); };
  // Any element of [−1, 1] is a subgradient at 0; take +1.
  p.h0_subgrad = [](const Vector& x) { return vec1(x(0) >= 0.0 ? 1.0 : -1.0); };
  p.g1_value = [](const Vector&) { return -1.0; };
  p.g1_grad = [](const Vector&) { return vec1(0.0); };
  p.h1_value = [](const Vector&) { return 0.0; };
  p.h1_subgrad = [](const Vector&) { return vec1(0.0); };
  p.X = Polyhedron::box(vec1(-2.0), vec1(2.0));
  p.m_phi0 = -0.25;
  b.x0 = vec1(0.3);
  return b;
}

BuiltinProblem constrained() {
  BuiltinProblem b;
  b.name = "constrained";
  b.description = "min x s.t. x^2 - 1 <= 0 over [-3, 3]";
  DifferenceProgram& p = b.prog;
  p.n = 1;
  p.g0_value = [](const Vector& x) { return x(0); };
  p.g0_grad = [](const Vector&) { return vec1(1.0); };
  p.h0_value = [](const Vector&) { return 0.0; };
  p.h0_subgrad = [](const Vector&) { return vec1(0.0); };
  p.g1_value = [](const Vector& x) { return x(0) * x(0) - 1.0; };
  p.g1_grad = [](const Vector& x) { return vec1(2.0 * x(0)); };
  p.h1_value = [](const Vector&) { return 0.0; };
  p.h1_subgrad = [](const Vector&) { return vec1(0.0); };
  p.X = Polyhedron::box(vec1(-3.0), vec1(3.0));
  p.m_phi0 = -3.0;
  b.x0 = vec1(0.0);
  return b;
}

ViProblem toy_vi_problem() {
  ViProblem vi;
  vi.m1 = 1;
  vi.m2 = 1;
  vi.psi1_value = [](const Vector&, const Vector& z) { return (z(0) - 1.0) * (z(0) - 1.0); };
  vi.psi1_grad = [](const Vector&, const Vector& z) {
    Vector g(2);
    g << 0.0, 2.0 * (z(0) - 1.0);
    return g;
  };
  vi.psi2_value = [](const Vector&, const Vector&) { return 0.0; };
  vi.psi2_subgrad = [](const Vector&, const Vector&) { return Vector(Vector::Zero(2)); };
  vi.F_value = [](const Vector& y, const Vector& z) { return Vector(z - y); };
  vi.F_jac_y = [](const Vector&, const Vector&) { return Matrix(Matrix::Constant(1, 1, -1.0)); };
  vi.F_jac_z = [](const Vector&, const Vector&) { return Matrix(Matrix::Identity(1, 1)); };
  vi.gamma_set.C = Matrix(2, 1);
  vi.gamma_set.C << -1.0, 1.0;
  vi.gamma_set.c0 = Vector(2);
  vi.gamma_set.c0 << 0.0, 2.0;
  vi.Y = Polyhedron::box(vec1(-1.0), vec1(1.0));
  vi.psi_lower_bound = 0.0;
  return vi;
}

}  // namespace

std::vector<std::string> builtin_names() { return {"dc-abs", "constrained", "toy-vi"}; }

BuiltinProblem make_builtin(const std::string& name, std::optional<double> gamma, std::optional<double> epsilon) {
  if (name == "dc-abs") return dc_abs();
  if (name == "constrained") return constrained();
  if (name == "toy-vi") {
    BuiltinProblem b;
    b.name = name;
    b.description = "min (z-1)^2 s.t. z solves VI(z - y, [0, 2]), y in [-1, 1]";
    b.vi = toy_vi_problem();
    b.gamma = gamma.value_or(0.1);
    b.epsilon = epsilon.value_or(1e-4);
    b.prog = to_difference_program(*b.vi, b.gamma, b.epsilon);
    b.x0 = Vector::Zero(2);
    return b;
  }
  throw ConfigError("unknown builtin problem '" + name + "'");
}

BuiltinProblem make_network_problem(const NetworkInstance& inst, double gamma, double epsilon) {
  BuiltinProblem b;
  b.name = "network";
  b.description = "continuous network design";
  b.vi = build_vi(inst);
  b.gamma = gamma;
  b.epsilon = epsilon;
  b.prog = to_difference_program(*b.vi, gamma, epsilon);
  const CndpState s0 = initial_point(inst);
  b.x0 = join_vi_point(s0.y, s0.v, s0.h);
  return b;
}

NetworkInstance synthetic_network(const Vector& demand) {
  NetworkInstance net;
  net.link_ids = {"1", "2", "3", "4"};
  net.path_ids = {"1", "2", "3", "4"};
  net.od_ids = {"1", "2"};
  net.A = Vector(4);
  net.B = Vector(4);
  net.K = Vector(4);
  net.D = Vector(4);
  net.A << 1.0, 2.0, 1.5, 1.0;
  net.B << 2.0, 1.0, 1.0, 3.0;
  net.K << 3.0, 4.0, 5.0, 4.0;
  net.D << 2.0, 3.0, 6.0, 5.0;
  net.Delta = Matrix::Identity(4, 4);
  net.Lambda = Matrix::Zero(2, 4);
  net.Lambda << 1, 1, 0, 0, 0, 0, 1, 1;
  net.r = demand;
  net.validate();
  return net;
}

}  // namespace cdp
