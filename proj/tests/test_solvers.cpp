#include "cdp/aesqm.hpp"
#include "cdp/builtins.hpp"
#include "cdp/esqm.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using cdp::Matrix;
using cdp::Vector;

namespace {

Vector v1(double x) { return Vector::Constant(1, x); }

// φ₀ = a x² + b x, φ₁ = c·x² + e x + f (all in g), no h parts, X given.
cdp::DifferenceProgram quadratic_program(double a, double b, double c, double e, double f, cdp::Polyhedron X) {
  cdp::DifferenceProgram p;
  p.n = 1;
  p.g0_value = [=](const Vector& x) { return a * x(0) * x(0) + b * x(0); };
  p.g0_grad = [=](const Vector& x) { return v1(2.0 * a * x(0) + b); };
  p.h0_value = [](const Vector&) { return 0.0; };
  p.h0_subgrad = [](const Vector&) { return v1(0.0); };
  p.g1_value = [=](const Vector& x) { return c * x(0) * x(0) + e * x(0) + f; };
  p.g1_grad = [=](const Vector& x) { return v1(2.0 * c * x(0) + e); };
  p.h1_value = [](const Vector&) { return 0.0; };
  p.h1_subgrad = [](const Vector&) { return v1(0.0); };
  p.X = std::move(X);
  return p;
}

cdp::Linearization lin1(double phi0, double w0, double phi1, double w1) {
  return cdp::Linearization{phi0, phi1, v1(w0), v1(w1)};
}

// Objective of the direction subproblem in one dimension.
double sub_obj(const cdp::Linearization& l, double p, double alpha, double d) {
  return l.w0(0) * d / p + std::max(l.phi1 + l.w1(0) * d, 0.0) + 0.5 * alpha * d * d;
}

}  // namespace

TEST_CASE("merit_value examples and monotonicity in p") {
  const auto prog = quadratic_program(0.0, 0.0, 0.0, 0.0, 0.0, cdp::Polyhedron(1));
  auto with = [&](double phi0, double phi1) {
    cdp::DifferenceProgram p = prog;
    p.g0_value = [=](const Vector&) { return phi0; };
    p.g1_value = [=](const Vector&) { return phi1; };
    return p;
  };
  CHECK(cdp::merit_value(with(2.0, -1.0), v1(0.0), 1.0) == 2.0);
  CHECK(cdp::merit_value(with(2.0, 3.0), v1(0.0), 2.0) == 4.0);
  CHECK(cdp::merit_value(with(0.0, 0.0), v1(0.0), 0.01) == 0.0);

  auto rng = oracle::make_rng(3);
  for (int i = 0; i < 50; ++i) {
    const Vector s = oracle::uniform(rng, 3, 0.0, 5.0);
    const auto p = with(s(0) + 1e-3, s(1) - 2.5);
    const double lo = 0.1 + s(2);
    CHECK(cdp::merit_value(p, v1(0.0), lo) >= cdp::merit_value(p, v1(0.0), 2.0 * lo));
  }
}

TEST_CASE("kkt_residual on the constrained instance") {
  const auto b = cdp::make_builtin("constrained");
  auto cert = cdp::kkt_residual(b.prog, v1(-1.0), 0.5);
  CHECK(cert.stationarity_residual <= 1e-12);
  CHECK(cert.complementarity_residual == 0.0);
  CHECK(cert.feasibility_residual == 0.0);
  cert = cdp::kkt_residual(b.prog, v1(0.0), 0.0);
  CHECK(cert.stationarity_residual == doctest::Approx(1.0));

  // Grid search confirms x = −1 is the minimizer.
  const auto best = oracle::grid_minimize([](double x) { return x * x <= 1.0 ? x : 1e300; }, -3.0, 3.0, 1e-5);
  CHECK(best.x == doctest::Approx(-1.0).epsilon(1e-6));

  const auto flat = quadratic_program(1.0, 0.0, 0.0, 0.0, -1.0, cdp::Polyhedron(1));
  cert = cdp::kkt_residual(flat, v1(0.0), 0.0);
  CHECK(cert.stationarity_residual == 0.0);
  CHECK(cert.complementarity_residual == 0.0);
  CHECK(cert.feasibility_residual == 0.0);
}

TEST_CASE("is_feasible") {
  const auto X = cdp::Polyhedron::box(v1(-1.0), v1(1.0));
  CHECK(cdp::is_feasible(quadratic_program(0, 0, 0, 0, -0.5, X), v1(0.0), 1e-8));
  CHECK_FALSE(cdp::is_feasible(quadratic_program(0, 0, 0, 0, 1e-3, X), v1(0.0), 1e-8));
  CHECK_FALSE(cdp::is_feasible(quadratic_program(0, 0, 0, 0, -1.0, X), v1(1.001), 1e-8));
  CHECK(cdp::is_feasible(quadratic_program(0, 0, 0, 0, 1e-7, X), v1(0.0), 1e-8, 1e-6));
}

TEST_CASE("linearize uses the chosen subgradients") {
  const auto b = cdp::make_builtin("dc-abs");
  const auto l = cdp::linearize(b.prog, v1(0.3));
  CHECK(l.phi0 == doctest::Approx(0.09 - 0.3));
  CHECK(l.w0(0) == doctest::Approx(0.6 - 1.0));
  CHECK(l.phi1 == -1.0);
  CHECK(l.w1(0) == 0.0);
}

TEST_CASE("direction subproblem examples, confirmed by grid search") {
  const cdp::Polyhedron R(1);
  struct Case {
    cdp::Linearization l;
    double d, lambda;
  };
  const Case cases[] = {{lin1(0.0, 1.0, -10.0, 0.0), -1.0, 0.0}, {lin1(0.0, 0.0, 1.0, 1.0), -1.0, 1.0}};
  for (const auto& c : cases) {
    const auto res = cdp::solve_direction(R, c.l, v1(0.0), 1.0, 1.0);
    CHECK(res.d(0) == doctest::Approx(c.d).epsilon(1e-7));
    CHECK(res.lambda == doctest::Approx(c.lambda).epsilon(1e-6));
    const auto best = oracle::grid_minimize([&](double d) { return sub_obj(c.l, 1.0, 1.0, d); }, -3.0, 3.0, 1e-5);
    CHECK(best.x == doctest::Approx(c.d).epsilon(1e-4));
    CHECK(res.subproblem_objective == doctest::Approx(best.value).epsilon(1e-8));
  }

  const auto box = cdp::Polyhedron::box(v1(-1.0), v1(1.0));
  const auto res = cdp::solve_direction(box, lin1(0.0, 0.0, -1.0, 0.0), v1(0.0), 1.0, 1.0);
  CHECK(std::abs(res.d(0)) < 1e-9);
  CHECK(std::abs(res.lambda) < 1e-8);
}

TEST_CASE("constraint_violation_estimate") {
  cdp::DirectionResult r;
  for (auto [phi1, wd, expect] : {std::tuple{1.0, -1.0, 0.0}, {2.0, -0.5, 1.5}, {-3.0, 1.0, 0.0}}) {
    r.t_lin = std::max(phi1 + wd, 0.0);
    CHECK(cdp::constraint_violation_estimate(r) == expect);
  }
  const auto res = cdp::solve_direction(cdp::Polyhedron(1), lin1(0.0, 1.0, 2.0, 0.0), v1(0.0), 1.0, 1.0);
  CHECK(cdp::constraint_violation_estimate(res) == doctest::Approx(2.0));
}

TEST_CASE("random direction subproblems satisfy descent and first-order conditions") {
  auto rng = oracle::make_rng(17);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 1 + trial % 4;
    const auto X = cdp::Polyhedron::box(Vector::Constant(n, -1.0), Vector::Constant(n, 1.0));
    const Vector x = oracle::uniform(rng, n, -1.0, 1.0);
    cdp::Linearization l{0.0, oracle::uniform(rng, 1, -1.0, 1.0)(0), oracle::uniform(rng, n, -2.0, 2.0),
                         oracle::uniform(rng, n, -2.0, 2.0)};
    const double p = oracle::uniform(rng, 1, 0.05, 3.0)(0);
    const double alpha = oracle::uniform(rng, 1, 0.5, 5.0)(0);
    const auto res = cdp::solve_direction(X, l, x, p, alpha);
    const Vector& d = res.d;

    CHECK(res.lambda >= -1e-8);
    CHECK(res.lambda <= 1.0 + 1e-8);
    CHECK(l.w0.dot(d) / p + res.lambda * l.w1.dot(d) <= -alpha * d.squaredNorm() + 1e-7);
    const Vector r = l.w0 / p + res.lambda * l.w1 + alpha * d;
    const Vector xd = x + d;
    CHECK((xd - X.project(Vector(xd - r))).lpNorm<Eigen::Infinity>() <= 1e-7);

    const auto res2 = cdp::solve_direction(X, l, x, p, 2.0 * alpha);
    CHECK(res2.d.norm() <= d.norm() + 1e-8);
  }
}

TEST_CASE("backtracking examples") {
  const auto prog = quadratic_program(1.0, 0.0, 0.0, 0.0, -1.0, cdp::Polyhedron(1));
  auto ls = cdp::backtrack(prog, v1(1.0), v1(0.0), 1.0, 1.0, 0.7, 0.5, 60);
  CHECK(ls.tau == 1.0);
  CHECK(ls.x_new(0) == 1.0);

  ls = cdp::backtrack(prog, v1(1.0), v1(-1.0), 1.0, 1.0, 0.7, 0.5, 60);
  CHECK(ls.tau == 1.0);

  // σ = 0.99, α = 2: first q with (1 − τ)² ≤ 1 − 1.98τ, found by direct evaluation.
  int q = 0;
  double tau = 1.0;
  while ((1.0 - tau) * (1.0 - tau) > 1.0 - 1.98 * tau) {
    tau *= 0.7;
    ++q;
  }
  ls = cdp::backtrack(prog, v1(1.0), v1(-1.0), 1.0, 2.0, 0.7, 0.99, 60);
  CHECK(ls.backtracks == q);
  CHECK(ls.tau == doctest::Approx(tau).epsilon(1e-15));

  CHECK_THROWS_AS(cdp::backtrack(prog, v1(1.0), v1(1.0), 1.0, 1.0, 0.7, 0.5, 5), cdp::LineSearchFailure);
}

TEST_CASE("penalty update rule") {
  CHECK(cdp::update_penalty(0.01, 5.0, 0.01, 50.0, 0.05) == doctest::Approx(0.06));
  CHECK(cdp::update_penalty(0.01, 0.0, 0.2, 50.0, 0.05) == 0.01);
  CHECK(cdp::update_penalty(1.0, 0.0, 0.0, 50.0, 0.05) == doctest::Approx(1.05));
}

TEST_CASE("model_value and update_alpha") {
  const auto a = lin1(2.0, 1.0, -1.0, 0.0);
  CHECK(cdp::model_value(a, v1(0.5), 1.0) == doctest::Approx(2.5));
  const auto b = lin1(0.0, 0.0, 1.0, -2.0);
  CHECK(cdp::model_value(b, v1(1.0), 2.0) == 0.0);

  const auto prog = cdp::make_builtin("constrained").prog;
  for (double x : {-2.0, 0.3, 1.7}) {
    const double m = cdp::merit_value(prog, v1(x), 0.7);
    CHECK(std::abs(cdp::model_value(prog, v1(x), v1(0.0), 0.7) - m) <= 1e-14 * std::max(1.0, std::abs(m)));
  }

  CHECK(cdp::update_alpha(3.0, 1.0, 1.0, 1.0, 2.0) == 3.0);
  CHECK(cdp::update_alpha(3.0, 0.7, 0.0, 10.0, 2.0) == 5.0);
  CHECK(cdp::update_alpha(3.0, 1.0, 2.0, 1.5, 2.0) == 5.0);
}

TEST_CASE("configuration validation names the violated bound") {
  cdp::EsqmConfig e;
  e.sigma = 1.5;
  try {
    e.validate();
    FAIL("expected ConfigError");
  } catch (const cdp::ConfigError& err) {
    CHECK(std::string(err.what()).find("sigma") != std::string::npos);
  }
  cdp::AesqmConfig a;
  a.sigma_alpha = 0.0;
  CHECK_THROWS_AS(a.validate(), cdp::ConfigError);
  a = {};
  a.beta = 1.0;
  CHECK_THROWS_AS(a.validate(), cdp::ConfigError);
}

TEST_CASE("ESQM on the DC instance reaches the grid optimum") {
  const auto b = cdp::make_builtin("dc-abs");
  const auto grid = oracle::grid_minimize([](double x) { return x * x - std::abs(x); }, -2.0, 2.0, 1e-5);
  const auto rep = cdp::run_esqm(b.prog, b.x0, cdp::EsqmConfig{});
  CHECK(std::abs(std::abs(rep.x_final(0)) - std::abs(grid.x)) <= 1e-3);
  CHECK(b.prog.phi0(rep.x_final) == doctest::Approx(grid.value).epsilon(1e-4));
  CHECK(rep.status != cdp::SolveStatus::MaxIterStop);
}

TEST_CASE("ESQM and AESQM on the constrained instance") {
  const auto b = cdp::make_builtin("constrained");
  const auto e = cdp::run_esqm(b.prog, b.x0, cdp::EsqmConfig{});
  CHECK(e.x_final(0) == doctest::Approx(-1.0).epsilon(1e-3));
  CHECK(e.certificate.lambda == doctest::Approx(0.5).epsilon(1e-2));
  const auto a = cdp::run_aesqm(b.prog, b.x0, cdp::AesqmConfig{});
  CHECK(a.x_final(0) == doctest::Approx(-1.0).epsilon(1e-3));
  CHECK(a.certificate.lambda == doctest::Approx(0.5).epsilon(1e-2));
  CHECK(a.certificate.stationarity_residual <= 1e-5);
}

TEST_CASE("a stationary feasible start stops at once") {
  const auto b = cdp::make_builtin("dc-abs");
  const auto e = cdp::run_esqm(b.prog, v1(0.5), cdp::EsqmConfig{});
  CHECK(e.status == cdp::SolveStatus::StationaryStop);
  CHECK(e.trace.size() == 1);
  cdp::AesqmConfig cfg;
  cfg.alpha0 = 3.0;
  const auto a = cdp::run_aesqm(b.prog, v1(0.5), cfg);
  CHECK(a.status == cdp::SolveStatus::StationaryStop);
  CHECK(a.trace.size() == 1);
  CHECK(a.final_alpha == 3.0);
}

TEST_CASE("AESQM alpha settles and unit steps are taken at the end") {
  for (const std::string name : {"dc-abs", "constrained", "toy-vi"}) {
    const auto b = cdp::make_builtin(name);
    const auto rep = cdp::run_aesqm(b.prog, b.x0, cdp::AesqmConfig{});
    REQUIRE(rep.status != cdp::SolveStatus::MaxIterStop);
    const auto& tr = rep.trace;
    const std::size_t n = tr.size();
    // dc-abs finishes in a handful of iterations, too few to watch α settle;
    // there it is only required to stay bounded.
    if (n > 20) {
      for (std::size_t k = n - 10; k < n; ++k) CHECK(tr[k].alpha == tr.back().alpha);
    } else {
      CHECK(tr.back().alpha <= 10.0);
    }
    // The last row takes no step (τ = 0), so the quarter is measured before it.
    const std::size_t steps = n - 1;
    for (std::size_t k = steps - steps / 4; k < steps; ++k) CHECK(tr[k].tau == 1.0);
  }
}

TEST_CASE("observer sees every row and the trace CSV has the expected columns") {
  const auto b = cdp::make_builtin("dc-abs");
  int calls = 0;
  const auto rep = cdp::run_esqm(b.prog, b.x0, cdp::EsqmConfig{}, [&](cdp::IterateTrace& row) {
    CHECK(row.k == calls);
    ++calls;
  });
  CHECK(static_cast<std::size_t>(calls) == rep.trace.size());

  std::ostringstream plain, with_alpha;
  cdp::write_trace_csv(plain, rep.trace, false);
  cdp::write_trace_csv(with_alpha, rep.trace, true);
  const std::string h1 = plain.str().substr(0, plain.str().find('\n'));
  const std::string h2 = with_alpha.str().substr(0, with_alpha.str().find('\n'));
  CHECK(h1.find("alpha") == std::string::npos);
  CHECK(h2.find(",alpha,") != std::string::npos);
  CHECK(h1.find("merit") != std::string::npos);
  const std::string body = plain.str();
  const auto lines = std::count(body.begin(), body.end(), '\n');
  CHECK(static_cast<std::size_t>(lines) == rep.trace.size() + 1);
}

TEST_CASE("an infeasible start with a flat constraint model still reaches the optimum") {
  // min x over [−2, 2] s.t. 1 − x² ≤ 0 started at x = 0, where the
  // linearized constraint has zero slope.
  cdp::DifferenceProgram p = quadratic_program(0.0, 1.0, 0.0, 0.0, 1.0, cdp::Polyhedron::box(v1(-2.0), v1(2.0)));
  p.h1_value = [](const Vector& x) { return x(0) * x(0); };
  p.h1_subgrad = [](const Vector& x) { return v1(2.0 * x(0)); };
  p.m_phi0 = -2.0;
  const auto rep = cdp::run_esqm(p, v1(0.0), cdp::EsqmConfig{});
  const auto grid = oracle::grid_minimize([](double x) { return x * x >= 1.0 ? x : 1e300; }, -2.0, 2.0, 1e-5);
  CHECK(rep.x_final(0) == doctest::Approx(grid.x).epsilon(1e-3));
  CHECK(p.phi1(rep.x_final) <= 1e-6);
}
