#include <doctest.h>

#include <pdhj/classical.hpp>
#include <pdhj/functional.hpp>
#include <pdhj/sampling.hpp>

#include <cmath>
#include <sstream>

using namespace pdhj;

namespace {

Vector scalar(double v) { return Vector::Constant(1, v); }

ClassicalProblem transport(double b, int cells) {
  ClassicalProblem p;
  p.H = [b](double, const Vector&, const Vector& s) { return b * s(0); };
  p.sigma = [](const Vector& x) { return std::sin(x(0)); };
  p.lower = scalar(-4.0);
  p.upper = scalar(4.0);
  p.cells = {cells};
  p.horizon = 1.0;
  return p;
}

// H = min over u in [-1, 1] of s u = -|s|, sigma = |x|.
ClassicalProblem hopf_lax(int cells) {
  ClassicalProblem p;
  p.H = [](double, const Vector&, const Vector& s) { return -s.norm(); };
  p.sigma = [](const Vector& x) { return x.norm(); };
  p.lower = scalar(-4.0);
  p.upper = scalar(4.0);
  p.cells = {cells};
  p.horizon = 1.0;
  return p;
}

double max_error(const ClassicalSolution& sol, const std::function<double(double, double)>& exact) {
  double worst = 0.0;
  for (double t : {0.0, 0.25, 0.5, 0.75})
    for (double x = -2.0; x <= 2.0; x += 0.1) worst = std::max(worst, std::abs(sol(t, scalar(x)) - exact(t, x)));
  return worst;
}

}  // namespace

TEST_CASE("zero Hamiltonian keeps the terminal data") {
  ClassicalProblem p = transport(0.0, 80);
  p.H = [](double, const Vector&, const Vector&) { return 0.0; };
  const auto sol = solve_classical(p);
  for (double x : {-1.3, 0.0, 0.9}) CHECK(sol(0.3, scalar(x)) == doctest::Approx(std::sin(x)).epsilon(1e-3));
  CHECK(sol(1.0, scalar(0.5)) == doctest::Approx(std::sin(0.5)).epsilon(1e-3));
}

TEST_CASE("transport converges to the shifted terminal data") {
  const double b = 0.7;
  auto exact = [b](double t, double x) { return std::sin(x + b * (1.0 - t)); };
  const double coarse = max_error(solve_classical(transport(b, 200)), exact);
  const double fine = max_error(solve_classical(transport(b, 400)), exact);
  CHECK(fine < 0.05);
  CHECK(fine < coarse);
}

TEST_CASE("Hopf-Lax solution") {
  auto exact = [](double t, double x) { return std::max(std::abs(x) - (1.0 - t), 0.0); };
  const auto sol = solve_classical(hopf_lax(400));
  CHECK(max_error(sol, exact) < 0.05);
  CHECK(sol.viscosity()(0) >= 1.0);
}

TEST_CASE("interpolation, gradient and domain checks") {
  const auto sol = solve_classical(transport(0.7, 200));
  CHECK(sol.contains(scalar(3.9)));
  CHECK_FALSE(sol.contains(scalar(4.1)));
  CHECK_THROWS_AS(sol(0.5, scalar(4.5)), DomainError);
  CHECK_THROWS_AS(sol(1.5, scalar(0.0)), DomainError);
  CHECK(sol.gradient(0.5, scalar(0.2))(0) == doctest::Approx(std::cos(0.2 + 0.35)).epsilon(5e-2));
  CHECK(sol.times().front() == 0.0);
  CHECK(sol.times().back() == doctest::Approx(1.0));
  CHECK(sol.node_position(0)(0) == -4.0);
  CHECK(sol.node_position(sol.node_count() - 1)(0) == 4.0);
  ClassicalProblem bad = transport(0.7, 1);
  CHECK_THROWS_AS(solve_classical(bad), DomainError);
}

TEST_CASE("two-dimensional transport") {
  ClassicalProblem p;
  Vector b(2);
  b << 0.5, -0.25;
  p.H = [b](double, const Vector&, const Vector& s) { return s.dot(b); };
  p.sigma = [](const Vector& x) { return std::cos(x(0)) + 0.5 * x(1); };
  p.lower = Vector::Constant(2, -3.0);
  p.upper = Vector::Constant(2, 3.0);
  p.cells = {60, 60};
  p.horizon = 1.0;
  const auto sol = solve_classical(p);
  Vector x(2);
  x << 0.3, -0.4;
  const Vector moved = x + b * 0.6;
  CHECK(sol(0.4, x) == doctest::Approx(std::cos(moved(0)) + 0.5 * moved(1)).epsilon(0.05));
}

TEST_CASE("lifted solution reads only x(t)") {
  const auto sol = solve_classical(transport(0.7, 100));
  const FunctionalHandle phi = lift_to_path(sol);
  const TimeGrid g(1, 0.5, 1.0, 0.05);
  Rng rng(1);
  for (int k = 0; k < 10; ++k) {
    const Path x = random_path(g, rng);
    const double t = random_node_time(g, rng, true);
    CHECK(phi(t, x) == sol(t, x.at(t)));
  }
  CHECK(check_nonanticipative(phi, g, 50, 2).passed());
}

TEST_CASE("csv output") {
  const auto sol = solve_classical(transport(0.7, 20));
  std::ostringstream out;
  write_csv(out, sol, 1000);
  const std::string text = out.str();
  CHECK(text.rfind("t,x1,phi\n", 0) == 0);
  // First and last slices only, 21 nodes each.
  CHECK(std::count(text.begin(), text.end(), '\n') == 1 + 2 * 21);
}
