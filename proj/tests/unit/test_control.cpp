#include <doctest.h>

#include <pdhj/control.hpp>
#include <pdhj/sampling.hpp>
#include <pdhj/scenario.hpp>
#include <pdhj/value.hpp>

#include "fixtures.hpp"

#include <cmath>

using namespace pdhj;

namespace {

ControlProblem slope_problem(std::vector<Vector> controls, double g_value = 0.0) {
  ControlProblem p;
  p.name = "slope";
  p.f = [](double, const Path&, const Vector& u) { return u; };
  p.g = [g_value](double, const Path&, const Vector&) { return g_value; };
  p.sigma = [](const Path& y) { return y.at(y.grid().horizon())(0); };
  p.controls = std::move(controls);
  return p;
}

Vector scalar(double v) { return Vector::Constant(1, v); }

}  // namespace

TEST_CASE("delay terms read the right history values") {
  const TimeGrid g(1, 1.0, 2.0, 0.1);
  const Path x = Path::from_function(g, [](double t) { return scalar(t); });
  CHECK(DelayTerm::constant(1.0)(1.5, x)(0) == doctest::Approx(0.5));
  CHECK(DelayTerm::time_varying(0.0, 0.5)(1.0, x)(0) == doctest::Approx(0.5));
  // k(tau) clamps at h.
  CHECK(DelayTerm::time_varying(3.0, 0.0)(0.5, x)(0) == doctest::Approx(-0.5));
  // Midpoint rule of exp(-(tau - xi)) xi over [-1, tau] against the closed form.
  const double tau = 1.0;
  const double exact = (tau - 1.0) - std::exp(-(tau + 1.0)) * (-1.0 - 1.0);
  CHECK(DelayTerm::distributed(1.0)(tau, x)(0) == doctest::Approx(exact).epsilon(1e-2));
  CHECK(DelayTerm{}(1.0, x).norm() == 0.0);
  CHECK(delay_kind_from_string("f3") == DelayKind::distributed);
  CHECK_THROWS_AS(delay_kind_from_string("f4"), DomainError);
  CHECK_THROWS_AS(DelayTerm::constant(-1.0), DomainError);
}

TEST_CASE("integrate_dynamics") {
  const TimeGrid g(1, 0.5, 1.0, 0.1);
  const Path x = Path::from_function(g, [](double t) { return scalar(std::cos(t)); });
  const HistoryPoint p(0.3, x);
  const int cells = g.last_node() - p.node();
  ControlProblem frozen = slope_problem({scalar(0.0)});
  CHECK(integrate_dynamics(frozen, p, ControlSignal(cells, scalar(0.0))).samples() == stop_path(x, 0.3).samples());
  const Path y = integrate_dynamics(frozen, p, ControlSignal(cells, scalar(2.0)));
  for (int i = p.node(); i < g.node_count(); ++i)
    CHECK(y.node(i)(0) == doctest::Approx(std::cos(0.3) + 2.0 * (g.time(i) - 0.3)));
  CHECK_THROWS_AS(integrate_dynamics(frozen, p, ControlSignal(2, scalar(0.0))), DomainError);

  ControlProblem broken = frozen;
  broken.f = [](double tau, const Path&, const Vector& u) {
    if (tau > 0.55) throw std::runtime_error("boom");
    return u;
  };
  try {
    integrate_dynamics(broken, p, ControlSignal(cells, scalar(0.0)));
    FAIL("expected an exception");
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).find("cell 3") != std::string::npos);
  }
}

TEST_CASE("delay scenario converges to the method-of-steps value at first order") {
  std::vector<double> errors;
  for (double step : {0.02, 0.01, 0.005}) {
    const Scenario sc = load_scenario(fixtures::delay_config(step));
    const HistoryPoint p = sc.initial_point();
    const int cells = sc.grid.last_node() - p.node();
    const double y2 = cost(sc.problem, p, ControlSignal(cells, scalar(0.0)));
    errors.push_back(std::abs(y2 - 3.5));
    const Path y = integrate_dynamics(sc.problem, p, ControlSignal(cells, scalar(0.0)));
    CHECK(in_Y(p, y, sc.problem.c));
  }
  CHECK(errors[1] / 3.5 < 0.02);
  for (std::size_t k = 1; k < errors.size(); ++k) {
    const double ratio = errors[k - 1] / errors[k];
    CHECK(ratio >= 1.7);
    CHECK(ratio <= 2.3);
  }
}

TEST_CASE("cost") {
  const TimeGrid g(1, 0.5, 1.0, 0.1);
  const HistoryPoint p(0.0, Path::constant(g, scalar(0.25)));
  const int cells = g.last_node();
  CHECK(cost(slope_problem({scalar(0.0)}), p, ControlSignal(cells, scalar(0.0))) == doctest::Approx(0.25));
  ControlProblem unit = slope_problem({scalar(0.0)}, 1.0);
  unit.sigma = [](const Path&) { return 0.0; };
  CHECK(cost(unit, p, ControlSignal(cells, scalar(0.0))) == doctest::Approx(-1.0));
}

TEST_CASE("cost is non-anticipative in the history") {
  const Scenario sc = load_scenario(fixtures::delay_config(0.05));
  Rng rng(3);
  for (int k = 0; k < 20; ++k) {
    const Path x = random_path(sc.grid, rng);
    const double t = random_node_time(sc.grid, rng);
    const Path y = random_continuation(x, t, rng);
    const int cells = sc.grid.last_node() - sc.grid.node_of(t);
    const ControlSignal u(cells, scalar(0.0));
    CHECK(cost(sc.problem, {t, x}, u) == cost(sc.problem, {t, y}, u));
  }
}

TEST_CASE("Bellman Hamiltonian") {
  const TimeGrid g(1, 1.0, 2.0, 0.1);
  ControlProblem p;
  p.f = [](double tau, const Path& y, const Vector& u) { return Vector(u(0) * y.at(tau - 1.0)); };
  p.g = [](double, const Path&, const Vector&) { return 0.0; };
  p.sigma = [](const Path&) { return 0.0; };
  p.controls = {scalar(-1.0), scalar(0.0), scalar(1.0)};
  const HamiltonianHandle H = bellman_hamiltonian(p);
  const Path x = Path::constant(g, scalar(3.0));
  CHECK(H(1.0, x, scalar(2.0)) == doctest::Approx(-6.0));
  CHECK(H(1.0, x, scalar(0.0)) == 0.0);

  std::vector<Vector> grid_controls;
  for (int k = -10; k <= 10; ++k) grid_controls.push_back(scalar(k / 10.0));
  const HamiltonianHandle Hs = bellman_hamiltonian(slope_problem(grid_controls));
  for (double s : {-2.0, -0.3, 0.7})
    CHECK(Hs(0.5, x, scalar(s)) == doctest::Approx(-std::abs(s)).epsilon(1e-12));

  ControlProblem empty = p;
  empty.controls.clear();
  CHECK_THROWS_AS(bellman_hamiltonian(empty), DomainError);
}

TEST_CASE("linear growth constant") {
  const TimeGrid g(2, 0.5, 1.0, 0.1);
  Vector b(2);
  b << 0.6, 0.8;
  HamiltonianHandle H{"transport", [b](double, const Path&, const Vector& s) { return s.dot(b); }, 1.0, {}};
  const auto rep = check_growth_B2(H, g, 200, 1);
  CHECK(rep.passed());
  CHECK(rep.estimated <= 1.0 + 1e-12);
  CHECK(rep.estimated > 0.5);
  HamiltonianHandle flat{"flat", [](double, const Path&, const Vector&) { return 2.0; }, 1.0, {}};
  CHECK(check_growth_B2(flat, g, 50, 2).estimated == 0.0);

  const Scenario sc = load_scenario(fixtures::delay_config(0.1));
  const auto bell = check_growth_B2(bellman_hamiltonian(sc.problem), sc.grid, 200, 3);
  CHECK(bell.passed());
  CHECK(sampled_dynamics_growth(sc.problem, sc.grid, 200, 4) <= sc.problem.c + 1e-12);
}

TEST_CASE("Lipschitz constant in the path") {
  const TimeGrid g(1, 1.0, 2.0, 0.05);
  Rng rng(4);
  std::vector<Path> D;
  for (int k = 0; k < 30; ++k) D.push_back(random_path(g, rng));
  const auto lag = check_lipschitz_B3(delayed_linear_hamiltonian(DelayTerm::constant(1.0)), D, 2000, 5);
  CHECK(lag.lambda <= 1.0 + 1e-12);
  CHECK(lag.lambda >= 0.95);
  const auto half = check_lipschitz_B3(delayed_linear_hamiltonian(DelayTerm::time_varying(0.0, 0.5)), D, 2000, 6);
  CHECK(half.lambda <= 1.0 + 1e-12);
  CHECK(half.lambda >= 0.95);
  HamiltonianHandle flat{"flat", [](double, const Path&, const Vector& s) { return s.norm(); }, 1.0, {}};
  CHECK(check_lipschitz_B3(flat, D, 200, 7).lambda == 0.0);
  std::vector<Path> same{D[0], D[0]};
  const auto degenerate = check_lipschitz_B3(flat, same, 20, 8);
  CHECK(degenerate.skipped > 0);
}

TEST_CASE("positive homogeneity in s") {
  const TimeGrid g(2, 1.0, 2.0, 0.1);
  HamiltonianHandle norm{"norm", [](double t, const Path& x, const Vector& s) { return -s.norm() * (1 + x.at(t).norm()); },
                         1.0, {}};
  CHECK(check_homogeneity_B8(norm, g, 100, 1).passed);
  CHECK(check_homogeneity_B8(delayed_linear_hamiltonian(DelayTerm::constant(1.0)), g, 100, 2).passed);
  HamiltonianHandle quad{"quad", [](double, const Path&, const Vector& s) { return s.squaredNorm(); }, 1.0, {}};
  const auto rep = check_homogeneity_B8(quad, g, 100, 3);
  CHECK_FALSE(rep.passed);
  CHECK(rep.worst_alpha != 0.0);
}
