#include <doctest.h>

#include <pdhj/control.hpp>
#include <pdhj/functional.hpp>
#include <pdhj/lyapunov.hpp>
#include <pdhj/sampling.hpp>

#include <cmath>

using namespace pdhj;

namespace {

Vector scalar(double v) { return Vector::Constant(1, v); }

// History with max |x| = 2 reached at t = -0.5 and x(t) = 1 at t = 0.5.
Path past_peak_example(const TimeGrid& g) {
  return Path::from_function(g, [](double t) {
    if (t <= -0.5) return scalar(2.0 + 2.0 * (t + 0.5));
    if (t <= 0.5) return scalar(2.0 - (t + 0.5));
    return scalar(1.0);
  });
}

std::vector<Path> sample_D(const TimeGrid& g, int count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Path> D;
  for (int k = 0; k < count; ++k) D.push_back(random_path(g, rng));
  return D;
}

}  // namespace

TEST_CASE("kappa and eps0") {
  CHECK(kKappa == doctest::Approx((3.0 - std::sqrt(5.0)) / 2.0).epsilon(1e-15));
  CHECK(eps_max(1.0, 1.0) == doctest::Approx(std::exp(-1.0 / kKappa) / std::sqrt(kKappa)).epsilon(1e-15));
  CHECK(eps_max(1.0, 1.0) == doctest::Approx(0.11814).epsilon(1e-4));
  CHECK_THROWS_AS(NuParams(1.0, 1.0, 1.01 * eps_max(1.0, 1.0)), DomainError);
  CHECK_THROWS_AS(NuParams(1.0, 1.0, 0.0), DomainError);
}

TEST_CASE("V and its gradient on worked examples") {
  const TimeGrid g(1, 1.0, 1.0, 0.25);
  CHECK(lyapunov_V(0.5, Path(g)) == 0.0);
  CHECK(lyapunov_grad_V(0.5, Path(g)).norm() == 0.0);
  const Path c = Path::constant(g, scalar(-1.5));
  CHECK(lyapunov_V(0.5, c) == doctest::Approx(2.25));
  CHECK(lyapunov_grad_V(0.5, c)(0) == doctest::Approx(-3.0));
  const Path x = past_peak_example(g);
  CHECK(lyapunov_V(0.5, x) == doctest::Approx(3.25));
  CHECK(lyapunov_grad_V(0.5, x)(0) == doctest::Approx(-1.0));
  CHECK(kKappa * 4.0 <= lyapunov_V(0.5, x));
  CHECK(lyapunov_V_jump(0.5, x, scalar(1.0)) == doctest::Approx(lyapunov_V(0.5, Path::constant(g, scalar(2.0)))));
}

TEST_CASE("V lower bound and gradient bound on random histories") {
  Rng rng(1);
  for (int n = 1; n <= 3; ++n) {
    const TimeGrid g(n, 1.0, 1.0, 0.05);
    for (int k = 0; k < 500; ++k) {
      const Path x = random_path(g, rng, uniform(rng, 0.1, 3.0));
      const double t = random_node_time(g, rng, true);
      const double m = uniform_norm(x, t);
      const double v = lyapunov_V(t, x);
      CHECK(v >= kKappa * m * m * (1 - 1e-9));
      CHECK(lyapunov_grad_V(t, x).norm() <= 2 * x.at(t).norm() + 1e-12);
    }
  }
}

TEST_CASE("nu on the zero history") {
  const TimeGrid g(1, 1.0, 1.0, 0.05);
  const NuParams p(1.0, 1.0, eps_max(1.0, 1.0));
  const double expected = (1 - p.eps * std::sqrt(kKappa)) * p.eps;
  CHECK(nu(p, 0.0, Path(g)) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(nu(p, 0.0, Path(g)) == doctest::Approx(0.10951).epsilon(1e-4));
  double prev = std::numeric_limits<double>::infinity();
  for (int i = g.zero_node(); i <= g.last_node(); ++i) {
    const double t = g.time(i);
    const double v = nu(p, t, Path(g));
    CHECK(v <= p.eps);
    CHECK(v == doctest::Approx(p.alpha(t) * p.eps * p.eps).epsilon(1e-12));
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("nu is positive below eps0 and its derivatives match the estimator") {
  Rng rng(2);
  const TimeGrid g(2, 0.5, 1.0, 0.01);
  const NuParams p(1.0, 1.0, 0.5 * eps_max(1.0, 1.0));
  const FunctionalHandle phi = nu_functional(p);
  for (int k = 0; k < 30; ++k) {
    const HistoryPoint point(random_node_time(g, rng), random_path(g, rng));
    CHECK(nu(p, point.t, point.path) > 0.0);
    const auto d = estimate_ci_derivatives(phi, point);
    const double scale = 1 + std::abs(d.dt) + d.grad.norm();
    CHECK(std::abs(d.dt - nu_dt(p, point.t, point.path)) <= 1e-3 * scale + d.residual);
    CHECK((d.grad - nu_grad(p, point.t, point.path)).norm() <= 1e-3 * scale + d.residual);
  }
}

TEST_CASE("conditions (a)-(d) for delayed linear Hamiltonians") {
  const TimeGrid g(1, 1.0, 1.0, 0.05);
  const auto D = sample_D(g, 50, 3);
  auto sigma = [](const Path& y) { return y.at(y.grid().horizon())(0); };
  for (const DelayTerm& term : {DelayTerm::constant(1.0), DelayTerm::time_varying(0.0, 0.5), DelayTerm::distributed(1.0)}) {
    const HamiltonianHandle H = delayed_linear_hamiltonian(term);
    const auto lip = check_lipschitz_B3(H, D, 2000, 4);
    ConditionCheckConfig cfg;
    cfg.seed = 5;
    cfg.inequality_trials = 1000;
    const auto rep = verify_conditions(std::max(lip.lambda, 1e-6), 1.0, H, sigma, D, cfg);
    CHECK(rep.a_passed);
    CHECK(rep.b_passed);
    CHECK(rep.worst_zero_history_formula_error <= 1e-15);
    CHECK(rep.c_passed);
    CHECK(rep.d_passed);
    CHECK(rep.worst_violation <= 1e-8);
    CHECK(rep.d_samples == 1000);
  }
}

TEST_CASE("path-independent Hamiltonian reduces (d) to the sign of the time derivative") {
  const TimeGrid g(1, 1.0, 1.0, 0.05);
  const auto D = sample_D(g, 20, 6);
  HamiltonianHandle flat{"flat", [](double, const Path&, const Vector& s) { return s.norm(); }, 1.0, {}};
  ConditionCheckConfig cfg;
  cfg.inequality_trials = 200;
  const auto rep = verify_conditions(0.5, 1.0, flat, [](const Path&) { return 0.0; }, D, cfg);
  CHECK(rep.d_passed);
  CHECK(rep.worst_violation == 0.0);
  CHECK_THROWS_AS(verify_conditions(1.0, 1.0, flat, {}, {D[0]}, cfg), DomainError);
}

TEST_CASE("an underestimated lambda is caught by (d)") {
  const TimeGrid g(1, 1.0, 1.0, 0.05);
  const auto D = sample_D(g, 50, 7);
  HamiltonianHandle strong{"strong",
                           [](double t, const Path& x, const Vector& s) { return 5.0 * s.dot(x.at(t - 1.0)); }, 5.0, {}};
  ConditionCheckConfig cfg;
  cfg.seed = 8;
  const auto rep = verify_conditions(0.5, 1.0, strong, [](const Path&) { return 0.0; }, D, cfg);
  CHECK_FALSE(rep.d_passed);
}
