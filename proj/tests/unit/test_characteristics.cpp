#include <doctest.h>

#include <pdhj/characteristics.hpp>
#include <pdhj/sampling.hpp>

#include <cmath>
#include <sstream>

using namespace pdhj;

namespace {

const TimeGrid kGrid(2, 1.0, 2.0, 0.05);

Vector vec(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

HamiltonianHandle constant_H(double h0) {
  return {"constant", [h0](double, const Path&, const Vector&) { return h0; }, 1.0, {}};
}

HamiltonianHandle lag_H() { return delayed_linear_hamiltonian(DelayTerm::constant(1.0)); }

std::vector<C4Sample> c4_samples(const HamiltonianHandle&, int count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<C4Sample> out;
  for (int k = 0; k < count; ++k) {
    const double t = random_node_time(kGrid, rng);
    out.push_back({t, random_path(kGrid, rng), point_in_ball(rng, 2, 2.0)});
  }
  return out;
}

}  // namespace

TEST_CASE("standard complex selections") {
  const Path y = Path::constant(kGrid, vec(1.0, 0.5));
  const ComplexHandle E = standard_E(1.0, lag_H());
  const Vector s = vec(0.3, -1.2);
  const ComplexPoint center = E.select(0.5, y, s, Vector::Zero(2));
  CHECK(center.g == doctest::Approx(-lag_H()(0.5, y, s)));
  const ComplexPoint any = E.select(0.5, Path(kGrid), Vector::Zero(2), vec(0.4, 0.1));
  CHECK(any.g == doctest::Approx(0.0));
  const ComplexPoint far = E.select(0.5, y, s, vec(100.0, 0.0));
  CHECK(far.f.norm() == doctest::Approx(E.radius(0.5, y)));
  CHECK(E.contains(0.5, y, s, far));
}

TEST_CASE("constant Hamiltonian gives a closed-form linear characteristic") {
  Rng rng(2);
  const HistoryPoint p(0.5, random_path(kGrid, rng));
  const ComplexHandle E = standard_E(1.0, constant_H(0.7));
  const Vector s = vec(1.0, 2.0);
  const Vector f0 = vec(0.2, -0.1);
  const auto pair = integrate_characteristic(E, p, s, SelectionPolicy::constant(f0));
  for (int i = 0; i < kGrid.node_count(); ++i) {
    const double t = kGrid.time(i);
    const double expected = t <= 0.5 ? 0.0 : (s.dot(f0) - 0.7) * (t - 0.5);
    CHECK(std::abs(pair.z.node(i)(0) - expected) <= 1e-10);
    if (t <= 0.5) CHECK(pair.y.node(i) == p.path.node(i));
  }
  const auto still = integrate_characteristic(standard_E(1.0, constant_H(0.0)), p, s, SelectionPolicy::constant(Vector::Zero(2)));
  CHECK(still.y.samples() == stop_path(p.path, 0.5).samples());
  CHECK(still.z.samples().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("characteristics stay in Y and satisfy the affine relation per cell") {
  Rng rng(3);
  const HamiltonianHandle H = lag_H();
  const ComplexHandle E = standard_E(1.0, H);
  for (int k = 0; k < 10; ++k) {
    const HistoryPoint p(random_node_time(kGrid, rng), random_path(kGrid, rng));
    const Vector s = point_in_ball(rng, 2, 3.0);
    const auto pair = integrate_characteristic(E, p, s, SelectionPolicy::random(derive_seed(4, k)));
    CHECK(in_Y(p, pair.y, 1.0));
    for (int i = p.node(); i < kGrid.last_node(); ++i) {
      const double tau = kGrid.time(i);
      const Vector dy = (pair.y.node(i + 1) - pair.y.node(i)) / kGrid.step();
      const double dz = (pair.z.node(i + 1)(0) - pair.z.node(i)(0)) / kGrid.step();
      CHECK(std::abs(dz - (s.dot(dy) - H(tau, stop_path(pair.y, tau), s))) <= 1e-10 * (1 + std::abs(dz)));
    }
  }
}

TEST_CASE("selections outside the set are rejected with the cell index") {
  const HistoryPoint p(1.0, Path::constant(kGrid, vec(0.1, 0.1)));
  SelectionPolicy policy = SelectionPolicy::driven([](int cell, double, const Path&) {
    return cell == 4 ? vec(50.0, 0.0) : vec(0.1, 0.0);
  });
  policy.clip = false;
  try {
    integrate_characteristic(standard_E(1.0, lag_H()), p, vec(1.0, 0.0), policy);
    FAIL("expected a rejection");
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("cell 4") != std::string::npos);
  }
}

TEST_CASE("integration can stop early and write csv") {
  const HistoryPoint p(0.5, Path::constant(kGrid, vec(1.0, 0.0)));
  const auto pair = integrate_characteristic(standard_E(1.0, lag_H()), p, vec(1.0, 1.0),
                                             SelectionPolicy::constant(vec(0.5, 0.5)), 1.0);
  CHECK(pair.y.at(1.5) == pair.y.at(1.0));
  std::ostringstream out;
  write_csv(out, pair);
  CHECK(out.str().rfind("time,y1,y2,z\n", 0) == 0);
}

TEST_CASE("homogeneous complexes") {
  const Path y = Path::constant(kGrid, vec(0.5, 0.0));
  const double c = 1.0;
  HamiltonianHandle norm{"norm",
                         [c](double t, const Path& x, const Vector& s) {
                           return -s.norm() * c * (1 + x.max_norm_through(x.grid().node_floor(t)));
                         },
                         c,
                         {}};
  const auto pair = homogeneous_complexes(c, norm);
  const Vector s = vec(0.0, 2.0);
  const double R = c * (1 + 0.5);
  // f = -R s/|s| realises <s, f> = H(s), so it sits on the boundary of the lower set.
  CHECK(pair.lower.contains(1.0, y, s, {Vector(-R * s.normalized()), 0.0}));
  CHECK(pair.upper.contains(1.0, y, s, {Vector(-R * s.normalized()), 0.0}));
  CHECK_FALSE(pair.lower.contains(1.0, y, s, {Vector(R * s.normalized()), 0.0}));
  // s = 0 with H(0) = 0: the whole ball.
  CHECK(pair.upper.contains(1.0, y, Vector::Zero(2), {vec(0.3, 0.3), 0.0}));
  CHECK(pair.lower.contains(1.0, y, Vector::Zero(2), {vec(0.3, 0.3), 0.0}));

  const auto tight = homogeneous_complexes(0.1, constant_H(10.0));
  CHECK(tight.upper.empty(1.0, y, s));
  CHECK_THROWS_AS(tight.upper.select(1.0, y, s, vec(0.0, 0.0)), DomainError);
}

TEST_CASE("Hamiltonian recovered from complexes") {
  const HamiltonianHandle H = lag_H();
  const auto samples = c4_samples(H, 10, 5);
  const auto standard = verify_C4(standard_E(1.0, H), H, samples, 16, 8, 6);
  CHECK(standard.worst <= 1e-10);

  const auto pair = homogeneous_complexes(1.0, H);
  std::vector<double> prev(samples.size(), std::numeric_limits<double>::infinity());
  for (int dirs : {8, 16, 32, 64}) {
    const auto up = verify_C4(pair.upper, H, samples, dirs, 8, 7);
    const auto lo = verify_C4(pair.lower, H, samples, dirs, 8, 7);
    for (std::size_t k = 0; k < samples.size(); ++k) {
      const double r = std::max(up.residuals[k], lo.residuals[k]);
      CHECK(r <= prev[k] + 1e-12);
      prev[k] = r;
    }
    if (dirs == 64) {
      CHECK(up.worst < 1e-3);
      CHECK(lo.worst < 1e-3);
    }
  }
}

TEST_CASE("zero slice and lifted Hamiltonian") {
  Rng rng(8);
  const Path x = random_path(kGrid, rng);
  const Vector b = vec(0.4, -0.3);
  const double g0 = 0.8;
  HamiltonianHandle affine{"affine", [b, g0](double, const Path&, const Vector& s) { return s.dot(b) - g0; }, 1.0, {}};
  const HamiltonianHandle lifted = lift_hamiltonian(affine);
  const Vector s = vec(1.5, 0.5);
  Vector sbar(3);
  sbar << s, 0.25;
  CHECK(lifted(0.5, x, sbar) == doctest::Approx(s.dot(b) - 0.25 * g0));
  sbar(2) = 0.0;
  CHECK(lifted(0.5, x, sbar) == doctest::Approx(s.dot(b)).epsilon(1e-9));

  const HamiltonianHandle lag = lag_H();
  const HamiltonianHandle lag_lifted = lift_hamiltonian(lag);
  for (double th : {0.0, 0.3, -2.0}) {
    sbar << s, th;
    CHECK(lag_lifted(1.0, x, sbar) == doctest::Approx(lag(1.0, x, s)).epsilon(1e-9));
  }

  HamiltonianHandle bounded{"bounded", [](double t, const Path& y, const Vector& q) { return std::sin(q.dot(y.at(t))); },
                            1.0, {}};
  sbar << s, 0.0;
  CHECK(std::abs(lift_hamiltonian(bounded)(0.5, x, sbar)) <= 5e-3);

  HamiltonianHandle quad{"quad", [](double, const Path&, const Vector& q) { return q.squaredNorm(); }, 1.0, {}};
  CHECK_FALSE(zero_slice(quad, 0.5, x, s, {1e-1, 1e-2, 1e-3}).converged);
  CHECK_THROWS_AS(lift_hamiltonian(quad)(0.5, x, sbar), DomainError);

  // Positive homogeneity of the lift in (s, theta).
  for (int k = 0; k < 20; ++k) {
    Vector q(3);
    q << point_in_ball(rng, 2, 2.0), uniform(rng, -1.0, 1.0);
    const double base = lifted(0.5, x, q);
    for (double a : {0.5, 2.0}) CHECK(std::abs(lifted(0.5, x, Vector(a * q)) - a * base) <= 1e-8 * (1 + std::abs(base)));
  }
}
