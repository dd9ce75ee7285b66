#include <doctest.h>

#include <pdhj/path.hpp>
#include <pdhj/sampling.hpp>

#include <sstream>

using namespace pdhj;

namespace {

const TimeGrid kGrid(1, 1.0, 2.0, 0.25);

Path ramp(const TimeGrid& g) {
  return Path::from_function(g, [](double t) { return Vector::Constant(1, t); });
}

}  // namespace

TEST_CASE("grid rejects steps that do not divide h and T") {
  CHECK_THROWS_AS(TimeGrid(1, 1.0, 2.0, 0.3), DomainError);
  CHECK_THROWS_AS(TimeGrid(1, 0.5, 1.0, 0.0), DomainError);
  const TimeGrid g(2, 1.0, 2.0, 0.25);
  CHECK(g.node_count() == 13);
  CHECK(g.time(g.zero_node()) == 0.0);
  CHECK_THROWS_AS(g.node_of(0.1), DomainError);
  CHECK_THROWS_AS(g.node_of(2.25), DomainError);
}

TEST_CASE("interpolation returns stored samples at nodes and is linear between them") {
  const Path x = Path::from_function(kGrid, [](double t) { return Vector::Constant(1, t * t); });
  CHECK(x.at(0.5)(0) == doctest::Approx(0.25));
  CHECK(x.at(0.625)(0) == doctest::Approx(0.5 * (0.25 + 0.5625)));
}

TEST_CASE("uniform norm") {
  CHECK(uniform_norm(Path(kGrid), 1.0) == 0.0);
  CHECK(uniform_norm(Path::constant(kGrid, Vector::Constant(1, -3.0)), 0.5) == 3.0);
  CHECK(uniform_norm(ramp(kGrid), 1.0) == doctest::Approx(1.0));
  CHECK(uniform_norm(ramp(kGrid), 0.0) == doctest::Approx(1.0));  // x(-1) = -1
  CHECK_THROWS_AS(uniform_norm(ramp(kGrid), 0.3), DomainError);
}

TEST_CASE("dist") {
  const Path x = ramp(kGrid);
  CHECK(dist({0.5, x}, {0.5, x}) == 0.0);
  CHECK(dist({0.0, x}, {1.0, x}) == doctest::Approx(1.0));
  CHECK(dist({0.5, Path(kGrid)}, {0.5, Path::constant(kGrid, Vector::Constant(1, 2.5))}) == doctest::Approx(2.5));
  const TimeGrid other(1, 1.0, 2.0, 0.5);
  CHECK_THROWS_AS(dist({0.5, x}, {0.5, Path(other)}), DomainError);
}

TEST_CASE("stop_path") {
  const Path x = ramp(kGrid);
  const Path s = stop_path(x, 0.0);
  CHECK(s.at(-0.5)(0) == doctest::Approx(-0.5));
  CHECK(s.at(1.5)(0) == 0.0);
  CHECK(stop_path(x, 2.0).samples() == x.samples());
  const Path c = Path::constant(kGrid, Vector::Constant(1, 4.0));
  CHECK(stop_path(c, 0.5).samples() == c.samples());
}

TEST_CASE("rho vanishes on history-equal pairs and rho_hausdorff examples") {
  Rng rng(3);
  const Path x = random_path(kGrid, rng);
  const Path y = random_continuation(x, 0.75, rng);
  CHECK(rho({0.75, x}, {0.75, y}) == 0.0);
  CHECK(rho({0.75, x}, {0.75, x}) == 0.0);
  CHECK(rho({0.0, Path(kGrid)}, {1.0, Path(kGrid)}) == doctest::Approx(1.0));
  CHECK(rho_hausdorff({1.0, x}, {1.0, x}) == 0.0);
  const Path c = Path::constant(kGrid, Vector::Constant(1, 0.3));
  CHECK(rho_hausdorff({0.0, c}, {1.0, c}) == doctest::Approx(1.0));
}

TEST_CASE("rho and rho_hausdorff converge together along shrinking perturbations") {
  Rng rng(5);
  for (int k = 0; k < 100; ++k) {
    const Path x = random_path(kGrid, rng);
    const double t = random_node_time(kGrid, rng, true);
    const Path p = random_perturbation(kGrid, rng, 1.0);
    for (double scale : {1e-1, 1e-3, 1e-5}) {
      Path y = x;
      y.samples() += scale * p.samples();
      CHECK(rho({t, x}, {t, y}) <= scale * (1 + 1e-12));
      const double rh = rho_hausdorff({t, x}, {t, y});
      CHECK(rh <= scale * (1 + 1e-12));
    }
  }
}

TEST_CASE("metric properties on random triples") {
  Rng rng(9);
  for (int k = 0; k < 200; ++k) {
    const HistoryPoint a(random_node_time(kGrid, rng, true), random_path(kGrid, rng));
    const HistoryPoint b(random_node_time(kGrid, rng, true), random_path(kGrid, rng));
    const HistoryPoint c(random_node_time(kGrid, rng, true), random_path(kGrid, rng));
    CHECK(dist(a, b) == doctest::Approx(dist(b, a)).epsilon(1e-15));
    CHECK(dist(a, c) <= dist(a, b) + dist(b, c) + 1e-12);
    CHECK(rho(a, c) <= rho(a, b) + rho(b, c) + 1e-12);
    const Path sa = stop_path(a.path, a.t);
    CHECK(stop_path(sa, a.t).samples() == sa.samples());
    const HistoryPoint sa_p(a.t, sa), sb_p(b.t, stop_path(b.path, b.t));
    CHECK((rho(a, b) == 0.0) == (dist(sa_p, sb_p) == 0.0));
    for (int i = kGrid.zero_node(); i < kGrid.last_node(); ++i)
      CHECK(uniform_norm(a.path, kGrid.time(i)) <= uniform_norm(a.path, kGrid.time(i + 1)));
  }
}

TEST_CASE("extend") {
  const Path x = ramp(kGrid);
  const HistoryPoint p(0.5, x);
  const int cells = kGrid.last_node() - p.node();
  CHECK(extend(p, SlopeSelection::constant(cells, Vector::Zero(1))).samples() == stop_path(x, 0.5).samples());
  const Path y = extend(p, SlopeSelection::constant(cells, Vector::Constant(1, 2.0)));
  for (int i = 0; i < kGrid.node_count(); ++i) {
    const double t = kGrid.time(i);
    CHECK(y.node(i)(0) == doctest::Approx(t <= 0.5 ? t : 0.5 + 2.0 * (t - 0.5)));
  }
}

TEST_CASE("in_Y") {
  const Path x = Path::constant(kGrid, Vector::Constant(1, 1.0));
  const HistoryPoint p(0.5, x);
  const int cells = kGrid.last_node() - p.node();
  CHECK(in_Y(p, stop_path(x, 0.5), 0.1));
  CHECK_FALSE(in_Y(p, extend(p, SlopeSelection::constant(cells, Vector::Constant(1, 2.0 * 1.0 * 2.0))), 1.0));
  Path bad = x;
  bad.node(1)(0) = 5.0;
  CHECK_FALSE(in_Y(p, bad, 10.0));
}

TEST_CASE("csv round trip") {
  const Path x = Path::from_function(TimeGrid(2, 0.5, 1.0, 0.25), [](double t) {
    Vector v(2);
    v << std::sin(t), t / 3;
    return v;
  });
  std::stringstream buf;
  write_csv(buf, x);
  CHECK(buf.str().rfind("time,x1,x2\n", 0) == 0);
  const Path y = read_csv(buf);
  CHECK(y.grid().same_as(x.grid()));
  CHECK((y.samples() - x.samples()).cwiseAbs().maxCoeff() < 1e-11);
}
