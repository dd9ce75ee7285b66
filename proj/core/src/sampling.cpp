#include "pdhj/sampling.hpp"

#include <cmath>
#include <numbers>

namespace pdhj {

Path random_path(const TimeGrid& grid, Rng& rng, PathShape shape, double amplitude) {
  const int n = grid.dim();
  const double lo = -grid.delay();
  const double hi = grid.horizon();
  switch (shape) {
    case PathShape::constant:
      return Path::constant(grid, amplitude * point_in_ball(rng, n, 1.0));
    case PathShape::smooth: {
      Vector offset = 0.5 * amplitude * gaussian_vector(rng, n);
      std::vector<std::pair<Vector, double>> modes;
      for (int k = 0; k < 3; ++k)
        modes.emplace_back(0.5 * amplitude * gaussian_vector(rng, n), uniform(rng, 0.3, 4.0));
      const double phase = uniform(rng, 0.0, 2.0 * std::numbers::pi);
      return Path::from_function(grid, [&](double t) {
        Vector v = offset;
        for (const auto& [a, w] : modes) v += a * std::sin(w * t + phase);
        return v;
      });
    }
    case PathShape::walk: {
      Path p(grid);
      p.node(0) = 0.5 * amplitude * gaussian_vector(rng, n);
      const double scale = amplitude * std::sqrt(grid.step());
      for (int i = 1; i < grid.node_count(); ++i) p.node(i) = p.node(i - 1) + scale * gaussian_vector(rng, n);
      return p;
    }
    case PathShape::past_peak: {
      // A bump early in the past dominating the later values.
      const Vector peak = amplitude * unit_vector(rng, n) * uniform(rng, 1.0, 2.0);
      const double center = uniform(rng, lo, lo + 0.5 * grid.delay());
      const double width = uniform(rng, 0.05, 0.3) * grid.delay();
      const Vector base = 0.3 * amplitude * point_in_ball(rng, n, 1.0);
      const Vector drift = 0.2 * amplitude * gaussian_vector(rng, n);
      return Path::from_function(grid, [&](double t) {
        const double u = (t - center) / width;
        return Vector(base + peak * std::exp(-u * u) + drift * std::sin(t));
      });
    }
    case PathShape::piecewise: {
      const int knots = uniform_int(rng, 2, 6);
      std::vector<double> times{lo};
      for (int k = 0; k < knots; ++k) times.push_back(uniform(rng, lo, hi));
      times.push_back(hi);
      std::sort(times.begin(), times.end());
      std::vector<Vector> values;
      for (std::size_t k = 0; k < times.size(); ++k) values.push_back(amplitude * gaussian_vector(rng, n));
      return Path::from_function(grid, [&](double t) {
        std::size_t k = 0;
        while (k + 2 < times.size() && t > times[k + 1]) ++k;
        const double span = times[k + 1] - times[k];
        const double w = span > 0 ? std::clamp((t - times[k]) / span, 0.0, 1.0) : 0.0;
        return Vector((1 - w) * values[k] + w * values[k + 1]);
      });
    }
  }
  throw DomainError("unknown path shape");
}

Path random_path(const TimeGrid& grid, Rng& rng, double amplitude) {
  const int pick = uniform_int(rng, 0, 4);
  return random_path(grid, rng, static_cast<PathShape>(pick), amplitude);
}

double random_node_time(const TimeGrid& grid, Rng& rng, bool include_end) {
  const int last = include_end ? grid.forward_cells() : grid.forward_cells() - 1;
  return grid.time(grid.zero_node() + uniform_int(rng, 0, last));
}

Path random_continuation(const Path& x, double t, Rng& rng, double amplitude) {
  const TimeGrid& g = x.grid();
  const int k = g.node_of(t);
  Path y = x;
  const Path other = random_path(g, rng, amplitude);
  const Vector shift = other.node(k) - x.node(k);
  for (int i = k + 1; i < g.node_count(); ++i) {
    // Continuous at t, different afterwards.
    y.node(i) = other.node(i) - shift + 0.5 * amplitude * Vector::Ones(g.dim()) * (g.time(i) - t);
  }
  return y;
}

Path random_perturbation(const TimeGrid& grid, Rng& rng, double scale) {
  Path p = random_path(grid, rng, PathShape::smooth, 1.0);
  const double m = p.samples().colwise().norm().maxCoeff();
  if (m > 0) p.samples() *= scale * uniform(rng, 0.0, 1.0) / m;
  return p;
}

}  // namespace pdhj
