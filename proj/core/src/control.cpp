#include "pdhj/control.hpp"

#include "pdhj/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace pdhj {

DelayTerm DelayTerm::constant(double lag) {
  if (!(lag > 0)) throw DomainError("constant delay must be positive");
  DelayTerm d;
  d.kind = DelayKind::constant;
  d.lag = lag;
  return d;
}

DelayTerm DelayTerm::time_varying(double offset, double slope) {
  DelayTerm d;
  d.kind = DelayKind::time_varying;
  d.lag_offset = offset;
  d.lag_slope = slope;
  return d;
}

DelayTerm DelayTerm::distributed(double decay) {
  if (!(decay >= 0)) throw DomainError("kernel decay must be non-negative");
  DelayTerm d;
  d.kind = DelayKind::distributed;
  d.kernel_decay = decay;
  return d;
}

double DelayTerm::lookup_time(double tau, const TimeGrid& grid) const {
  switch (kind) {
    case DelayKind::constant:
      if (lag > grid.delay() * (1 + 1e-12)) throw DomainError("delay lag exceeds h");
      return std::max(tau - lag, -grid.delay());
    case DelayKind::time_varying: {
      const double k = std::clamp(lag_offset + lag_slope * tau, 0.0, grid.delay());
      return grid.time(grid.node_floor(std::max(tau - k, -grid.delay())));
    }
    default:
      return tau;
  }
}

Vector DelayTerm::operator()(double tau, const Path& y) const {
  const TimeGrid& g = y.grid();
  switch (kind) {
    case DelayKind::none:
      return Vector::Zero(g.dim());
    case DelayKind::constant:
    case DelayKind::time_varying:
      return y.at(lookup_time(tau, g));
    case DelayKind::distributed: {
      Vector acc = Vector::Zero(g.dim());
      const int last = g.node_floor(tau);
      for (int i = 0; i < last; ++i) {
        const double mid = g.time(i) + 0.5 * g.step();
        acc += g.step() * std::exp(-kernel_decay * (tau - mid)) * 0.5 * (y.node(i) + y.node(i + 1));
      }
      const double rest = tau - g.time(last);
      if (rest > 1e-12 * g.step()) {
        const double mid = g.time(last) + 0.5 * rest;
        acc += rest * std::exp(-kernel_decay * (tau - mid)) * y.at(mid);
      }
      return acc;
    }
  }
  throw DomainError("unknown delay kind");
}

const char* to_string(DelayKind kind) {
  switch (kind) {
    case DelayKind::none: return "none";
    case DelayKind::constant: return "constant";
    case DelayKind::time_varying: return "time_varying";
    case DelayKind::distributed: return "distributed";
  }
  return "none";
}

DelayKind delay_kind_from_string(const std::string& s) {
  if (s == "none") return DelayKind::none;
  if (s == "constant" || s == "f1") return DelayKind::constant;
  if (s == "time_varying" || s == "f2") return DelayKind::time_varying;
  if (s == "distributed" || s == "f3") return DelayKind::distributed;
  throw DomainError("unknown delay kind '" + s + "'");
}

namespace {

void check_signal(const HistoryPoint& point, const ControlSignal& control) {
  const int cells = point.path.grid().last_node() - point.node();
  if (static_cast<int>(control.size()) < cells) {
    std::ostringstream msg;
    msg << "control signal has " << control.size() << " cells, " << cells << " needed";
    throw DomainError(msg.str());
  }
}

}  // namespace

Path integrate_dynamics(const ControlProblem& problem, const HistoryPoint& point, const ControlSignal& control) {
  check_signal(point, control);
  const TimeGrid& g = point.path.grid();
  Path y = stop_path(point.path, point.t);
  const int start = point.node();
  for (int i = start; i < g.last_node(); ++i) {
    Vector v;
    try {
      v = problem.f(g.time(i), y, control[static_cast<std::size_t>(i - start)]);
    } catch (const std::exception& e) {
      std::ostringstream msg;
      msg << "dynamics failed in cell " << (i - start) << ": " << e.what();
      throw DomainError(msg.str());
    }
    y.node(i + 1) = y.node(i) + g.step() * v;
  }
  return y;
}

double running_integral(const ControlProblem& problem, const Path& y, int first_node, int last_node,
                        const ControlSignal& control, int control_offset) {
  if (!problem.g) return 0.0;
  const TimeGrid& g = y.grid();
  double acc = 0.0;
  for (int i = first_node; i < last_node; ++i) {
    const double mid = g.time(i) + 0.5 * g.step();
    acc += g.step() * problem.g(mid, y, control[static_cast<std::size_t>(i - first_node + control_offset)]);
  }
  return acc;
}

double cost(const ControlProblem& problem, const HistoryPoint& point, const ControlSignal& control) {
  const Path y = integrate_dynamics(problem, point, control);
  return problem.sigma(y) - running_integral(problem, y, point.node(), y.grid().last_node(), control);
}

HamiltonianHandle bellman_hamiltonian(const ControlProblem& problem) {
  if (problem.controls.empty()) throw DomainError("control list is empty");
  HamiltonianHandle H;
  H.name = "bellman(" + problem.name + ")";
  H.c = problem.c;
  H.eval = [problem](double t, const Path& x, const Vector& s) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& u : problem.controls) {
      const double g = problem.g ? problem.g(t, x, u) : 0.0;
      best = std::min(best, s.dot(problem.f(t, x, u)) - g);
    }
    return best;
  };
  return H;
}

HamiltonianHandle delayed_linear_hamiltonian(const DelayTerm& delay, double c) {
  HamiltonianHandle H;
  H.name = std::string("delayed_linear(") + to_string(delay.kind) + ")";
  H.c = c;
  H.eval = [delay](double t, const Path& x, const Vector& s) { return s.dot(delay(t, x)); };
  return H;
}

GrowthReport check_growth_B2(const HamiltonianHandle& H, const TimeGrid& grid, int trials, std::uint64_t seed) {
  if (trials < 1) throw DomainError("trials must be at least 1");
  GrowthReport report;
  report.declared = H.c;
  Rng rng(seed);
  for (int k = 0; k < trials; ++k) {
    const double t = random_node_time(grid, rng, true);
    const Path x = random_path(grid, rng, uniform(rng, 0.1, 3.0));
    const double scale = std::pow(10.0, uniform(rng, -1.0, 2.0));
    const Vector s = scale * gaussian_vector(rng, grid.dim());
    const Vector r = s + std::pow(10.0, uniform(rng, -3.0, 1.0)) * unit_vector(rng, grid.dim());
    const double denom = (1.0 + uniform_norm(x, t)) * (s - r).norm();
    if (denom <= 0) continue;
    report.estimated = std::max(report.estimated, std::abs(H(t, x, s) - H(t, x, r)) / denom);
    ++report.samples;
  }
  return report;
}

LipschitzReport check_lipschitz_B3(const HamiltonianHandle& H, const std::vector<Path>& D, int trials,
                                   std::uint64_t seed) {
  if (D.size() < 2) throw DomainError("sample set D needs at least two histories");
  const TimeGrid& grid = D.front().grid();
  const int n = grid.dim();
  LipschitzReport report;
  Rng rng(seed);
  const double scales[] = {1.0, 10.0, 100.0, 1e3, 1e4};
  for (int k = 0; k < trials; ++k) {
    const int i = uniform_int(rng, 0, static_cast<int>(D.size()) - 1);
    int j = uniform_int(rng, 0, static_cast<int>(D.size()) - 2);
    if (j >= i) ++j;
    const Path& x = D[static_cast<std::size_t>(i)];
    const Path& y = D[static_cast<std::size_t>(j)];
    const double t = random_node_time(grid, rng, true);
    const int node = grid.node_of(t);
    double gap = 0.0;
    for (int m = 0; m <= node; ++m) gap = std::max(gap, (x.node(m) - y.node(m)).norm());
    if (gap <= 0.0) {
      ++report.skipped;
      continue;
    }
    auto diff = [&](const Vector& s) { return H(t, x, s) - H(t, y, s); };
    // Direction in which the difference grows fastest at large |s|, plus random ones.
    std::vector<Vector> directions;
    const double probe = 1e3;
    Vector w(n);
    for (int d = 0; d < n; ++d) {
      Vector e = Vector::Zero(n);
      e(d) = probe;
      w(d) = (diff(e) - diff(-e)) / (2 * probe);
    }
    if (w.norm() > 0) {
      directions.push_back(w.normalized());
      directions.push_back(-w.normalized());
    }
    for (int r = 0; r < 4; ++r) directions.push_back(unit_vector(rng, n));
    for (const auto& u : directions)
      for (double sc : scales) {
        const Vector s = sc * u;
        report.lambda = std::max(report.lambda, std::abs(diff(s)) / ((1.0 + s.norm()) * gap));
      }
    ++report.pairs;
  }
  return report;
}

HomogeneityReport check_homogeneity_B8(const HamiltonianHandle& H, const TimeGrid& grid, int trials,
                                       std::uint64_t seed) {
  if (trials < 1) throw DomainError("trials must be at least 1");
  HomogeneityReport report;
  Rng rng(seed);
  for (int k = 0; k < trials; ++k) {
    const double t = random_node_time(grid, rng, true);
    const Path x = random_path(grid, rng);
    const Vector s = std::pow(10.0, uniform(rng, -1.0, 1.0)) * gaussian_vector(rng, grid.dim());
    const double base = H(t, x, s);
    for (double alpha : {0.0, 0.5, 2.0, 10.0}) {
      const double scaled = H(t, x, Vector(alpha * s));
      const double res = std::abs(scaled - alpha * base);
      const double rel = res / (1.0 + std::abs(alpha * base));
      if (rel > report.worst) {
        report.worst = rel;
        report.worst_alpha = alpha;
      }
      if (res > 1e-9 * (1.0 + std::abs(alpha * base))) report.passed = false;
    }
    ++report.samples;
  }
  return report;
}

double sampled_dynamics_growth(const ControlProblem& problem, const TimeGrid& grid, int trials, std::uint64_t seed) {
  Rng rng(seed);
  double worst = 0.0;
  for (int k = 0; k < trials; ++k) {
    const double t = random_node_time(grid, rng, true);
    const Path x = random_path(grid, rng, uniform(rng, 0.1, 3.0));
    const double bound = 1.0 + uniform_norm(x, t);
    for (const auto& u : problem.controls) worst = std::max(worst, problem.f(t, x, u).norm() / bound);
  }
  return worst;
}

}  // namespace pdhj
