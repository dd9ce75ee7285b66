#include "pdhj/minimax.hpp"

#include "pdhj/lyapunov.hpp"
#include "pdhj/numerics.hpp"
#include "pdhj/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace pdhj {

namespace {

std::vector<SelectionGenerator> candidate_generators(const ComplexHandle& complex, int n, const SearchOptions& opts) {
  const int m = complex.selection_dim(n);
  std::vector<SelectionGenerator> out;
  out.push_back([m](double, const Path&) { return Vector(Vector::Zero(m)); });
  for (const auto& d : direction_mesh(m, opts.directions))
    for (double r : opts.radii)
      out.push_back([&complex, d, r](double tau, const Path& y) { return Vector(r * complex.radius(tau, y) * d); });
  for (const auto& f : opts.feedback) out.push_back(f);
  return out;
}

SelectionPolicy per_cell_policy(const std::vector<SelectionGenerator>& gens, const std::vector<int>& choice) {
  return SelectionPolicy::driven(
      [&gens, &choice](int cell, double tau, const Path& y) { return gens[static_cast<std::size_t>(choice[static_cast<std::size_t>(cell)])](tau, y); });
}

void require_before_end(const HistoryPoint& point) {
  if (point.node() >= point.path.grid().last_node()) throw DomainError("check needs t < T");
}

// phi(tau, y) - phi(t, x) - z(tau) for a block assignment.
struct OneSidedSearch {
  const FunctionalHandle& phi;
  const ComplexHandle& complex;
  const HistoryPoint& point;
  const Vector& param;
  double tau;
  const SearchOptions& opts;
  double sign;  // +1: minimize the gap (upper), -1: maximize it (lower)

  OneSidedReport run() const {
    require_before_end(point);
    const TimeGrid& g = point.path.grid();
    const int end = g.node_of(tau);
    if (end <= point.node()) throw DomainError("tau must lie after t");
    const int cells = end - point.node();
    const int blocks = std::clamp(opts.blocks, 1, cells);
    const auto gens = candidate_generators(complex, g.dim(), opts);
    const int K = static_cast<int>(gens.size());

    OneSidedReport rep;
    const double phi0 = phi(point);
    rep.evaluations = 1;
    double best = std::numeric_limits<double>::infinity();  // sign * gap
    std::vector<int> best_assign(static_cast<std::size_t>(blocks), 0);
    std::vector<int> cell_choice(static_cast<std::size_t>(cells));

    // best = sign * gap, so both sides succeed once best <= tol.
    auto reached = [&] { return best <= opts.tolerance; };
    auto trial = [&](const std::vector<int>& assign) {
      for (int c = 0; c < cells; ++c)
        cell_choice[static_cast<std::size_t>(c)] = assign[static_cast<std::size_t>(c * blocks / cells)];
      const auto pair = integrate_characteristic(complex, point, param, per_cell_policy(gens, cell_choice), tau);
      const double gap = phi(tau, pair.y) - phi0 - pair.z.node(end)(0);
      ++rep.evaluations;
      ++rep.trials;
      if (sign * gap < best) {
        best = sign * gap;
        best_assign = assign;
        return true;
      }
      return false;
    };
    auto budget_left = [&] { return rep.evaluations < opts.budget; };

    // Constant candidates, then coordinate passes over blocks, then random assignments.
    for (int k = 0; k < K && budget_left() && !reached(); ++k) trial(std::vector<int>(static_cast<std::size_t>(blocks), k));
    bool improved = true;
    while (improved && budget_left() && !reached()) {
      improved = false;
      for (int b = 0; b < blocks && budget_left() && !reached(); ++b)
        for (int k = 0; k < K && budget_left() && !reached(); ++k) {
          if (best_assign[static_cast<std::size_t>(b)] == k) continue;
          auto next = best_assign;
          next[static_cast<std::size_t>(b)] = k;
          improved = trial(next) || improved;
        }
    }
    Rng rng(opts.seed);
    while (budget_left() && !reached()) {
      std::vector<int> next(static_cast<std::size_t>(blocks));
      for (auto& v : next) v = uniform_int(rng, 0, K - 1);
      trial(next);
    }

    rep.best = sign * best;
    rep.witness_blocks = best_assign;
    rep.margin = opts.tolerance - best;
    rep.passed = rep.margin >= 0;
    return rep;
  }
};

}  // namespace

BoundaryReport check_boundary(const FunctionalHandle& phi, const ControlProblem::Terminal& sigma,
                              const TimeGrid& grid, int samples, std::uint64_t seed, double tolerance) {
  BoundaryReport rep;
  rep.tolerance = tolerance;
  rep.worst_above = -std::numeric_limits<double>::infinity();
  rep.worst_below = -std::numeric_limits<double>::infinity();
  Rng rng(seed);
  for (int k = 0; k < samples; ++k) {
    const Path y = random_path(grid, rng);
    const double diff = phi(grid.horizon(), y) - sigma(y);
    rep.worst_above = std::max(rep.worst_above, diff);
    rep.worst_below = std::max(rep.worst_below, -diff);
    ++rep.samples;
  }
  return rep;
}

MReport check_M(const FunctionalHandle& phi, const ComplexHandle& complex, const HistoryPoint& point,
                const Vector& s, const SearchOptions& opts, const ControlProblem::Terminal& sigma) {
  require_before_end(point);
  MReport rep;
  const TimeGrid& g = point.path.grid();
  if (sigma) {
    rep.boundary = check_boundary(phi, sigma, g, 20, derive_seed(opts.seed, 99), std::max(opts.tolerance, 1e-9));
    if (!rep.boundary->exact_ok()) {
      rep.note = "boundary condition violated";
      rep.deviation = std::numeric_limits<double>::infinity();
      return rep;
    }
  }
  const int start = point.node();
  const int cells = g.last_node() - start;
  const auto gens = candidate_generators(complex, g.dim(), opts);
  const int K = static_cast<int>(gens.size());
  const int stride = std::max(opts.stride, 1);
  std::vector<int> checked;
  for (int i = start + stride; i < g.last_node(); i += stride) checked.push_back(i);
  checked.push_back(g.last_node());

  const double phi0 = phi(point);
  rep.evaluations = 1;
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> best_choice(static_cast<std::size_t>(cells), 0);

  auto deviation_of = [&](const CharacteristicPair& pair, int upto) {
    double worst = 0.0;
    for (int i : checked) {
      if (i > upto) break;
      Path stopped = stop_path(pair.y, g.time(i));
      worst = std::max(worst, std::abs(phi(g.time(i), stopped) - phi0 - pair.z.node(i)(0)));
      ++rep.evaluations;
    }
    return worst;
  };
  auto trial = [&](const std::vector<int>& choice) {
    const auto pair = integrate_characteristic(complex, point, s, per_cell_policy(gens, choice));
    const double dev = deviation_of(pair, g.last_node());
    ++rep.trials;
    if (dev < best) {
      best = dev;
      best_choice = choice;
      return true;
    }
    return false;
  };
  const auto trial_cost = static_cast<std::int64_t>(checked.size());
  auto fits = [&](std::int64_t cost) { return rep.evaluations + cost <= opts.budget; };
  auto done = [&] { return best <= opts.tolerance; };

  for (int k = 0; k < K && fits(trial_cost) && !done(); ++k) trial(std::vector<int>(static_cast<std::size_t>(cells), k));

  // Greedy: per cell the candidate keeping the next-node deviation smallest.
  const std::int64_t greedy_cost = static_cast<std::int64_t>(K) * cells + trial_cost;
  if (!done() && fits(greedy_cost)) {
    std::vector<int> choice(static_cast<std::size_t>(cells), 0);
    for (int c = 0; c < cells; ++c) {
      double best_cell = std::numeric_limits<double>::infinity();
      int pick = 0;
      for (int k = 0; k < K; ++k) {
        choice[static_cast<std::size_t>(c)] = k;
        const int node = start + c + 1;
        const auto pair = integrate_characteristic(complex, point, s, per_cell_policy(gens, choice), g.time(node));
        const double dev = std::abs(phi(g.time(node), pair.y) - phi0 - pair.z.node(node)(0));
        ++rep.evaluations;
        if (dev < best_cell) {
          best_cell = dev;
          pick = k;
        }
      }
      choice[static_cast<std::size_t>(c)] = pick;
    }
    trial(choice);
  }

  bool improved = true;
  while (improved && !done() && fits(trial_cost)) {
    improved = false;
    for (int c = 0; c < cells && !done(); ++c)
      for (int k = 0; k < K && !done(); ++k) {
        if (!fits(trial_cost)) break;
        if (best_choice[static_cast<std::size_t>(c)] == k) continue;
        auto next = best_choice;
        next[static_cast<std::size_t>(c)] = k;
        improved = trial(next) || improved;
      }
  }

  rep.deviation = best;
  rep.passed = best <= opts.tolerance;
  if (std::isfinite(best)) {
    SelectionPolicy record = per_cell_policy(gens, best_choice);
    auto inner = record.callback;
    record.callback = [&rep, inner](int cell, double tau, const Path& y) {
      Vector raw = inner(cell, tau, y);
      rep.witness.push_back(raw);
      return raw;
    };
    integrate_characteristic(complex, point, s, record);
  }
  if (!rep.passed) rep.note = "no characteristic found within budget";
  return rep;
}

OneSidedReport check_upper(const FunctionalHandle& phi, const ComplexHandle& complex, const HistoryPoint& point,
                           const Vector& param, double tau, const SearchOptions& opts) {
  return OneSidedSearch{phi, complex, point, param, tau, opts, 1.0}.run();
}

OneSidedReport check_lower(const FunctionalHandle& phi, const ComplexHandle& complex, const HistoryPoint& point,
                           const Vector& param, double tau, const SearchOptions& opts) {
  return OneSidedSearch{phi, complex, point, param, tau, opts, -1.0}.run();
}

MCReport check_MC(const FunctionalHandle& phi, const ComplexHandle& upper, const ComplexHandle& lower,
                  const std::vector<MCSample>& samples, const SearchOptions& opts) {
  MCReport rep;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    SearchOptions o = opts;
    o.seed = derive_seed(opts.seed, i);
    MCRow row{check_upper(phi, upper, s.point, s.param, s.tau, o), check_lower(phi, lower, s.point, s.param, s.tau, o)};
    if (!row.upper.passed) ++rep.upper_failures;
    if (!row.lower.passed) ++rep.lower_failures;
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

TouchReport viscosity_touch_test(const FunctionalHandle& phi, const HamiltonianHandle& H,
                                 const HistoryPoint& point, int family_size, std::uint64_t seed,
                                 const TouchOptions& opts) {
  require_before_end(point);
  const TimeGrid& g = point.path.grid();
  const double t = point.t;
  const Path& x = point.path;
  const Path x0 = stop_path(x, t);
  const NuParams nu_p(opts.lambda, g.horizon(), opts.eps_fraction * eps_max(opts.lambda, g.horizon()));
  const Path zero(g);

  Rng rng(seed);
  const CiDerivatives d = estimate_ci_derivatives(phi, point);

  // Probe positions shared by every test functional.
  struct Probe {
    double t;
    Path x;
    double phi;
    double nu;  // nu_eps(t', x' - x0)
    Vector now;
  };
  std::vector<Probe> probes;
  probes.reserve(static_cast<std::size_t>(opts.probes));
  for (int k = 0; k < opts.probes; ++k) {
    const double scale = opts.scales[static_cast<std::size_t>(k) % opts.scales.size()] * (1.0 + uniform_norm(x, t));
    const int offset = uniform_int(rng, -opts.max_time_offset, opts.max_time_offset);
    const int node = std::clamp(point.node() + offset, g.zero_node(), g.last_node());
    Path xp = x;
    if (k % 10 != 9) xp.samples() += random_perturbation(g, rng, scale).samples();
    const double tp = g.time(node);
    const Path w(g, xp.samples() - x0.samples());
    probes.push_back({tp, xp, phi(tp, xp), nu(nu_p, tp, w), xp.at(tp)});
  }

  const double phi_anchor = phi(point);
  const Vector now = x.at(t);
  const double nu_anchor = nu(nu_p, t, zero);
  const double nu_dt_anchor = nu_dt(nu_p, t, zero);

  TouchReport rep;
  for (int k = 0; k < family_size; ++k) {
    TouchCase tc;
    const double mag = uniform(rng, opts.c_min, opts.c_max);
    tc.minimum = k % 2 == 1;
    tc.c = tc.minimum ? -mag : mag;
    tc.a = d.dt - tc.c * nu_dt_anchor;
    tc.b = d.grad + uniform(rng, 0.0, opts.gradient_noise) * unit_vector(rng, g.dim());
    auto psi = [&](double tp, const Vector& state, double nu_value) {
      return tc.a * tp + tc.b.dot(state) + tc.c * nu_value;
    };
    const double anchor_gap = phi_anchor - psi(t, now, nu_anchor);
    bool extremum = true;
    for (const auto& p : probes) {
      const double gap = p.phi - psi(p.t, p.now, p.nu);
      if (tc.minimum ? gap < anchor_gap - opts.slack : gap > anchor_gap + opts.slack) {
        extremum = false;
        break;
      }
    }
    tc.extremum = extremum;
    tc.lhs = d.dt + H(t, x, tc.b);
    if (extremum) {
      ++rep.extrema;
      tc.failed = tc.minimum ? tc.lhs > opts.tolerance : tc.lhs < -opts.tolerance;
      if (tc.failed) ++rep.failures;
    }
    rep.cases.push_back(std::move(tc));
  }
  return rep;
}

double relative_error(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1.0); }

bool ConsistencyReport::passed() const {
  return worst_dp_vs_classical <= tolerance && worst_dp_vs_analytic <= tolerance &&
         worst_classical_vs_analytic <= tolerance;
}

ConsistencyReport consistency_experiment(const ControlProblem& problem, const DPConfig& cfg,
                                         const ClassicalSolution& classical, const std::vector<HistoryPoint>& points,
                                         const FunctionalHandle* analytic, double tolerance) {
  ConsistencyReport rep;
  rep.tolerance = tolerance;
  const FunctionalHandle lifted = lift_to_path(classical);
  for (const auto& p : points) {
    ConsistencyEntry e;
    e.t = p.t;
    e.state = p.path.at(p.t);
    e.dp = value(problem, p, cfg).value;
    e.classical = lifted(p);
    e.dp_vs_classical = relative_error(e.dp, e.classical);
    rep.worst_dp_vs_classical = std::max(rep.worst_dp_vs_classical, e.dp_vs_classical);
    if (analytic) {
      e.analytic = (*analytic)(p);
      e.dp_vs_analytic = relative_error(e.dp, *e.analytic);
      e.classical_vs_analytic = relative_error(e.classical, *e.analytic);
      rep.worst_dp_vs_analytic = std::max(rep.worst_dp_vs_analytic, *e.dp_vs_analytic);
      rep.worst_classical_vs_analytic = std::max(rep.worst_classical_vs_analytic, *e.classical_vs_analytic);
    }
    rep.entries.push_back(std::move(e));
  }
  return rep;
}

bool StabilityReport::passed() const {
  if (!decreasing) return false;
  if (family == StabilityFamily::boundary) return bounded;
  return std::all_of(formula_errors.begin(), formula_errors.end(), [&](double e) { return e <= tolerance; });
}

StabilityReport stability_experiment(const ControlProblem& problem, const DPConfig& cfg,
                                     const std::vector<HistoryPoint>& points, const std::vector<double>& deltas,
                                     StabilityFamily family, const ControlProblem::Terminal& perturbation,
                                     double tolerance) {
  if (family == StabilityFamily::boundary && !perturbation)
    throw PreconditionError("boundary family needs a perturbation functional");
  StabilityReport rep;
  rep.family = family;
  rep.deltas = deltas;
  rep.tolerance = tolerance;
  std::vector<double> base;
  for (const auto& p : points) base.push_back(value(problem, p, cfg).value);

  rep.bounded = true;
  for (double delta : deltas) {
    ControlProblem q = problem;
    if (family == StabilityFamily::hamiltonian_shift) {
      const auto g0 = problem.g;
      q.g = [g0, delta](double t, const Path& y, const Vector& u) { return (g0 ? g0(t, y, u) : 0.0) - delta; };
    } else {
      const auto s0 = problem.sigma;
      q.sigma = [s0, perturbation, delta](const Path& y) { return s0(y) + delta * perturbation(y); };
    }
    double dev = 0.0, formula = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const double diff = value(q, points[i], cfg).value - base[i];
      dev = std::max(dev, std::abs(diff));
      if (family == StabilityFamily::hamiltonian_shift) {
        const double expected = delta * (points[i].path.grid().horizon() - points[i].t);
        formula = std::max(formula, std::abs(diff - expected));
      }
    }
    rep.deviations.push_back(dev);
    if (family == StabilityFamily::hamiltonian_shift) rep.formula_errors.push_back(formula);
    if (dev > std::abs(delta) * (1 + 1e-12) + 1e-15) rep.bounded = false;
  }
  rep.decreasing = true;
  for (std::size_t k = 1; k < rep.deviations.size(); ++k)
    if (!(rep.deviations[k] < rep.deviations[k - 1])) rep.decreasing = false;
  return rep;
}

}  // namespace pdhj
