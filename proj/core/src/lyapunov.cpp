#include "pdhj/lyapunov.hpp"

#include "pdhj/numerics.hpp"
#include "pdhj/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace pdhj {

namespace {

// Squared running maximum on [-h, t] and the current value.
std::pair<double, Vector> history_state(double t, const Path& x) {
  const Vector now = x.at(t);
  const double m = std::max(x.max_norm_through(x.grid().node_floor(t)), now.norm());
  return {m * m, now};
}

double V_from(double max_sq, const Vector& now) {
  if (max_sq <= 0.0) return 0.0;
  const double cur = now.squaredNorm();
  const double gap = max_sq - cur;
  return gap * gap / max_sq + cur;
}

Vector grad_V_from(double max_sq, const Vector& now) {
  if (max_sq <= 0.0) return Vector::Zero(now.size());
  return (2.0 - 4.0 * (max_sq - now.squaredNorm()) / max_sq) * now;
}

}  // namespace

double eps_max(double lambda, double horizon) {
  return std::exp(-lambda * horizon / kKappa) / std::sqrt(kKappa);
}

double lyapunov_V(double t, const Path& x) {
  const auto [max_sq, now] = history_state(t, x);
  return V_from(max_sq, now);
}

double lyapunov_V_jump(double t, const Path& x, const Vector& jump) {
  auto [max_sq, now] = history_state(t, x);
  now += jump;
  max_sq = std::max(max_sq, now.squaredNorm());
  return V_from(max_sq, now);
}

Vector lyapunov_grad_V(double t, const Path& x) {
  const auto [max_sq, now] = history_state(t, x);
  return grad_V_from(max_sq, now);
}

FunctionalHandle V_functional() {
  FunctionalHandle phi;
  phi.name = "V";
  phi.eval = lyapunov_V;
  phi.dt = [](double, const Path&) { return 0.0; };
  phi.grad = lyapunov_grad_V;
  phi.jump_eval = lyapunov_V_jump;
  return phi;
}

NuParams::NuParams(double lambda_, double horizon_, double eps_) : lambda(lambda_), horizon(horizon_), eps(eps_) {
  if (!(lambda > 0) || !(horizon > 0)) throw DomainError("lambda and T must be positive");
  const double top = eps0();
  if (!(eps > 0) || eps > top * (1 + 1e-12)) {
    std::ostringstream msg;
    msg << "epsilon " << eps << " outside (0, " << top << "]";
    throw DomainError(msg.str());
  }
}

double NuParams::alpha(double t) const {
  return (std::exp(-lambda * t / kKappa) - eps * std::sqrt(kKappa)) / eps;
}

double nu(const NuParams& p, double t, const Path& x) {
  const double e2 = p.eps * p.eps;
  return p.alpha(t) * std::sqrt(e2 * e2 + lyapunov_V(t, x));
}

double nu_dt(const NuParams& p, double t, const Path& x) {
  const double e2 = p.eps * p.eps;
  const double beta = std::sqrt(e2 * e2 + lyapunov_V(t, x));
  return -p.lambda * std::exp(-p.lambda * t / kKappa) * beta / (kKappa * p.eps);
}

Vector nu_grad(const NuParams& p, double t, const Path& x) {
  const auto [max_sq, now] = history_state(t, x);
  const double e2 = p.eps * p.eps;
  const double beta = std::sqrt(e2 * e2 + V_from(max_sq, now));
  return p.alpha(t) / (2.0 * beta) * grad_V_from(max_sq, now);
}

FunctionalHandle nu_functional(const NuParams& p) {
  FunctionalHandle phi;
  std::ostringstream name;
  name << "nu(eps=" << p.eps << ")";
  phi.name = name.str();
  phi.eval = [p](double t, const Path& x) { return nu(p, t, x); };
  phi.dt = [p](double t, const Path& x) { return nu_dt(p, t, x); };
  phi.grad = [p](double t, const Path& x) { return nu_grad(p, t, x); };
  phi.jump_eval = [p](double t, const Path& x, const Vector& j) {
    const double e2 = p.eps * p.eps;
    return p.alpha(t) * std::sqrt(e2 * e2 + lyapunov_V_jump(t, x, j));
  };
  return phi;
}

ConditionReport verify_conditions(double lambda, double horizon, const HamiltonianHandle& H,
                                  const std::function<double(const Path&)>& sigma, const std::vector<Path>& D,
                                  const ConditionCheckConfig& cfg) {
  if (D.size() < 2) throw DomainError("sample set D needs at least two histories");
  const TimeGrid& grid = D.front().grid();
  ConditionReport report;
  report.lambda = lambda;
  report.lambda_source = "estimated on D";
  const double e0 = eps_max(lambda, horizon);
  std::vector<NuParams> family;
  for (double k : {1.0, 2.0, 4.0, 8.0}) family.emplace_back(lambda, horizon, e0 / k);

  auto pick_pair = [&](Rng& rng) {
    const int i = uniform_int(rng, 0, static_cast<int>(D.size()) - 1);
    int j = uniform_int(rng, 0, static_cast<int>(D.size()) - 2);
    if (j >= i) ++j;
    return std::pair<const Path&, const Path&>(D[static_cast<std::size_t>(i)], D[static_cast<std::size_t>(j)]);
  };

  // (a) sign and the integral identity along random extensions of differences.
  {
    Rng rng(derive_seed(cfg.seed, 1));
    report.min_nu = std::numeric_limits<double>::infinity();
    double tol = 0.0;
    for (int k = 0; k < cfg.identity_trials; ++k) {
      const NuParams& p = family[static_cast<std::size_t>(k) % family.size()];
      const auto [x, y] = pick_pair(rng);
      const Path w(grid, x.samples() - y.samples());
      const double t = random_node_time(grid, rng);
      const HistoryPoint point(t, w);
      const int cells = grid.last_node() - point.node();
      const double speed = uniform(rng, 0.0, 2.0) * (1.0 + uniform_norm(w, t));
      SlopeSelection sel;
      for (int c = 0; c < cells; ++c) sel.slopes.push_back(point_in_ball(rng, grid.dim(), speed));
      const double tau = grid.time(uniform_int(rng, point.node(), grid.last_node()));
      const FunctionalHandle phi = nu_functional(p);
      const double res = verify_integral_identity(phi, point, sel, tau);
      const Path ext = extend(point, sel);
      double scale = 0.0;
      for (int i = point.node(); i <= grid.node_of(tau); ++i) {
        const double v = nu(p, grid.time(i), ext);
        report.min_nu = std::min(report.min_nu, v);
        scale = std::max(scale, std::abs(v));
      }
      const double allowed = 10.0 * grid.step() * (1.0 + scale);
      tol = std::max(tol, allowed);
      report.worst_identity_residual = std::max(report.worst_identity_residual, res / allowed);
    }
    report.identity_tolerance = tol;
    report.a_passed = report.min_nu >= 0.0 && report.worst_identity_residual <= 1.0;
  }

  // (b) nu(t, 0) <= eps on every grid time, and equal to its closed form.
  {
    const Path zero(grid);
    bool ok = true;
    report.worst_zero_history_excess = -std::numeric_limits<double>::infinity();
    for (const auto& p : family)
      for (int i = grid.zero_node(); i <= grid.last_node(); ++i) {
        const double t = grid.time(i);
        const double v = nu(p, t, zero);
        const double closed = (std::exp(-p.lambda * t / kKappa) - p.eps * std::sqrt(kKappa)) * p.eps;
        report.worst_zero_history_excess = std::max(report.worst_zero_history_excess, v - p.eps);
        report.worst_zero_history_formula_error = std::max(report.worst_zero_history_formula_error, std::abs(v - closed));
        if (v > p.eps) ok = false;
      }
    report.b_passed = ok;
  }

  // (c) sigma modulus over pairs with nu(T, x - y) <= level.
  {
    for (const auto& p : family) {
      double worst = 0.0;
      for (std::size_t i = 0; i < D.size(); ++i)
        for (std::size_t j = i + 1; j < D.size(); ++j) {
          const Path w(grid, D[i].samples() - D[j].samples());
          if (nu(p, horizon, w) <= cfg.level) worst = std::max(worst, std::abs(sigma(D[i]) - sigma(D[j])));
        }
      report.c_eps.push_back(p.eps);
      report.c_sequence.push_back(worst);
    }
    bool strictly = true;
    for (std::size_t k = 1; k < report.c_sequence.size(); ++k)
      if (!(report.c_sequence[k] < report.c_sequence[k - 1])) strictly = false;
    report.c_passed = strictly;
  }

  // (d) the comparison inequality at sampled (t, x, y).
  {
    Rng rng(derive_seed(cfg.seed, 4));
    double worst = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < cfg.inequality_trials; ++k) {
      const NuParams& p = family[static_cast<std::size_t>(k) % family.size()];
      const auto [x, y] = pick_pair(rng);
      const double t = random_node_time(grid, rng);
      const Path w(grid, x.samples() - y.samples());
      const Vector s = nu_grad(p, t, w);
      const double lhs = nu_dt(p, t, w) + H(t, x, s) - H(t, y, s);
      worst = std::max(worst, lhs);
      ++report.d_samples;
    }
    report.worst_violation = std::max(0.0, worst);
    report.d_passed = report.worst_violation <= cfg.inequality_tolerance;
  }
  return report;
}

}  // namespace pdhj
