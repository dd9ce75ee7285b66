#include "pdhj/functional.hpp"

#include "pdhj/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace pdhj {

FunctionalHandle operator+(const FunctionalHandle& a, const FunctionalHandle& b) {
  FunctionalHandle out;
  out.name = a.name + "+" + b.name;
  out.eval = [a, b](double t, const Path& x) { return a.eval(t, x) + b.eval(t, x); };
  if (a.has_derivatives() && b.has_derivatives()) {
    out.dt = [a, b](double t, const Path& x) { return a.dt(t, x) + b.dt(t, x); };
    out.grad = [a, b](double t, const Path& x) -> Vector { return a.grad(t, x) + b.grad(t, x); };
  }
  if (a.jump_eval && b.jump_eval)
    out.jump_eval = [a, b](double t, const Path& x, const Vector& j) {
      return a.jump_eval(t, x, j) + b.jump_eval(t, x, j);
    };
  return out;
}

FunctionalHandle operator*(double k, const FunctionalHandle& a) {
  FunctionalHandle out;
  std::ostringstream name;
  name << k << "*" << a.name;
  out.name = name.str();
  out.eval = [k, a](double t, const Path& x) { return k * a.eval(t, x); };
  if (a.has_derivatives()) {
    out.dt = [k, a](double t, const Path& x) { return k * a.dt(t, x); };
    out.grad = [k, a](double t, const Path& x) -> Vector { return k * a.grad(t, x); };
  }
  if (a.jump_eval)
    out.jump_eval = [k, a](double t, const Path& x, const Vector& j) { return k * a.jump_eval(t, x, j); };
  return out;
}

FunctionalHandle shifted(const FunctionalHandle& a, double constant) {
  FunctionalHandle out = a;
  std::ostringstream name;
  name << a.name << "+" << constant;
  out.name = name.str();
  out.eval = [a, constant](double t, const Path& x) { return a.eval(t, x) + constant; };
  if (a.jump_eval)
    out.jump_eval = [a, constant](double t, const Path& x, const Vector& j) {
      return a.jump_eval(t, x, j) + constant;
    };
  return out;
}

DirectionSet DirectionSet::ball(const Vector& center, double radius) {
  if (center.size() < 1) throw DomainError("direction set needs a dimension");
  if (!(radius >= 0.0)) throw DomainError("ball radius must be non-negative");
  DirectionSet f;
  f.center_ = center;
  f.radius_ = radius;
  return f;
}

DirectionSet DirectionSet::hull(std::vector<Vector> points) {
  if (points.empty()) throw DomainError("direction set must be non-empty");
  for (const auto& p : points)
    if (p.size() != points.front().size()) throw DomainError("direction vectors differ in dimension");
  DirectionSet f;
  f.center_ = points.front();
  f.points_ = std::move(points);
  return f;
}

int DirectionSet::dim() const { return static_cast<int>(center_.size()); }

double DirectionSet::min_linear(const Vector& s) const {
  if (is_ball()) return s.dot(center_) - radius_ * s.norm();
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : points_) best = std::min(best, s.dot(p));
  return best;
}

double DirectionSet::max_linear(const Vector& s) const { return -min_linear(-s); }

Vector DirectionSet::sample(Rng& rng, double eps) const {
  Vector base;
  if (is_ball()) {
    base = center_ + point_in_ball(rng, dim(), radius_);
  } else {
    // Random convex combination of the listed points.
    Vector w(static_cast<Eigen::Index>(points_.size()));
    for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = -std::log(uniform(rng, 1e-12, 1.0));
    w /= w.sum();
    base = Vector::Zero(dim());
    for (std::size_t i = 0; i < points_.size(); ++i) base += w(static_cast<Eigen::Index>(i)) * points_[i];
  }
  if (eps > 0) base += point_in_ball(rng, dim(), eps);
  return base;
}

NonanticipationReport check_nonanticipative(const FunctionalHandle& phi, const TimeGrid& grid, int trials,
                                            std::uint64_t seed, double tolerance) {
  if (trials < 1) throw DomainError("trials must be at least 1");
  NonanticipationReport report;
  report.trials = trials;
  for (int k = 0; k < trials; ++k) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(k)));
    const double t = random_node_time(grid, rng);
    const Path x = random_path(grid, rng);
    const Path y = random_continuation(x, t, rng);
    const double diff = std::abs(phi(t, x) - phi(t, y));
    report.worst = std::max(report.worst, diff);
    if (!(diff <= tolerance)) {
      ++report.violations;
      std::ostringstream msg;
      msg << "trial " << k << " t=" << t << " difference " << diff;
      report.details.push_back(msg.str());
    }
  }
  return report;
}

namespace {

void require_before_horizon(const HistoryPoint& point) {
  if (point.t >= point.path.grid().horizon() - 0.5 * point.path.grid().step())
    throw DomainError("derivative estimates need t < T");
}

void validate_schedule(const std::vector<double>& schedule, const HistoryPoint& point) {
  const TimeGrid& g = point.path.grid();
  if (schedule.empty()) throw DomainError("empty delta schedule");
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    const double d = schedule[i];
    if (!(d > 0)) throw DomainError("delta schedule entries must be positive");
    if (i > 0 && !(d < schedule[i - 1])) throw DomainError("delta schedule must be strictly decreasing");
    const double cells = d / g.step();
    if (std::abs(cells - std::round(cells)) > 1e-9 * std::max(1.0, cells))
      throw DomainError("delta schedule entries must be multiples of the grid step");
    if (point.t + d > g.horizon() + 1e-9 * g.step()) throw DomainError("delta schedule reaches past T");
  }
}

int cells_of(double delta, const TimeGrid& g) { return static_cast<int>(std::lround(delta / g.step())); }

}  // namespace

std::vector<double> default_delta_schedule(const HistoryPoint& point) {
  require_before_horizon(point);
  const TimeGrid& g = point.path.grid();
  const int room = g.last_node() - point.node();
  std::vector<double> out;
  for (int k : {8, 4, 2, 1})
    if (k <= room) out.push_back(k * g.step());
  return out;
}

CiDerivatives estimate_ci_derivatives(const FunctionalHandle& phi, const HistoryPoint& point,
                                      std::vector<double> schedule) {
  require_before_horizon(point);
  if (schedule.empty()) schedule = default_delta_schedule(point);
  validate_schedule(schedule, point);
  const TimeGrid& g = point.path.grid();
  const int n = g.dim();
  const int max_cells = g.last_node() - point.node();
  const double base = phi(point);

  // Probe 0 is the stopped path, probe i has slope e_i.
  std::vector<Path> probes;
  for (int i = 0; i <= n; ++i) {
    Vector v = Vector::Zero(n);
    if (i > 0) v(i - 1) = 1.0;
    probes.push_back(extend(point, SlopeSelection::constant(max_cells, v)));
  }

  const std::size_t m = schedule.size();
  std::vector<std::vector<double>> values(m, std::vector<double>(static_cast<std::size_t>(n + 1)));
  std::vector<double> dt_samples(m);
  std::vector<Vector> grad_samples(m, Vector(n));
  for (std::size_t k = 0; k < m; ++k) {
    const double d = schedule[k];
    for (int i = 0; i <= n; ++i) values[k][static_cast<std::size_t>(i)] = phi(point.t + d, probes[static_cast<std::size_t>(i)]);
    dt_samples[k] = (values[k][0] - base) / d;
    for (int i = 1; i <= n; ++i)
      grad_samples[k](i - 1) = (values[k][static_cast<std::size_t>(i)] - base) / d - dt_samples[k];
  }

  CiDerivatives out;
  out.schedule = schedule;
  out.dt = richardson(schedule, dt_samples, 1);
  out.grad = richardson(schedule, grad_samples, 1);
  for (std::size_t k = 0; k < m; ++k) {
    const double d = schedule[k];
    const int node = point.node() + cells_of(d, g);
    double worst = 0.0;
    for (int i = 0; i <= n; ++i) {
      const Path& y = probes[static_cast<std::size_t>(i)];
      const Vector dx = y.node(node) - point.path.node(point.node());
      const double rem = values[k][static_cast<std::size_t>(i)] - base - out.dt * d - out.grad.dot(dx);
      worst = std::max(worst, std::abs(rem) / d);
    }
    out.residuals.push_back(worst);
  }
  out.residual = out.residuals.back();
  return out;
}

double verify_integral_identity(const FunctionalHandle& phi, const HistoryPoint& point, const SlopeSelection& sel,
                                double tau) {
  if (!phi.has_derivatives()) throw PreconditionError("integral identity needs analytic derivatives");
  const TimeGrid& g = point.path.grid();
  if (tau < point.t || tau > g.horizon()) throw DomainError("tau must lie in [t, T]");
  const int end = g.node_of(tau);
  const Path y = extend(point, sel);
  const Path fine = y.refined(2);
  double integral = 0.0;
  for (int i = point.node(); i < end; ++i) {
    const double mid = g.time(i) + 0.5 * g.step();
    const Vector slope = (y.node(i + 1) - y.node(i)) / g.step();
    integral += g.step() * (phi.dt(mid, fine) + phi.grad(mid, fine).dot(slope));
  }
  return std::abs(phi(tau, y) - phi(point) - integral);
}

Vector vertical_derivative_estimate(const FunctionalHandle& phi, const HistoryPoint& point,
                                    std::vector<double> schedule) {
  if (!phi.jump_eval) throw PreconditionError("vertical derivative needs jump_eval");
  if (schedule.empty()) schedule = {1e-2, 5e-3, 2.5e-3, 1.25e-3};
  const int n = point.path.dim();
  std::vector<Vector> samples;
  for (double d : schedule) {
    if (!(d > 0)) throw DomainError("jump sizes must be positive");
    Vector est(n);
    for (int i = 0; i < n; ++i) {
      Vector e = Vector::Zero(n);
      e(i) = d;
      est(i) = (phi.jump_eval(point.t, point.path, e) - phi.jump_eval(point.t, point.path, -e)) / (2 * d);
    }
    samples.push_back(std::move(est));
  }
  return richardson(schedule, samples, 2);
}

double horizontal_derivative_estimate(const FunctionalHandle& phi, const HistoryPoint& point,
                                      std::vector<double> schedule) {
  require_before_horizon(point);
  if (schedule.empty()) schedule = default_delta_schedule(point);
  validate_schedule(schedule, point);
  const Path stopped = stop_path(point.path, point.t);
  const double base = phi(point);
  std::vector<double> q;
  for (double d : schedule) q.push_back((phi(point.t + d, stopped) - base) / d);
  return richardson(schedule, q, 1);
}

DirectionalEstimate directional_derivative(const FunctionalHandle& phi, const HistoryPoint& point,
                                           const DirectionSet& F, Bound mode, const DirectionalOptions& opts) {
  require_before_horizon(point);
  const TimeGrid& g = point.path.grid();
  if (F.dim() != g.dim()) throw DomainError("direction set dimension mismatch");
  std::vector<double> deltas = opts.delta_schedule.empty() ? default_delta_schedule(point) : opts.delta_schedule;
  validate_schedule(deltas, point);
  if (opts.eps_schedule.empty()) throw DomainError("empty eps schedule");
  const int cells = cells_of(deltas.front(), g);
  const double base = phi(point);
  const int n = g.dim();

  // Direction of steepest change, used to place the extreme constant selections.
  Vector steep = Vector::Zero(n);
  if (g.last_node() - point.node() >= 1) {
    const Vector grad = estimate_ci_derivatives(phi, point).grad;
    if (grad.norm() > 1e-14) steep = grad.normalized();
  }

  // Difference quotients of one selection at every delta.
  auto quotients = [&](const SlopeSelection& sel) {
    SlopeSelection full = sel;
    full.slopes.resize(static_cast<std::size_t>(g.last_node() - point.node()), Vector::Zero(n));
    const Path y = extend(point, full);
    std::vector<double> q;
    for (double d : deltas) q.push_back((phi(point.t + d, y) - base) / d);
    return q;
  };

  DirectionalEstimate out;
  Rng rng(opts.seed);
  for (double eps : opts.eps_schedule) {
    std::vector<Vector> extremes;
    if (F.is_ball()) {
      const double r = F.radius() + eps;
      for (int i = 0; i < n; ++i) {
        Vector e = Vector::Zero(n);
        e(i) = r;
        extremes.push_back(F.center() + e);
        extremes.push_back(F.center() - e);
      }
      extremes.push_back(F.center() + r * steep);
      extremes.push_back(F.center() - r * steep);
    } else {
      for (const auto& p : F.points()) {
        extremes.push_back(p + eps * steep);
        extremes.push_back(p - eps * steep);
      }
    }
    // inf/sup over selections at each delta, then the limit in delta.
    const bool lower = mode == Bound::lower;
    std::vector<double> best(deltas.size(), lower ? std::numeric_limits<double>::infinity()
                                                  : -std::numeric_limits<double>::infinity());
    auto consider = [&](const std::vector<double>& q) {
      for (std::size_t k = 0; k < q.size(); ++k) best[k] = lower ? std::min(best[k], q[k]) : std::max(best[k], q[k]);
    };
    for (const auto& v : extremes) consider(quotients(SlopeSelection::constant(cells, v)));
    for (int k = 0; k < opts.samples_per_eps; ++k) {
      SlopeSelection sel;
      for (int c = 0; c < cells; ++c) sel.slopes.push_back(F.sample(rng, eps));
      consider(quotients(sel));
    }
    const double limit = richardson(deltas, best, 1);
    out.eps.push_back(eps);
    out.per_eps.push_back(limit);
  }
  out.value = out.eps.size() > 1 ? richardson(out.eps, out.per_eps, 1) : out.per_eps.front();
  return out;
}

}  // namespace pdhj
