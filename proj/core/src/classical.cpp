#include "pdhj/classical.hpp"

#include "pdhj/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <memory>
#include <ostream>
#include <sstream>

namespace pdhj {

namespace {

std::vector<int> strides_for(const std::vector<int>& cells) {
  std::vector<int> s(cells.size());
  int acc = 1;
  for (std::size_t d = 0; d < cells.size(); ++d) {
    s[d] = acc;
    acc *= cells[d] + 1;
  }
  return s;
}

void validate(const ClassicalProblem& p) {
  const int n = p.dim();
  if (n < 1 || n > 3) throw DomainError("classical solver supports dimensions 1 to 3");
  if (p.upper.size() != n || static_cast<int>(p.cells.size()) != n)
    throw DomainError("box and mesh dimensions disagree");
  for (int d = 0; d < n; ++d) {
    if (!(p.upper(d) > p.lower(d))) throw DomainError("empty box");
    if (p.cells[static_cast<std::size_t>(d)] < 2) throw DomainError("mesh needs at least two cells per axis");
  }
  if (!(p.horizon > 0)) throw DomainError("horizon must be positive");
  if (!p.H || !p.sigma) throw DomainError("classical problem needs H and sigma");
}

}  // namespace

ClassicalSolution::ClassicalSolution(ClassicalProblem problem, std::vector<double> times, std::vector<Vector> slices,
                                     Vector viscosity)
    : problem_(std::move(problem)),
      times_(std::move(times)),
      slices_(std::move(slices)),
      viscosity_(std::move(viscosity)),
      strides_(strides_for(problem_.cells)) {}

Vector ClassicalSolution::node_position(int flat) const {
  const int n = problem_.dim();
  Vector x(n);
  for (int d = 0; d < n; ++d) {
    const int cells = problem_.cells[static_cast<std::size_t>(d)];
    const int idx = (flat / strides_[static_cast<std::size_t>(d)]) % (cells + 1);
    x(d) = problem_.lower(d) + (problem_.upper(d) - problem_.lower(d)) * idx / cells;
  }
  return x;
}

bool ClassicalSolution::contains(const Vector& x) const {
  const double tol = 1e-12;
  for (int d = 0; d < problem_.dim(); ++d)
    if (x(d) < problem_.lower(d) - tol || x(d) > problem_.upper(d) + tol) return false;
  return true;
}

double ClassicalSolution::interpolate_slice(int slice, const Vector& x) const {
  const int n = problem_.dim();
  std::vector<int> base(static_cast<std::size_t>(n));
  std::vector<double> frac(static_cast<std::size_t>(n));
  for (int d = 0; d < n; ++d) {
    const int cells = problem_.cells[static_cast<std::size_t>(d)];
    const double pos = (x(d) - problem_.lower(d)) / (problem_.upper(d) - problem_.lower(d)) * cells;
    const int i = std::clamp(static_cast<int>(std::floor(pos)), 0, cells - 1);
    base[static_cast<std::size_t>(d)] = i;
    frac[static_cast<std::size_t>(d)] = std::clamp(pos - i, 0.0, 1.0);
  }
  const Vector& v = slices_[static_cast<std::size_t>(slice)];
  double acc = 0.0;
  for (int corner = 0; corner < (1 << n); ++corner) {
    double w = 1.0;
    int flat = 0;
    for (int d = 0; d < n; ++d) {
      const bool up = (corner >> d) & 1;
      const double f = frac[static_cast<std::size_t>(d)];
      w *= up ? f : 1.0 - f;
      flat += (base[static_cast<std::size_t>(d)] + (up ? 1 : 0)) * strides_[static_cast<std::size_t>(d)];
    }
    if (w != 0.0) acc += w * v(flat);
  }
  return acc;
}

double ClassicalSolution::operator()(double t, const Vector& x) const {
  if (x.size() != problem_.dim()) throw DomainError("state has wrong dimension");
  if (!contains(x)) throw DomainError("state outside the solver box");
  const double T = problem_.horizon;
  if (t < -1e-12 || t > T + 1e-12) throw DomainError("time outside [0, T]");
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  const int k = std::clamp(static_cast<int>(it - times_.begin()) - 1, 0, static_cast<int>(times_.size()) - 2);
  const double t0 = times_[static_cast<std::size_t>(k)];
  const double t1 = times_[static_cast<std::size_t>(k) + 1];
  const double w = std::clamp((t - t0) / (t1 - t0), 0.0, 1.0);
  const double a = interpolate_slice(k, x);
  if (w == 0.0) return a;
  return (1 - w) * a + w * interpolate_slice(k + 1, x);
}

Vector ClassicalSolution::gradient(double t, const Vector& x) const {
  const int n = problem_.dim();
  Vector g(n);
  for (int d = 0; d < n; ++d) {
    const double hx = (problem_.upper(d) - problem_.lower(d)) / problem_.cells[static_cast<std::size_t>(d)];
    Vector a = x, b = x;
    a(d) = std::max(x(d) - 0.5 * hx, problem_.lower(d));
    b(d) = std::min(x(d) + 0.5 * hx, problem_.upper(d));
    g(d) = ((*this)(t, b) - (*this)(t, a)) / (b(d) - a(d));
  }
  return g;
}

ClassicalSolution solve_classical(const ClassicalProblem& problem) {
  validate(problem);
  const int n = problem.dim();
  const auto strides = strides_for(problem.cells);
  int count = 1;
  for (int c : problem.cells) count *= c + 1;
  Vector dx(n);
  for (int d = 0; d < n; ++d) dx(d) = (problem.upper(d) - problem.lower(d)) / problem.cells[static_cast<std::size_t>(d)];

  auto position = [&](int flat) {
    Vector x(n);
    for (int d = 0; d < n; ++d) {
      const int idx = (flat / strides[static_cast<std::size_t>(d)]) % (problem.cells[static_cast<std::size_t>(d)] + 1);
      x(d) = problem.lower(d) + dx(d) * idx;
    }
    return x;
  };

  Rng rng(problem.seed);
  double s_radius = problem.gradient_bound;
  if (!(s_radius > 0)) {
    // Sampled slope of sigma over the box, doubled.
    double slope = 0.0;
    for (int k = 0; k < 400; ++k) {
      Vector a(n), b(n);
      for (int d = 0; d < n; ++d) {
        a(d) = uniform(rng, problem.lower(d), problem.upper(d));
        b(d) = std::clamp(a(d) + uniform(rng, -dx(d), dx(d)), problem.lower(d), problem.upper(d));
      }
      const double len = (a - b).norm();
      if (len > 0) slope = std::max(slope, std::abs(problem.sigma(a) - problem.sigma(b)) / len);
    }
    s_radius = 2.0 * slope + 1.0;
  }

  // Artificial viscosity: 1.1 x sampled max |dH/ds_i|.
  Vector theta = Vector::Zero(n);
  for (int k = 0; k < 2000; ++k) {
    Vector x(n);
    for (int d = 0; d < n; ++d) x(d) = uniform(rng, problem.lower(d), problem.upper(d));
    const double t = uniform(rng, 0.0, problem.horizon);
    const Vector s = point_in_ball(rng, n, s_radius);
    for (int d = 0; d < n; ++d) {
      const double e = 1e-6 * (1.0 + s_radius);
      Vector sp = s, sm = s;
      sp(d) += e;
      sm(d) -= e;
      theta(d) = std::max(theta(d), std::abs(problem.H(t, x, sp) - problem.H(t, x, sm)) / (2 * e));
    }
  }
  theta *= 1.1;
  for (int d = 0; d < n; ++d) theta(d) = std::max(theta(d), 1e-12);

  const double rate = (theta.array() / dx.array()).sum();
  double dt = problem.time_step;
  if (dt > 0) {
    if (dt * rate > 1.0 + 1e-12) {
      std::ostringstream msg;
      msg << "time step " << dt << " violates the CFL bound " << 1.0 / rate;
      throw DomainError(msg.str());
    }
  } else {
    dt = 1.0 / rate;
  }
  const int steps = std::max(1, static_cast<int>(std::ceil(problem.horizon / dt - 1e-9)));
  dt = problem.horizon / steps;

  std::vector<double> times(static_cast<std::size_t>(steps) + 1);
  for (int k = 0; k <= steps; ++k) times[static_cast<std::size_t>(k)] = problem.horizon * k / steps;
  std::vector<Vector> slices(static_cast<std::size_t>(steps) + 1, Vector(count));
  std::vector<Vector> nodes(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) nodes[static_cast<std::size_t>(i)] = position(i);
  for (int i = 0; i < count; ++i) slices.back()(i) = problem.sigma(nodes[static_cast<std::size_t>(i)]);

  Vector p_bar(n);
  for (int k = steps; k > 0; --k) {
    const Vector& next = slices[static_cast<std::size_t>(k)];
    Vector& cur = slices[static_cast<std::size_t>(k) - 1];
    const double t_next = times[static_cast<std::size_t>(k)];
    for (int i = 0; i < count; ++i) {
      double diffusion = 0.0;
      for (int d = 0; d < n; ++d) {
        const int cells = problem.cells[static_cast<std::size_t>(d)];
        const int stride = strides[static_cast<std::size_t>(d)];
        const int idx = (i / stride) % (cells + 1);
        const double mid = next(i);
        // Ghost values by linear extrapolation.
        const double left = idx > 0 ? next(i - stride) : 2 * mid - next(i + stride);
        const double right = idx < cells ? next(i + stride) : 2 * mid - next(i - stride);
        const double plus = (right - mid) / dx(d);
        const double minus = (mid - left) / dx(d);
        p_bar(d) = 0.5 * (plus + minus);
        diffusion += 0.5 * theta(d) * (plus - minus);
      }
      cur(i) = next(i) + dt * (problem.H(t_next, nodes[static_cast<std::size_t>(i)], p_bar) + diffusion);
    }
  }
  return ClassicalSolution(problem, std::move(times), std::move(slices), theta);
}

FunctionalHandle lift_to_path(const ClassicalSolution& solution) {
  auto shared = std::make_shared<const ClassicalSolution>(solution);
  FunctionalHandle phi;
  phi.name = "lifted_classical";
  phi.eval = [shared](double t, const Path& x) { return (*shared)(t, x.at(t)); };
  phi.jump_eval = [shared](double t, const Path& x, const Vector& j) {
    return (*shared)(t, Vector(x.at(t) + j));
  };
  return phi;
}

void write_csv(std::ostream& out, const ClassicalSolution& solution, int stride) {
  const int n = solution.problem().dim();
  out << "t";
  for (int d = 0; d < n; ++d) out << ",x" << (d + 1);
  out << ",phi\n" << std::setprecision(12);
  const int last = static_cast<int>(solution.times().size()) - 1;
  for (int k = 0; k <= last; ++k) {
    if (k % std::max(stride, 1) != 0 && k != last) continue;
    for (int i = 0; i < solution.node_count(); ++i) {
      out << solution.times()[static_cast<std::size_t>(k)];
      const Vector x = solution.node_position(i);
      for (int d = 0; d < n; ++d) out << ',' << x(d);
      out << ',' << solution.node_value(k, i) << '\n';
    }
  }
}

}  // namespace pdhj
