#include "pdhj/characteristics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

namespace pdhj {

void write_csv(std::ostream& out, const CharacteristicPair& pair) {
  const Path& y = pair.y;
  out << "time";
  for (int d = 0; d < y.dim(); ++d) out << ",y" << (d + 1);
  out << ",z\n" << std::setprecision(12);
  for (int i = 0; i < y.node_count(); ++i) {
    out << y.grid().time(i);
    for (int d = 0; d < y.dim(); ++d) out << ',' << y.node(i)(d);
    out << ',' << pair.z.node(i)(0) << '\n';
  }
}

ComplexHandle::ComplexHandle(Kind kind, double c, HamiltonianHandle H, bool lifted)
    : kind_(kind), c_(c), H_(std::move(H)), lifted_(lifted) {
  if (!(c > 0)) throw DomainError("complex growth constant must be positive");
  if (lifted && kind == Kind::standard) throw DomainError("the standard complex is not lifted");
}

double ComplexHandle::radius(double tau, const Path& y) const {
  const double m = std::max(y.max_norm_through(y.grid().node_floor(tau)), y.at(tau).norm());
  const double factor = kind_ == Kind::standard ? 1.0 : std::sqrt(2.0);
  return factor * c_ * (1.0 + m);
}

double ComplexHandle::constraint_value(double tau, const Path& y, const Vector& param) const {
  return H_(tau, y, param);
}

Vector ComplexHandle::stacked(const ComplexPoint& p) const {
  if (!lifted_) return p.f;
  Vector v(p.f.size() + 1);
  v << p.f, p.g;
  return v;
}

ComplexPoint ComplexHandle::unstack(const Vector& v, int n) const {
  if (!lifted_) return {v, 0.0};
  return {v.head(n), v(n)};
}

namespace {

Vector clip_to_ball(const Vector& v, double r) {
  const double norm = v.norm();
  return norm > r ? Vector(v * (r / norm)) : v;
}

}  // namespace

ComplexPoint ComplexHandle::select(double tau, const Path& y, const Vector& param, const Vector& raw) const {
  const int n = y.dim();
  const int m = selection_dim(n);
  if (raw.size() != m || param.size() != m) throw DomainError("selection or parameter has wrong dimension");
  const double r = radius(tau, y);
  Vector v = clip_to_ball(raw, r);
  if (kind_ == Kind::standard) return {v, param.dot(v) - H_(tau, y, param)};

  const double orient = kind_ == Kind::upper ? 1.0 : -1.0;
  const double level = constraint_value(tau, y, param);
  const double slack = orient * (param.dot(v) - level);
  if (slack >= 0) return unstack(v, n);
  const double qn = param.norm();
  const Vector support = qn > 0 ? Vector(orient * r * param / qn) : Vector(Vector::Zero(m));
  const double top = orient * (param.dot(support) - level);
  if (top < 0) throw DomainError("half-ball is empty: H exceeds the support value, c is too small");
  const double theta = -slack / (top - slack);
  return unstack(v + theta * (support - v), n);
}

bool ComplexHandle::empty(double tau, const Path& y, const Vector& param) const {
  if (kind_ == Kind::standard) return false;
  const double orient = kind_ == Kind::upper ? 1.0 : -1.0;
  const double top = radius(tau, y) * param.norm() - orient * constraint_value(tau, y, param);
  return top < 0;
}

bool ComplexHandle::contains(double tau, const Path& y, const Vector& param, const ComplexPoint& p,
                             double tol) const {
  const double r = radius(tau, y);
  const Vector v = stacked(p);
  if (v.norm() > r * (1 + tol) + tol) return false;
  if (kind_ == Kind::standard) return std::abs(p.g - (param.dot(p.f) - H_(tau, y, param))) <= tol * (1 + std::abs(p.g));
  if (!lifted_ && p.g != 0.0) return false;
  const double orient = kind_ == Kind::upper ? 1.0 : -1.0;
  const double level = constraint_value(tau, y, param);
  return orient * (param.dot(v) - level) >= -tol * (1 + std::abs(level));
}

std::vector<ComplexPoint> ComplexHandle::mesh(double tau, const Path& y, const Vector& param, int directions,
                                              const Vector& objective) const {
  const int n = y.dim();
  const int m = selection_dim(n);
  const double r = radius(tau, y);
  std::vector<ComplexPoint> out;
  if (kind_ == Kind::standard) {
    const double h = H_(tau, y, param);
    auto add = [&](const Vector& f) { out.push_back({f, param.dot(f) - h}); };
    add(Vector::Zero(n));
    for (const auto& d : direction_mesh(n, directions)) add(r * d);
    const Vector w = objective - param;
    if (w.norm() > 0) {
      add(r * w.normalized());
      add(-r * w.normalized());
    }
    return out;
  }
  if (empty(tau, y, param)) return out;
  for (const auto& d : direction_mesh(m, directions)) out.push_back(select(tau, y, param, r * d));
  const double qn = param.norm();
  if (qn > 0) {
    const double orient = kind_ == Kind::upper ? 1.0 : -1.0;
    out.push_back(unstack(Vector(orient * r * param / qn), n));
  }
  return out;
}

ComplexHandle standard_E(double c, const HamiltonianHandle& H) {
  return ComplexHandle(ComplexHandle::Kind::standard, c, H);
}

ComplexPair homogeneous_complexes(double c, const HamiltonianHandle& H) {
  return {ComplexHandle(ComplexHandle::Kind::upper, c, H), ComplexHandle(ComplexHandle::Kind::lower, c, H)};
}

ComplexPair lifted_complexes(double c, const HamiltonianHandle& H, std::vector<double> theta_schedule) {
  const HamiltonianHandle lifted = lift_hamiltonian(H, std::move(theta_schedule));
  return {ComplexHandle(ComplexHandle::Kind::upper, c, lifted, true),
          ComplexHandle(ComplexHandle::Kind::lower, c, lifted, true)};
}

SelectionPolicy SelectionPolicy::constant(Vector raw) {
  SelectionPolicy p;
  p.mode = Mode::fixed;
  p.fixed = std::move(raw);
  return p;
}

SelectionPolicy SelectionPolicy::random(std::uint64_t seed) {
  SelectionPolicy p;
  p.mode = Mode::random;
  p.seed = seed;
  return p;
}

SelectionPolicy SelectionPolicy::driven(Callback cb) {
  SelectionPolicy p;
  p.mode = Mode::callback;
  p.callback = std::move(cb);
  return p;
}

CharacteristicPair integrate_characteristic(const ComplexHandle& complex, const HistoryPoint& point,
                                            const Vector& param, const SelectionPolicy& policy,
                                            std::optional<double> until) {
  const TimeGrid& g = point.path.grid();
  if (point.node() >= g.last_node()) throw DomainError("characteristics need t < T");
  const int end = until ? g.node_of(*until) : g.last_node();
  if (end < point.node()) throw DomainError("integration end lies before t");
  const int n = g.dim();
  const int m = complex.selection_dim(n);
  CharacteristicPair pair{stop_path(point.path, point.t), Path(TimeGrid(1, g.delay(), g.horizon(), g.step()))};
  Rng rng(policy.seed);
  for (int i = point.node(); i < end; ++i) {
    const double tau = g.time(i);
    const int cell = i - point.node();
    Vector raw;
    switch (policy.mode) {
      case SelectionPolicy::Mode::fixed: raw = policy.fixed; break;
      case SelectionPolicy::Mode::random: raw = point_in_ball(rng, m, complex.radius(tau, pair.y)); break;
      case SelectionPolicy::Mode::callback: raw = policy.callback(cell, tau, pair.y); break;
    }
    if (raw.size() != m) throw DomainError("selection has wrong dimension");
    const ComplexPoint p = complex.select(tau, pair.y, param, raw);
    if (!policy.clip) {
      const Vector got = complex.lifted() ? Vector((Vector(m) << p.f, p.g).finished()) : p.f;
      if ((got - raw).norm() > 1e-10 * (1 + raw.norm())) {
        std::ostringstream msg;
        msg << "selection outside the set in cell " << cell;
        throw DomainError(msg.str());
      }
    }
    pair.y.node(i + 1) = pair.y.node(i) + g.step() * p.f;
    pair.z.node(i + 1)(0) = pair.z.node(i)(0) + g.step() * p.g;
  }
  for (int i = end + 1; i < g.node_count(); ++i) {
    pair.y.node(i) = pair.y.node(end);
    pair.z.node(i) = pair.z.node(end);
  }
  return pair;
}

C4Report verify_C4(const ComplexHandle& complex, const HamiltonianHandle& H, const std::vector<C4Sample>& samples,
                   int mesh_directions, int param_perturbations, std::uint64_t seed) {
  if (mesh_directions < 8 && samples.size() > 0 && samples.front().y.dim() > 1)
    throw DomainError("mesh needs at least 8 directions");
  C4Report report;
  const bool upper_side = complex.kind() != ComplexHandle::Kind::lower;
  const bool lower_side = complex.kind() != ComplexHandle::Kind::upper;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const C4Sample& smp = samples[k];
    const int n = smp.y.dim();
    const int m = complex.selection_dim(n);
    Vector base(m);
    if (complex.lifted())
      base << smp.s, -1.0;
    else
      base = smp.s;
    Rng rng(derive_seed(seed, k));
    std::vector<Vector> params{base};
    const double spread = 0.05 * std::max(base.norm(), 1e-3);
    for (int j = 0; j < param_perturbations; ++j) params.push_back(base + spread * point_in_ball(rng, m, 1.0));

    const double target = H(smp.t, smp.y, smp.s);
    double sup_min = -std::numeric_limits<double>::infinity();
    double inf_max = std::numeric_limits<double>::infinity();
    for (const auto& q : params) {
      const auto pts = complex.mesh(smp.t, smp.y, q, mesh_directions, smp.s);
      if (pts.empty()) {
        ++report.empty_sets;
        continue;
      }
      double lo = std::numeric_limits<double>::infinity();
      double hi = -lo;
      for (const auto& p : pts) {
        const double v = smp.s.dot(p.f) - p.g;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      sup_min = std::max(sup_min, lo);
      inf_max = std::min(inf_max, hi);
    }
    double res = 0.0;
    if (upper_side) res = std::max(res, std::abs(sup_min - target));
    if (lower_side) res = std::max(res, std::abs(inf_max - target));
    report.residuals.push_back(res);
    report.worst = std::max(report.worst, res);
  }
  return report;
}

ZeroSlice zero_slice(const HamiltonianHandle& H, double t, const Path& x, const Vector& s,
                     const std::vector<double>& theta_schedule) {
  if (theta_schedule.empty()) throw DomainError("empty theta schedule");
  ZeroSlice out;
  for (std::size_t k = 0; k < theta_schedule.size(); ++k) {
    const double th = theta_schedule[k];
    if (!(th > 0) || (k > 0 && !(th < theta_schedule[k - 1])))
      throw DomainError("theta schedule must be positive and decreasing");
    out.theta.push_back(th);
    out.estimates.push_back(th * H(t, x, Vector(s / th)));
  }
  const std::size_t K = out.theta.size();
  if (K == 1) {
    out.value = out.estimates.front();
    return out;
  }
  auto secant = [&](std::size_t a) {
    return std::abs(out.estimates[a + 1] - out.estimates[a]) / (out.theta[a] - out.theta[a + 1]);
  };
  const double first = secant(0);
  const double last = secant(K - 2);
  const double scale = 1.0 + std::abs(out.estimates[0]) / out.theta[0];
  out.converged = last <= 10.0 * std::max(first, scale);
  const double slope = (out.estimates[K - 2] - out.estimates[K - 1]) / (out.theta[K - 2] - out.theta[K - 1]);
  out.value = out.estimates[K - 1] - slope * out.theta[K - 1];
  return out;
}

HamiltonianHandle lift_hamiltonian(const HamiltonianHandle& H, std::vector<double> theta_schedule) {
  if (theta_schedule.empty()) theta_schedule = {1e-1, 1e-2, 1e-3};
  HamiltonianHandle out;
  out.name = "lifted(" + H.name + ")";
  out.c = H.c;
  out.eval = [H, theta_schedule](double t, const Path& x, const Vector& sbar) {
    const int n = x.dim();
    if (sbar.size() != n + 1) throw DomainError("lifted argument must have dimension n + 1");
    const Vector s = sbar.head(n);
    const double th = std::abs(sbar(n));
    if (th > 0) return th * H(t, x, Vector(s / th));
    const ZeroSlice z = zero_slice(H, t, x, s, theta_schedule);
    if (!z.converged) throw DomainError("theta * H(s / theta) does not settle as theta -> 0");
    return z.value;
  };
  return out;
}

}  // namespace pdhj
