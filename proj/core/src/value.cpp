#include "pdhj/value.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace pdhj {

namespace {

int cells_per_stage(const DPConfig& cfg, const TimeGrid& g) {
  const double ratio = cfg.coarse_step / g.step();
  const double k = std::round(ratio);
  if (k < 1 || std::abs(ratio - k) > 1e-9 * ratio)
    throw DomainError("coarse_step must be a positive multiple of the grid step");
  return static_cast<int>(k);
}

int stage_count(int start, int end, int per_stage) { return (end - start + per_stage - 1) / per_stage; }

void check_tree_size(std::size_t controls, int stages, const DPConfig& cfg) {
  double leaves = 1.0;
  for (int s = 0; s < stages; ++s) leaves *= static_cast<double>(controls);
  if (leaves > static_cast<double>(cfg.leaf_cap)) {
    std::ostringstream msg;
    msg << "control tree has " << leaves << " leaves, above the cap of " << cfg.leaf_cap
        << "; use a larger coarse_step or fewer controls";
    throw ResourceError(msg.str());
  }
}

// Depth-first enumeration of stage-wise constant controls on [start, end),
// sharing one path buffer: deeper stages only write beyond the current node.
class TreeWalker {
 public:
  using Leaf = std::function<double(const Path& y, double running)>;

  TreeWalker(const ControlProblem& problem, int start, int end, int per_stage, Leaf leaf)
      : problem_(problem), start_(start), end_(end), per_stage_(per_stage), leaf_(std::move(leaf)) {}

  void enable_pruning(const DPConfig& cfg) {
    prune_ = cfg.prune_tolerance;
    sigma_lipschitz_ = cfg.sigma_lipschitz;
    g_bound_ = cfg.g_bound;
  }

  double run(Path& buffer) {
    best_ = std::numeric_limits<double>::infinity();
    leaves_ = 0;
    current_.clear();
    descend(buffer, start_, 0.0);
    return best_;
  }

  std::int64_t leaves() const { return leaves_; }
  const std::vector<std::size_t>& best_choice() const { return best_choice_; }

 private:
  void descend(Path& y, int node, double running) {
    if (node >= end_) {
      ++leaves_;
      const double v = leaf_(y, running);
      if (v < best_) {
        best_ = v;
        best_choice_ = current_;
      }
      return;
    }
    if (prune_ && lower_bound(y, node, running) >= best_ - *prune_) return;
    const TimeGrid& g = y.grid();
    const int stop = std::min(node + per_stage_, end_);
    for (std::size_t k = 0; k < problem_.controls.size(); ++k) {
      const Vector& u = problem_.controls[k];
      for (int i = node; i < stop; ++i) y.node(i + 1) = y.node(i) + g.step() * problem_.f(g.time(i), y, u);
      double stage = 0.0;
      if (problem_.g)
        for (int i = node; i < stop; ++i) stage += g.step() * problem_.g(g.time(i) + 0.5 * g.step(), y, u);
      current_.push_back(k);
      descend(y, stop, running + stage);
      current_.pop_back();
    }
  }

  double lower_bound(const Path& y, int node, double running) const {
    const TimeGrid& g = y.grid();
    const double rest = g.horizon() - g.time(node);
    const double m = y.max_norm_through(node);
    const double drift = (1.0 + m) * std::expm1(problem_.c * rest);
    return problem_.sigma(stop_path(y, g.time(node))) - sigma_lipschitz_ * drift - running - g_bound_ * rest;
  }

  const ControlProblem& problem_;
  int start_;
  int end_;
  int per_stage_;
  Leaf leaf_;
  std::optional<double> prune_;
  double sigma_lipschitz_ = 0.0;
  double g_bound_ = 0.0;
  double best_ = 0.0;
  std::int64_t leaves_ = 0;
  std::vector<std::size_t> current_;
  std::vector<std::size_t> best_choice_;
};

}  // namespace

ValueResult value(const ControlProblem& problem, const HistoryPoint& point, const DPConfig& cfg) {
  if (problem.controls.empty()) throw DomainError("control list is empty");
  const TimeGrid& g = point.path.grid();
  ValueResult out;
  out.t = point.t;
  const int start = point.node();
  const int end = g.last_node();
  if (start == end) {
    out.value = problem.sigma(point.path);
    out.leaves_evaluated = 1;
    return out;
  }
  const int per_stage = cells_per_stage(cfg, g);
  const int stages = stage_count(start, end, per_stage);
  if (stages > cfg.max_depth) {
    std::ostringstream msg;
    msg << "coarse_step * max_depth = " << cfg.coarse_step * cfg.max_depth << " does not cover T - t = "
        << g.horizon() - point.t;
    throw DomainError(msg.str());
  }
  check_tree_size(problem.controls.size(), stages, cfg);

  TreeWalker walker(problem, start, end, per_stage,
                    [&problem](const Path& y, double running) { return problem.sigma(y) - running; });
  if (cfg.prune_tolerance) walker.enable_pruning(cfg);
  Path buffer = stop_path(point.path, point.t);
  out.value = walker.run(buffer);
  out.leaves_evaluated = walker.leaves();
  for (std::size_t s = 0; s < walker.best_choice().size(); ++s) {
    const int cells = std::min(per_stage, end - start - static_cast<int>(s) * per_stage);
    for (int c = 0; c < cells; ++c) out.best_control.push_back(problem.controls[walker.best_choice()[s]]);
  }
  return out;
}

FunctionalHandle value_functional(const ControlProblem& problem, const DPConfig& cfg) {
  FunctionalHandle phi;
  phi.name = "value(" + problem.name + ")";
  phi.eval = [problem, cfg](double t, const Path& x) { return value(problem, HistoryPoint(t, x), cfg).value; };
  return phi;
}

double check_dpp(const ControlProblem& problem, const HistoryPoint& point, double tau, const DPConfig& cfg) {
  const TimeGrid& g = point.path.grid();
  if (!(tau > point.t) || tau > g.horizon() + 1e-12) throw DomainError("check_dpp needs t < tau <= T");
  if (!g.is_node(tau)) throw DomainError("tau must be a grid node");
  const int start = point.node();
  const int mid = g.node_of(tau);
  const int per_stage = cells_per_stage(cfg, g);
  check_tree_size(problem.controls.size(), stage_count(start, mid, per_stage), cfg);

  const double lhs = value(problem, point, cfg).value;
  TreeWalker walker(problem, start, mid, per_stage, [&](const Path& y, double running) {
    return value(problem, HistoryPoint(tau, y), cfg).value - running;
  });
  Path buffer = stop_path(point.path, point.t);
  const double rhs = walker.run(buffer);
  return std::abs(lhs - rhs);
}

Path method_of_steps(const LinearDelaySpec& spec, const HistoryPoint& point, int substeps) {
  const TimeGrid& g = point.path.grid();
  const int n = g.dim();
  if (spec.A.rows() != n || spec.A.cols() != n || spec.B.rows() != n || spec.B.cols() != n)
    throw DomainError("linear delay matrices do not match the state dimension");
  if (!(spec.lag > 0) || spec.lag > g.delay() * (1 + 1e-12)) throw DomainError("lag must lie in (0, h]");
  if (substeps < 1) throw DomainError("substeps must be positive");
  const double hf = g.step() / substeps;
  if (spec.lag < hf) throw DomainError("lag shorter than the fine step");
  const double t0 = point.t;
  const int fine_count = (g.last_node() - point.node()) * substeps;
  std::vector<Vector> sol;
  sol.reserve(static_cast<std::size_t>(fine_count) + 1);
  sol.push_back(point.path.node(point.node()));

  auto lookup = [&](double tau) -> Vector {
    if (tau <= t0) return point.path.at(std::max(tau, -g.delay()));
    const double pos = (tau - t0) / hf;
    const auto j = static_cast<std::size_t>(std::floor(pos));
    if (j + 1 >= sol.size()) return sol.back();
    const double w = pos - static_cast<double>(j);
    return (1 - w) * sol[j] + w * sol[j + 1];
  };
  auto rhs = [&](double tau, const Vector& y) -> Vector {
    Vector v = spec.A * y + spec.B * lookup(tau - spec.lag);
    if (spec.forcing) v += spec.forcing(tau);
    return v;
  };
  for (int j = 0; j < fine_count; ++j) {
    const double tau = t0 + j * hf;
    const Vector& y = sol.back();
    const Vector k1 = rhs(tau, y);
    const Vector k2 = rhs(tau + 0.5 * hf, y + 0.5 * hf * k1);
    const Vector k3 = rhs(tau + 0.5 * hf, y + 0.5 * hf * k2);
    const Vector k4 = rhs(tau + hf, y + hf * k3);
    sol.push_back(y + hf / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4));
  }
  Path out = point.path;
  for (int i = point.node() + 1; i < g.node_count(); ++i)
    out.node(i) = sol[static_cast<std::size_t>((i - point.node()) * substeps)];
  return out;
}

}  // namespace pdhj
