#pragma once

#include "pdhj/control.hpp"
#include "pdhj/functional.hpp"
#include "pdhj/path.hpp"

#include <cstdint>
#include <functional>
#include <optional>

namespace pdhj {

struct DPConfig {
  /// Length of a decision stage; a multiple of the grid step.
  double coarse_step = 0.1;
  int max_depth = 10;
  std::int64_t leaf_cap = 10'000'000;
  /// Branch-and-bound is used only when set.
  std::optional<double> prune_tolerance;
  /// Sup-norm Lipschitz constant of sigma and a bound on |g|, used by the pruning bound.
  double sigma_lipschitz = 0.0;
  double g_bound = 0.0;
};

struct ValueResult {
  double t = 0.0;
  double value = 0.0;
  std::int64_t leaves_evaluated = 0;
  ControlSignal best_control;
};

/// Minimum of the cost over controls constant on each stage [t + k*coarse, t + (k+1)*coarse),
/// the last stage possibly shorter.  At t = T this is sigma(x).
ValueResult value(const ControlProblem& problem, const HistoryPoint& point, const DPConfig& cfg);

/// The value as a functional of (t, x).
FunctionalHandle value_functional(const ControlProblem& problem, const DPConfig& cfg);

/// |value(t, x) - min_u (value(tau, y_u) - int_t^tau g)|, controls on [t, tau]
/// constant per stage starting at t.
double check_dpp(const ControlProblem& problem, const HistoryPoint& point, double tau, const DPConfig& cfg);

/// y'(tau) = A y(tau) + B y(tau - lag) + b(tau).
struct LinearDelaySpec {
  Matrix A;
  Matrix B;
  std::function<Vector(double)> forcing;  // may be empty
  double lag = 1.0;
};

/// Reference solution by classical RK4 on a grid `substeps` times finer than
/// the path grid, delayed values interpolated linearly; sampled on the grid.
Path method_of_steps(const LinearDelaySpec& spec, const HistoryPoint& point, int substeps = 100);

}  // namespace pdhj
