#pragma once

#include "pdhj/numerics.hpp"
#include "pdhj/path.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace pdhj {

enum class DelayKind { none, constant, time_varying, distributed };

/// The delayed quantity entering the right-hand side: y(tau - h'), y(tau - k(tau))
/// or the kernel integral of y over [-h, tau].
struct DelayTerm {
  DelayKind kind = DelayKind::none;
  double lag = 0.0;           // constant: h'
  double lag_offset = 0.0;    // time-varying: k(tau) = clamp(offset + slope * tau, 0, h)
  double lag_slope = 0.0;
  double kernel_decay = 1.0;  // distributed: K(tau, xi) = exp(-decay * (tau - xi))

  static DelayTerm constant(double lag);
  static DelayTerm time_varying(double offset, double slope);
  static DelayTerm distributed(double decay);

  /// Value at tau; reads the path only on [-h, tau]. kind none returns zero.
  Vector operator()(double tau, const Path& y) const;
  /// Time at which a concentrated delay is read (floored to the grid).
  double lookup_time(double tau, const TimeGrid& grid) const;
};

const char* to_string(DelayKind kind);
DelayKind delay_kind_from_string(const std::string& s);

struct ControlProblem {
  using Dynamics = std::function<Vector(double, const Path&, const Vector&)>;
  using Running = std::function<double(double, const Path&, const Vector&)>;
  using Terminal = std::function<double(const Path&)>;

  std::string name;
  Dynamics f;
  Running g;
  Terminal sigma;
  std::vector<Vector> controls;
  double c = 1.0;
  DelayTerm delay;
};

/// Piecewise-constant control, one value per grid cell of [t, T].
using ControlSignal = std::vector<Vector>;

/// Explicit Euler path from the history at point (frozen beyond t before integrating).
Path integrate_dynamics(const ControlProblem& problem, const HistoryPoint& point, const ControlSignal& control);

/// Running reward accumulated on cells [first_node, last_node) by the midpoint rule.
double running_integral(const ControlProblem& problem, const Path& y, int first_node, int last_node,
                        const ControlSignal& control, int control_offset = 0);

/// sigma(y) - int g along the generated path.
double cost(const ControlProblem& problem, const HistoryPoint& point, const ControlSignal& control);

struct HamiltonianHandle {
  using Eval = std::function<double(double, const Path&, const Vector&)>;

  std::string name;
  Eval eval;
  double c = 1.0;
  std::optional<double> lambda_hint;

  double operator()(double t, const Path& x, const Vector& s) const { return eval(t, x, s); }
};

/// H(t, x, s) = min over the control list of <s, f> - g, lowest index on ties.
HamiltonianHandle bellman_hamiltonian(const ControlProblem& problem);

/// H(t, x, s) = <s, delay(t, x)>.
HamiltonianHandle delayed_linear_hamiltonian(const DelayTerm& delay, double c = 1.0);

struct GrowthReport {
  double estimated = 0.0;
  double declared = 0.0;
  int samples = 0;
  bool passed() const { return estimated <= declared * (1.0 + 1e-12); }
};

/// Sampled constant in |H(s) - H(r)| <= c (1 + |x|_[-h,t]) |s - r|.
GrowthReport check_growth_B2(const HamiltonianHandle& H, const TimeGrid& grid, int trials, std::uint64_t seed);

struct LipschitzReport {
  /// Estimated on the sample set only.
  double lambda = 0.0;
  int pairs = 0;
  int skipped = 0;
};

/// Sampled constant in |H(t,x,s) - H(t,y,s)| <= lambda (1 + |s|) max_{tau<=t} |x - y| over pairs from D.
LipschitzReport check_lipschitz_B3(const HamiltonianHandle& H, const std::vector<Path>& D, int trials,
                                   std::uint64_t seed);

struct HomogeneityReport {
  double worst = 0.0;  // relative to 1 + |H|
  double worst_alpha = 0.0;
  int samples = 0;
  bool passed = true;
};

HomogeneityReport check_homogeneity_B8(const HamiltonianHandle& H, const TimeGrid& grid, int trials,
                                       std::uint64_t seed);

/// Largest sampled |f| / (1 + running max |y|), for comparison with the problem's c.
double sampled_dynamics_growth(const ControlProblem& problem, const TimeGrid& grid, int trials, std::uint64_t seed);

}  // namespace pdhj
