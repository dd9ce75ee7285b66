#pragma once

#include "pdhj/characteristics.hpp"
#include "pdhj/classical.hpp"
#include "pdhj/control.hpp"
#include "pdhj/functional.hpp"
#include "pdhj/path.hpp"
#include "pdhj/value.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace pdhj {

/// A raw selection vector as a function of the current time and path; it is
/// mapped into the complex by ComplexHandle::select.
using SelectionGenerator = std::function<Vector(double tau, const Path& y)>;

/// Search space shared by the characteristic searches.  Candidates per cell or
/// block are fractions of the complex radius along mesh directions, plus any
/// feedback generators supplied by the caller.
struct SearchOptions {
  double tolerance = 1e-2;
  /// Counted in evaluations of phi.
  std::int64_t budget = 2000;
  std::uint64_t seed = 0;
  /// Number of blocks of [t, tau] carrying their own candidate (upper/lower checks).
  int blocks = 4;
  int directions = 8;
  std::vector<double> radii{0.25, 0.5, 0.75, 1.0};
  std::vector<SelectionGenerator> feedback;
  /// check_M only: evaluate the deviation on every `stride`-th node (and at T).
  int stride = 1;
};

/// Sampled boundary inequality phi(T, y) vs sigma(y).
struct BoundaryReport {
  int samples = 0;
  double tolerance = 0.0;
  double worst_above = 0.0;  // max (phi - sigma)
  double worst_below = 0.0;  // max (sigma - phi)
  bool upper_ok() const { return worst_below <= tolerance; }  // phi >= sigma
  bool lower_ok() const { return worst_above <= tolerance; }  // phi <= sigma
  bool exact_ok() const { return upper_ok() && lower_ok(); }
};

BoundaryReport check_boundary(const FunctionalHandle& phi, const ControlProblem::Terminal& sigma,
                              const TimeGrid& grid, int samples, std::uint64_t seed, double tolerance = 1e-9);

struct MReport {
  bool passed = false;
  /// Best max_tau |phi(tau, y) - phi(t, x) - z(tau)| found.
  double deviation = 0.0;
  std::int64_t evaluations = 0;
  int trials = 0;
  /// Raw selection per cell of [t, T] for the best characteristic.
  std::vector<Vector> witness;
  std::optional<BoundaryReport> boundary;
  std::string note;
};

/// Searches for a characteristic of the standard complex along which phi - z
/// stays within tolerance of phi(t, x).  "Not found within budget" is a failure
/// of the search only.  When sigma is given the boundary condition is checked
/// first and a violation fails the check without searching.
MReport check_M(const FunctionalHandle& phi, const ComplexHandle& complex, const HistoryPoint& point,
                const Vector& s, const SearchOptions& opts, const ControlProblem::Terminal& sigma = {});

struct OneSidedReport {
  bool passed = false;
  /// tolerance - best (phi(tau, y) - phi(t, x) - z(tau)) for the upper check,
  /// best value + tolerance for the lower one; nonnegative iff passed.
  double margin = 0.0;
  double best = 0.0;
  std::int64_t evaluations = 0;
  int trials = 0;
  std::vector<int> witness_blocks;
};

/// Upper: some characteristic has phi(tau, y) - phi(t, x) <= z(tau) + tol.
OneSidedReport check_upper(const FunctionalHandle& phi, const ComplexHandle& complex, const HistoryPoint& point,
                           const Vector& param, double tau, const SearchOptions& opts);
/// Lower: some characteristic has phi(tau, y) - phi(t, x) >= z(tau) - tol.
OneSidedReport check_lower(const FunctionalHandle& phi, const ComplexHandle& complex, const HistoryPoint& point,
                           const Vector& param, double tau, const SearchOptions& opts);

struct MCSample {
  HistoryPoint point;
  Vector param;
  double tau;
};

struct MCRow {
  OneSidedReport upper;
  OneSidedReport lower;
};

struct MCReport {
  std::vector<MCRow> rows;
  int upper_failures = 0;
  int lower_failures = 0;
  bool passed() const { return upper_failures == 0 && lower_failures == 0; }
};

MCReport check_MC(const FunctionalHandle& phi, const ComplexHandle& upper, const ComplexHandle& lower,
                  const std::vector<MCSample>& samples, const SearchOptions& opts);

struct TouchOptions {
  double lambda = 1.0;
  /// eps of the cone term as a fraction of eps0.
  double eps_fraction = 0.5;
  int probes = 200;
  std::vector<double> scales{0.02, 0.05, 0.1};
  int max_time_offset = 2;  // in grid steps
  double gradient_noise = 0.01;
  double c_min = 0.5;
  double c_max = 2.0;
  double tolerance = 0.05;
  /// Allowed dip below the anchor value when judging an extremum.
  double slack = 1e-9;
};

struct TouchCase {
  double a = 0.0;
  Vector b;
  double c = 0.0;
  bool minimum = false;  // c < 0 aims at a minimum of phi - psi
  bool extremum = false;
  /// dpsi/dt + H(t, x, grad psi) at the anchor.
  double lhs = 0.0;
  bool failed = false;
};

struct TouchReport {
  std::vector<TouchCase> cases;
  int extrema = 0;
  int failures = 0;
  bool passed() const { return failures == 0; }
};

/// psi = d + a t + <b, x(t)> + c nu_eps(t, x - x0) with x0 the history stopped at
/// t, (a, b) matched to estimated ci-derivatives of phi (b with small noise).
/// Gated: at a detected minimum dpsi/dt + H <= tol, at a maximum >= -tol.
TouchReport viscosity_touch_test(const FunctionalHandle& phi, const HamiltonianHandle& H,
                                 const HistoryPoint& point, int family_size, std::uint64_t seed,
                                 const TouchOptions& opts = {});

struct ConsistencyEntry {
  double t = 0.0;
  Vector state;  // x(t)
  double dp = 0.0;
  double classical = 0.0;
  std::optional<double> analytic;
  double dp_vs_classical = 0.0;
  std::optional<double> dp_vs_analytic;
  std::optional<double> classical_vs_analytic;
};

struct ConsistencyReport {
  std::vector<ConsistencyEntry> entries;
  double worst_dp_vs_classical = 0.0;
  double worst_dp_vs_analytic = 0.0;
  double worst_classical_vs_analytic = 0.0;
  double tolerance = 0.05;
  bool passed() const;
};

/// |a - b| / max(|b|, 1).
double relative_error(double a, double b);

/// Path-dependent DP value against the lifted classical solution (and an
/// optional analytic functional) at the given points.
ConsistencyReport consistency_experiment(const ControlProblem& problem, const DPConfig& cfg,
                                         const ClassicalSolution& classical, const std::vector<HistoryPoint>& points,
                                         const FunctionalHandle* analytic = nullptr, double tolerance = 0.05);

enum class StabilityFamily { hamiltonian_shift, boundary };

struct StabilityReport {
  StabilityFamily family = StabilityFamily::hamiltonian_shift;
  std::vector<double> deltas;
  /// sup over points of |phi_k - phi_0|.
  std::vector<double> deviations;
  /// Shift family: sup over points of | |phi_k - phi_0| - delta_k (T - t) |.
  std::vector<double> formula_errors;
  bool decreasing = false;
  bool bounded = false;  // boundary family: deviation <= delta_k
  double tolerance = 1e-10;
  bool passed() const;
};

/// Hamiltonian shift: g_k = g - delta_k, i.e. H_k = H + delta_k.  Boundary:
/// sigma_k = sigma + delta_k S with |S| <= 1.
StabilityReport stability_experiment(const ControlProblem& problem, const DPConfig& cfg,
                                     const std::vector<HistoryPoint>& points, const std::vector<double>& deltas,
                                     StabilityFamily family, const ControlProblem::Terminal& perturbation = {},
                                     double tolerance = 1e-10);

}  // namespace pdhj
