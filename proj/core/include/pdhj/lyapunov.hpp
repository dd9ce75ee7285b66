#pragma once

#include "pdhj/control.hpp"
#include "pdhj/functional.hpp"
#include "pdhj/path.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace pdhj {

/// (3 - sqrt(5)) / 2.
inline constexpr double kKappa = 0.381966011250105151795413165634361882;

/// Largest admissible epsilon: exp(-lambda T / kappa) / sqrt(kappa).
double eps_max(double lambda, double horizon);

/// (|x|^2_[-h,t] - |x(t)|^2)^2 / |x|^2_[-h,t] + |x(t)|^2, zero on the zero history.
double lyapunov_V(double t, const Path& x);
/// Same with x(t) replaced by x(t) + jump (the jump held on [t, T]).
double lyapunov_V_jump(double t, const Path& x, const Vector& jump);
/// ci-gradient of V; the time derivative vanishes.
Vector lyapunov_grad_V(double t, const Path& x);

FunctionalHandle V_functional();

struct NuParams {
  double lambda;
  double horizon;
  double eps;

  /// Throws DomainError unless 0 < eps <= eps_max(lambda, horizon).
  NuParams(double lambda, double horizon, double eps);

  double eps0() const { return eps_max(lambda, horizon); }
  double alpha(double t) const;
};

double nu(const NuParams& p, double t, const Path& x);
double nu_dt(const NuParams& p, double t, const Path& x);
Vector nu_grad(const NuParams& p, double t, const Path& x);

FunctionalHandle nu_functional(const NuParams& p);

struct ConditionCheckConfig {
  /// Level in condition (c).
  double level = 1.0;
  int identity_trials = 50;
  int inequality_trials = 1000;
  double inequality_tolerance = 1e-8;
  std::uint64_t seed = 0;
};

struct ConditionReport {
  double lambda = 0.0;
  std::string lambda_source;
  // (a)
  double min_nu = 0.0;
  double worst_identity_residual = 0.0;
  double identity_tolerance = 0.0;
  bool a_passed = false;
  // (b)
  double worst_zero_history_excess = 0.0;
  double worst_zero_history_formula_error = 0.0;
  bool b_passed = false;
  // (c)
  std::vector<double> c_eps;
  std::vector<double> c_sequence;
  bool c_passed = false;
  // (d)
  double worst_violation = 0.0;
  int d_samples = 0;
  bool d_passed = false;

  bool passed() const { return a_passed && b_passed && c_passed && d_passed; }
};

/// Checks the four conditions on nu_eps for eps in {eps0, eps0/2, eps0/4, eps0/8},
/// sampling histories and pairs from D.
ConditionReport verify_conditions(double lambda, double horizon, const HamiltonianHandle& H,
                                  const std::function<double(const Path&)>& sigma, const std::vector<Path>& D,
                                  const ConditionCheckConfig& cfg);

}  // namespace pdhj
