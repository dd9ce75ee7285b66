#pragma once

#include "pdhj/functional.hpp"
#include "pdhj/path.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

namespace pdhj {

/// dphi/dt + H(t, x, grad phi) = 0 on [0, T) x box, phi(T, x) = sigma(x).
struct ClassicalProblem {
  std::function<double(double, const Vector&, const Vector&)> H;
  std::function<double(const Vector&)> sigma;
  Vector lower;
  Vector upper;
  std::vector<int> cells;  // per dimension
  double horizon = 1.0;
  /// Zero: the largest step allowed by the CFL condition.
  double time_step = 0.0;
  /// Radius of the s-ball on which |dH/ds| is sampled; zero picks a bound
  /// from the sampled slope of sigma.
  double gradient_bound = 0.0;
  std::uint64_t seed = 0;

  int dim() const { return static_cast<int>(lower.size()); }
};

class ClassicalSolution {
 public:
  ClassicalSolution(ClassicalProblem problem, std::vector<double> times, std::vector<Vector> slices,
                    Vector viscosity);

  const ClassicalProblem& problem() const { return problem_; }
  const std::vector<double>& times() const { return times_; }
  const Vector& viscosity() const { return viscosity_; }
  int node_count() const { return static_cast<int>(slices_.front().size()); }
  Vector node_position(int flat) const;
  double node_value(int slice, int flat) const { return slices_[static_cast<std::size_t>(slice)](flat); }

  /// Multilinear in x, linear in t; DomainError outside the box or [0, T].
  double operator()(double t, const Vector& x) const;
  /// Central differences of the interpolant.
  Vector gradient(double t, const Vector& x) const;

  bool contains(const Vector& x) const;

 private:
  double interpolate_slice(int slice, const Vector& x) const;

  ClassicalProblem problem_;
  std::vector<double> times_;
  std::vector<Vector> slices_;
  Vector viscosity_;
  std::vector<int> strides_;
};

/// Backward Lax-Friedrichs scheme with viscosity 1.1 x the sampled max |dH/ds_i|,
/// ghost nodes by linear extrapolation.
ClassicalSolution solve_classical(const ClassicalProblem& problem);

/// phi(t, x(.)) = phihat(t, x(t)).
FunctionalHandle lift_to_path(const ClassicalSolution& solution);

/// CSV `t,x1,...,xn,phi`, every `stride`-th time slice plus the last one.
void write_csv(std::ostream& out, const ClassicalSolution& solution, int stride = 1);

}  // namespace pdhj
