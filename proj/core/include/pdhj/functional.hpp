#pragma once

#include "pdhj/numerics.hpp"
#include "pdhj/path.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace pdhj {

/// A functional of (t, x(.)) with optional analytic ci-derivatives and an
/// optional evaluation on the path with a jump added on [t, T].
struct FunctionalHandle {
  using Scalar = std::function<double(double, const Path&)>;
  using Gradient = std::function<Vector(double, const Path&)>;
  using Jump = std::function<double(double, const Path&, const Vector&)>;

  std::string name;
  Scalar eval;
  Scalar dt;      // optional
  Gradient grad;  // optional
  Jump jump_eval; // optional

  double operator()(double t, const Path& x) const { return eval(t, x); }
  double operator()(const HistoryPoint& p) const { return eval(p.t, p.path); }
  bool has_derivatives() const { return static_cast<bool>(dt) && static_cast<bool>(grad); }
};

FunctionalHandle operator+(const FunctionalHandle& a, const FunctionalHandle& b);
FunctionalHandle operator*(double k, const FunctionalHandle& a);
FunctionalHandle shifted(const FunctionalHandle& a, double constant);

/// Convex compact set of directions: a closed ball or the hull of finitely many vectors.
class DirectionSet {
 public:
  static DirectionSet ball(const Vector& center, double radius);
  static DirectionSet hull(std::vector<Vector> points);

  bool is_ball() const { return points_.empty(); }
  int dim() const;
  const Vector& center() const { return center_; }
  double radius() const { return radius_; }
  const std::vector<Vector>& points() const { return points_; }

  double min_linear(const Vector& s) const;
  double max_linear(const Vector& s) const;
  /// Random point of the eps-neighbourhood [F]^eps.
  Vector sample(Rng& rng, double eps) const;

 private:
  Vector center_;
  double radius_ = 0.0;
  std::vector<Vector> points_;
};

struct NonanticipationReport {
  int trials = 0;
  int violations = 0;
  double worst = 0.0;
  std::vector<std::string> details;

  bool passed() const { return violations == 0; }
};

NonanticipationReport check_nonanticipative(const FunctionalHandle& phi, const TimeGrid& grid, int trials,
                                            std::uint64_t seed, double tolerance = 1e-12);

struct CiDerivatives {
  double dt = 0.0;
  Vector grad;
  /// Worst normalized remainder at the smallest delta.
  double residual = 0.0;
  std::vector<double> schedule;
  /// Worst normalized remainder at each schedule entry.
  std::vector<double> residuals;
};

/// Default schedule {8, 4, 2, 1} x step, truncated to fit in [t, T].
std::vector<double> default_delta_schedule(const HistoryPoint& point);

CiDerivatives estimate_ci_derivatives(const FunctionalHandle& phi, const HistoryPoint& point,
                                      std::vector<double> schedule = {});

/// |phi(tau, y) - phi(t, x) - int dt phi - int <grad phi, y'>| along y = extend(point, sel),
/// midpoint rule per cell.
double verify_integral_identity(const FunctionalHandle& phi, const HistoryPoint& point, const SlopeSelection& sel,
                                double tau);

Vector vertical_derivative_estimate(const FunctionalHandle& phi, const HistoryPoint& point,
                                    std::vector<double> schedule = {});

double horizontal_derivative_estimate(const FunctionalHandle& phi, const HistoryPoint& point,
                                      std::vector<double> schedule = {});

enum class Bound { lower, upper };

struct DirectionalOptions {
  std::vector<double> eps_schedule{0.2, 0.1, 0.05};
  std::vector<double> delta_schedule;  // empty: default_delta_schedule
  int samples_per_eps = 64;
  std::uint64_t seed = 0;
};

struct DirectionalEstimate {
  double value = 0.0;
  std::vector<double> eps;
  std::vector<double> per_eps;
};

DirectionalEstimate directional_derivative(const FunctionalHandle& phi, const HistoryPoint& point,
                                           const DirectionSet& F, Bound mode, const DirectionalOptions& opts = {});

}  // namespace pdhj
