#pragma once

#include <Eigen/Dense>

#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <vector>

namespace pdhj {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Raised when an argument lies outside the domain of an operation
/// (off-grid times, mismatched grids, epsilon out of range, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Raised when an optional capability required by an operation is missing.
class PreconditionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Raised when a computation would exceed a configured resource cap.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Uniform time grid on [-h, T] with spacing `step`; the spacing must divide
/// both h and T so that 0 and every delayed lookup t - h are nodes.
class TimeGrid {
 public:
  TimeGrid(int dim, double delay, double horizon, double step);

  int dim() const { return dim_; }
  double delay() const { return delay_; }
  double horizon() const { return horizon_; }
  double step() const { return step_; }

  int past_cells() const { return past_cells_; }
  int forward_cells() const { return forward_cells_; }
  int node_count() const { return past_cells_ + forward_cells_ + 1; }
  int zero_node() const { return past_cells_; }
  int last_node() const { return past_cells_ + forward_cells_; }

  double time(int node) const { return (node - past_cells_) * step_; }
  bool is_node(double t) const;
  /// Index of the node at time t; DomainError when t is off-grid or outside [-h, T].
  int node_of(double t) const;
  /// Largest node with time <= t (t must lie in [-h, T]).
  int node_floor(double t) const;

  /// Same interval with spacing step/factor.
  TimeGrid refined(int factor) const;

  bool same_as(const TimeGrid& other) const;

 private:
  int dim_;
  double delay_;
  double horizon_;
  double step_;
  int past_cells_;
  int forward_cells_;
};

/// A continuous path on [-h, T] stored as samples on a TimeGrid and evaluated
/// by piecewise-linear interpolation between nodes.
class Path {
 public:
  explicit Path(const TimeGrid& grid);
  Path(const TimeGrid& grid, Matrix samples);

  static Path constant(const TimeGrid& grid, const Vector& value);
  static Path from_function(const TimeGrid& grid, const std::function<Vector(double)>& fn);

  const TimeGrid& grid() const { return grid_; }
  int dim() const { return grid_.dim(); }
  int node_count() const { return grid_.node_count(); }

  auto node(int i) const { return samples_.col(i); }
  auto node(int i) { return samples_.col(i); }
  const Matrix& samples() const { return samples_; }
  Matrix& samples() { return samples_; }

  /// Piecewise-linear value at any t in [-h, T].
  Vector at(double t) const;

  /// max_{i <= node} ||x(t_i)||.
  double max_norm_through(int node) const;

  /// Same continuous function sampled on grid().refined(factor).
  Path refined(int factor) const;

 private:
  TimeGrid grid_;
  Matrix samples_;  // dim x node_count
};

/// A position (t, x(.)) with t a grid node in [0, T].
struct HistoryPoint {
  HistoryPoint(double t, Path path);

  int node() const { return path.grid().node_of(t); }

  double t;
  Path path;
};

/// Piecewise-constant slopes, one per grid cell of [t, T].
struct SlopeSelection {
  std::vector<Vector> slopes;

  static SlopeSelection constant(int cells, const Vector& slope);
};

double uniform_norm(const Path& path, double t);

double dist(const HistoryPoint& a, const HistoryPoint& b);

/// x(. ^ t): agrees with the path on [-h, t] and is frozen at x(t) afterwards.
Path stop_path(const Path& path, double t);

/// |t_a - t_b| + ||stop(x_a, t_a) - stop(x_b, t_b)||_[-h, T].
double rho(const HistoryPoint& a, const HistoryPoint& b);

/// Hausdorff distance between the graphs of x_a on [0, t_a] and x_b on [0, t_b],
/// by exhaustive max-min over grid nodes.
double rho_hausdorff(const HistoryPoint& a, const HistoryPoint& b);

/// Member of Lip(t, x): the history up to t followed by the cumulative sum of
/// the selected slopes.
Path extend(const HistoryPoint& point, const SlopeSelection& selection);

/// Membership in Y(t, x) for growth constant c, judged cell by cell with
/// forward-difference slopes.
bool in_Y(const HistoryPoint& point, const Path& y, double c);

/// CSV with header `time,x1,...,xn` and one row per node (12 significant digits).
void write_csv(std::ostream& out, const Path& path);
Path read_csv(std::istream& in);

/// Throws DomainError unless both grids coincide.
void require_same_grid(const TimeGrid& a, const TimeGrid& b);

}  // namespace pdhj
