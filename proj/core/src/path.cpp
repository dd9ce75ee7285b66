#include "pdhj/path.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

namespace pdhj {

namespace {

constexpr double kGridTol = 1e-9;

int cells_in(double length, double step, const char* what) {
  const double ratio = length / step;
  const double rounded = std::round(ratio);
  if (std::abs(ratio - rounded) > kGridTol * std::max(1.0, ratio)) {
    std::ostringstream msg;
    msg << "grid step " << step << " does not divide " << what << " = " << length;
    throw DomainError(msg.str());
  }
  return static_cast<int>(rounded);
}

}  // namespace

TimeGrid::TimeGrid(int dim, double delay, double horizon, double step)
    : dim_(dim), delay_(delay), horizon_(horizon), step_(step) {
  if (dim < 1) throw DomainError("state dimension must be positive");
  if (!(delay > 0) || !(horizon > 0) || !(step > 0))
    throw DomainError("delay, horizon and step must be positive");
  past_cells_ = cells_in(delay, step, "h");
  forward_cells_ = cells_in(horizon, step, "T");
}

bool TimeGrid::is_node(double t) const {
  const double k = t / step_;
  const double r = std::round(k);
  if (std::abs(k - r) > kGridTol * std::max(1.0, std::abs(k))) return false;
  return r >= -past_cells_ && r <= forward_cells_;
}

int TimeGrid::node_of(double t) const {
  if (!is_node(t)) {
    std::ostringstream msg;
    msg << "time " << t << " is not a node of the grid on [" << -delay_ << ", " << horizon_
        << "] with step " << step_;
    throw DomainError(msg.str());
  }
  return static_cast<int>(std::lround(t / step_)) + past_cells_;
}

int TimeGrid::node_floor(double t) const {
  if (t < -delay_ - kGridTol * step_ || t > horizon_ + kGridTol * step_)
    throw DomainError("time outside [-h, T]");
  const double k = t / step_;
  const double r = std::round(k);
  const int idx = std::abs(k - r) <= kGridTol * std::max(1.0, std::abs(k))
                      ? static_cast<int>(r)
                      : static_cast<int>(std::floor(k));
  return std::clamp(idx + past_cells_, 0, last_node());
}

TimeGrid TimeGrid::refined(int factor) const {
  if (factor < 1) throw DomainError("refinement factor must be positive");
  return TimeGrid(dim_, delay_, horizon_, step_ / factor);
}

bool TimeGrid::same_as(const TimeGrid& other) const {
  return dim_ == other.dim_ && past_cells_ == other.past_cells_ &&
         forward_cells_ == other.forward_cells_ &&
         std::abs(step_ - other.step_) <= kGridTol * step_;
}

void require_same_grid(const TimeGrid& a, const TimeGrid& b) {
  if (!a.same_as(b)) throw DomainError("paths live on different grids");
}

Path::Path(const TimeGrid& grid) : grid_(grid), samples_(Matrix::Zero(grid.dim(), grid.node_count())) {}

Path::Path(const TimeGrid& grid, Matrix samples) : grid_(grid), samples_(std::move(samples)) {
  if (samples_.rows() != grid_.dim() || samples_.cols() != grid_.node_count())
    throw DomainError("sample matrix does not match the grid");
}

Path Path::constant(const TimeGrid& grid, const Vector& value) {
  if (value.size() != grid.dim()) throw DomainError("constant has wrong dimension");
  Path p(grid);
  p.samples_.colwise() = value;
  return p;
}

Path Path::from_function(const TimeGrid& grid, const std::function<Vector(double)>& fn) {
  Path p(grid);
  for (int i = 0; i < grid.node_count(); ++i) p.samples_.col(i) = fn(grid.time(i));
  return p;
}

Vector Path::at(double t) const {
  const int i = grid_.node_floor(t);
  if (i == grid_.last_node()) return samples_.col(i);
  const double w = std::clamp((t - grid_.time(i)) / grid_.step(), 0.0, 1.0);
  if (w == 0.0) return samples_.col(i);
  return (1.0 - w) * samples_.col(i) + w * samples_.col(i + 1);
}

double Path::max_norm_through(int node) const {
  double m = 0.0;
  for (int i = 0; i <= node; ++i) m = std::max(m, samples_.col(i).norm());
  return m;
}

Path Path::refined(int factor) const {
  const TimeGrid fine = grid_.refined(factor);
  Path out(fine);
  for (int i = 0; i < grid_.last_node(); ++i) {
    for (int k = 0; k < factor; ++k) {
      const double w = static_cast<double>(k) / factor;
      out.samples_.col(i * factor + k) = (1.0 - w) * samples_.col(i) + w * samples_.col(i + 1);
    }
  }
  out.samples_.col(fine.last_node()) = samples_.col(grid_.last_node());
  return out;
}

HistoryPoint::HistoryPoint(double time, Path p) : t(time), path(std::move(p)) {
  if (t < 0.0 || !path.grid().is_node(t))
    throw DomainError("history time must be a grid node in [0, T]");
}

SlopeSelection SlopeSelection::constant(int cells, const Vector& slope) {
  return SlopeSelection{std::vector<Vector>(static_cast<std::size_t>(cells), slope)};
}

double uniform_norm(const Path& path, double t) {
  return path.max_norm_through(path.grid().node_of(t));
}

double dist(const HistoryPoint& a, const HistoryPoint& b) {
  require_same_grid(a.path.grid(), b.path.grid());
  const double sup = (a.path.samples() - b.path.samples()).colwise().norm().maxCoeff();
  return std::abs(a.t - b.t) + sup;
}

Path stop_path(const Path& path, double t) {
  const int k = path.grid().node_of(t);
  Path out = path;
  for (int i = k + 1; i < path.node_count(); ++i) out.node(i) = path.node(k);
  return out;
}

double rho(const HistoryPoint& a, const HistoryPoint& b) {
  require_same_grid(a.path.grid(), b.path.grid());
  const Path sa = stop_path(a.path, a.t);
  const Path sb = stop_path(b.path, b.t);
  const double sup = (sa.samples() - sb.samples()).colwise().norm().maxCoeff();
  return std::abs(a.t - b.t) + sup;
}

namespace {

double one_sided_hausdorff(const HistoryPoint& a, const HistoryPoint& b) {
  const TimeGrid& g = a.path.grid();
  const int a_end = a.node();
  const int b_end = b.node();
  double worst = 0.0;
  for (int i = g.zero_node(); i <= a_end; ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (int j = g.zero_node(); j <= b_end; ++j) {
      const double dt = g.time(i) - g.time(j);
      const double dx2 = (a.path.node(i) - b.path.node(j)).squaredNorm();
      best = std::min(best, std::sqrt(dt * dt + dx2));
    }
    worst = std::max(worst, best);
  }
  return worst;
}

}  // namespace

double rho_hausdorff(const HistoryPoint& a, const HistoryPoint& b) {
  require_same_grid(a.path.grid(), b.path.grid());
  return std::max(one_sided_hausdorff(a, b), one_sided_hausdorff(b, a));
}

Path extend(const HistoryPoint& point, const SlopeSelection& selection) {
  const TimeGrid& g = point.path.grid();
  const int k = point.node();
  const int cells = g.last_node() - k;
  if (static_cast<int>(selection.slopes.size()) < cells)
    throw DomainError("slope selection does not cover [t, T]");
  Path out = point.path;
  for (int c = 0; c < cells; ++c) {
    const Vector& v = selection.slopes[static_cast<std::size_t>(c)];
    if (v.size() != g.dim()) throw DomainError("slope has wrong dimension");
    out.node(k + c + 1) = out.node(k + c) + g.step() * v;
  }
  return out;
}

bool in_Y(const HistoryPoint& point, const Path& y, double c) {
  const TimeGrid& g = point.path.grid();
  require_same_grid(g, y.grid());
  const int k = point.node();
  for (int i = 0; i <= k; ++i)
    if (y.node(i) != point.path.node(i)) return false;
  double running_max = y.max_norm_through(k);
  for (int i = k; i < g.last_node(); ++i) {
    const double slope = (y.node(i + 1) - y.node(i)).norm() / g.step();
    const double bound = c * (1.0 + running_max);
    if (slope > bound * (1.0 + 1e-12) + 1e-12) return false;
    running_max = std::max(running_max, y.node(i + 1).norm());
  }
  return true;
}

void write_csv(std::ostream& out, const Path& path) {
  out << "time";
  for (int d = 0; d < path.dim(); ++d) out << ",x" << (d + 1);
  out << '\n';
  out << std::setprecision(12);
  for (int i = 0; i < path.node_count(); ++i) {
    out << path.grid().time(i);
    for (int d = 0; d < path.dim(); ++d) out << ',' << path.node(i)(d);
    out << '\n';
  }
}

Path read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DomainError("empty path CSV");
  const int dim = static_cast<int>(std::count(line.begin(), line.end(), ','));
  if (dim < 1 || line.rfind("time", 0) != 0) throw DomainError("path CSV header must be time,x1,...,xn");
  std::vector<double> times;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(fields, cell, ',')) row.push_back(std::stod(cell));
    if (static_cast<int>(row.size()) != dim + 1) throw DomainError("path CSV row has wrong width");
    times.push_back(row.front());
    rows.emplace_back(row.begin() + 1, row.end());
  }
  if (times.size() < 3) throw DomainError("path CSV needs at least three rows");
  const double h = -times.front();
  const double T = times.back();
  const double step = (T + h) / static_cast<double>(times.size() - 1);
  // Recover the nominal step from the 12-digit rendering.
  const double nominal = std::stod([&] {
    std::ostringstream s;
    s << std::setprecision(12) << step;
    return s.str();
  }());
  TimeGrid grid(dim, h, T, nominal);
  if (grid.node_count() != static_cast<int>(times.size())) throw DomainError("path CSV is not a uniform grid");
  Matrix samples(dim, grid.node_count());
  for (int i = 0; i < grid.node_count(); ++i)
    for (int d = 0; d < dim; ++d) samples(d, i) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(d)];
  return Path(grid, std::move(samples));
}

}  // namespace pdhj
