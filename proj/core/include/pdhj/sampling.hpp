#pragma once

#include "pdhj/numerics.hpp"
#include "pdhj/path.hpp"

namespace pdhj {

enum class PathShape { smooth, walk, past_peak, constant, piecewise };

/// Random continuous path of the given shape, values of order `amplitude`.
Path random_path(const TimeGrid& grid, Rng& rng, PathShape shape, double amplitude = 1.0);

/// Random path with a randomly chosen shape.
Path random_path(const TimeGrid& grid, Rng& rng, double amplitude = 1.0);

/// Random grid node time in [0, T) (or [0, T] when include_end is set).
double random_node_time(const TimeGrid& grid, Rng& rng, bool include_end = false);

/// A path equal to x on [-h, t] that differs from it on (t, T] (unless t = T).
Path random_continuation(const Path& x, double t, Rng& rng, double amplitude = 1.0);

/// A random smooth perturbation of size at most `scale` in the uniform norm.
Path random_perturbation(const TimeGrid& grid, Rng& rng, double scale);

}  // namespace pdhj
