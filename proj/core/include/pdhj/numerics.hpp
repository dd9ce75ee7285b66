#pragma once

#include "pdhj/path.hpp"

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace pdhj {

using Rng = std::mt19937_64;

/// Value at 0 of the interpolating polynomial through (x_i, y_i) (Neville).
double extrapolate_to_zero(std::span<const double> x, std::span<const double> y);
Vector extrapolate_to_zero(std::span<const double> x, std::span<const Vector> y);

/// Richardson extrapolation of samples taken at step sizes `delta`, assuming
/// an error expansion in powers of delta^order.
double richardson(std::span<const double> delta, std::span<const double> values, int order = 1);
Vector richardson(std::span<const double> delta, std::span<const Vector> values, int order = 1);

/// Unit directions covering the sphere in R^dim: {+1, -1} for dim 1, equally
/// spaced angles for dim 2, a Fibonacci lattice for dim 3.
std::vector<Vector> direction_mesh(int dim, int count);

double uniform(Rng& rng, double lo, double hi);
int uniform_int(Rng& rng, int lo, int hi);
Vector gaussian_vector(Rng& rng, int dim);
Vector unit_vector(Rng& rng, int dim);
/// Uniformly distributed point of the closed ball of given radius.
Vector point_in_ball(Rng& rng, int dim, double radius);

/// Deterministic child seed, so independent streams can be drawn per trial.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace pdhj
