#include "pdhj/numerics.hpp"

#include <cmath>
#include <numbers>

namespace pdhj {

namespace {

template <class T>
T neville(std::span<const double> x, std::span<const T> y) {
  if (x.size() != y.size() || x.empty()) throw DomainError("extrapolation needs matching, non-empty samples");
  std::vector<T> p(y.begin(), y.end());
  const std::size_t m = x.size();
  for (std::size_t level = 1; level < m; ++level) {
    for (std::size_t i = 0; i + level < m; ++i) {
      const double xi = x[i];
      const double xj = x[i + level];
      // p_{i..j}(0) = (x_j p_{i..j-1}(0) - x_i p_{i+1..j}(0)) / (x_j - x_i)
      p[i] = (xj * p[i] - xi * p[i + 1]) / (xj - xi);
    }
  }
  return p[0];
}

std::vector<double> powers(std::span<const double> delta, int order) {
  std::vector<double> x(delta.size());
  for (std::size_t i = 0; i < delta.size(); ++i) x[i] = std::pow(delta[i], order);
  return x;
}

}  // namespace

double extrapolate_to_zero(std::span<const double> x, std::span<const double> y) {
  return neville<double>(x, y);
}

Vector extrapolate_to_zero(std::span<const double> x, std::span<const Vector> y) {
  return neville<Vector>(x, y);
}

double richardson(std::span<const double> delta, std::span<const double> values, int order) {
  const auto x = powers(delta, order);
  return extrapolate_to_zero(x, values);
}

Vector richardson(std::span<const double> delta, std::span<const Vector> values, int order) {
  const auto x = powers(delta, order);
  return extrapolate_to_zero(std::span<const double>(x), values);
}

std::vector<Vector> direction_mesh(int dim, int count) {
  std::vector<Vector> dirs;
  if (dim == 1) {
    dirs.push_back(Vector::Constant(1, 1.0));
    dirs.push_back(Vector::Constant(1, -1.0));
    return dirs;
  }
  if (count < 2) throw DomainError("direction mesh needs at least two directions");
  if (dim == 2) {
    for (int k = 0; k < count; ++k) {
      const double a = 2.0 * std::numbers::pi * k / count;
      Vector d(2);
      d << std::cos(a), std::sin(a);
      dirs.push_back(d);
    }
    return dirs;
  }
  if (dim == 3) {
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < count; ++k) {
      const double z = 1.0 - 2.0 * (k + 0.5) / count;
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      Vector d(3);
      d << r * std::cos(golden * k), r * std::sin(golden * k), z;
      dirs.push_back(d);
    }
    return dirs;
  }
  throw DomainError("direction meshes are provided for dimensions 1 to 3");
}

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

int uniform_int(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

Vector gaussian_vector(Rng& rng, int dim) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(dim);
  for (int i = 0; i < dim; ++i) v(i) = normal(rng);
  return v;
}

Vector unit_vector(Rng& rng, int dim) {
  Vector v = gaussian_vector(rng, dim);
  double n = v.norm();
  while (n < 1e-12) {
    v = gaussian_vector(rng, dim);
    n = v.norm();
  }
  return v / n;
}

Vector point_in_ball(Rng& rng, int dim, double radius) {
  const double r = radius * std::pow(uniform(rng, 0.0, 1.0), 1.0 / dim);
  return r * unit_vector(rng, dim);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer over the pair
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace pdhj
