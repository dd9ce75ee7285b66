#pragma once

#include "pdhj/control.hpp"
#include "pdhj/numerics.hpp"
#include "pdhj/path.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

namespace pdhj {

/// A solution (y, z) of the characteristic inclusion on the grid; z is stored
/// as a one-dimensional path on the same time grid.
struct CharacteristicPair {
  Path y;
  Path z;
};

void write_csv(std::ostream& out, const CharacteristicPair& pair);

struct ComplexPoint {
  Vector f;
  double g = 0.0;
};

/// A characteristic complex given by a selection oracle and an extreme-point mesh.
///
/// standard: f in the ball of radius c(1 + max|y|), g = <q, f> - H(q), q in R^n.
/// upper/lower: the half-balls {<q, f> >= H(q)} / {<q, f> <= H(q)} of radius
/// sqrt(2) c (1 + max|y|) with g = 0.  When lifted, the half-balls live in
/// R^{n+1} = (f, g), the parameter is (q, theta) and the constraint uses the
/// lifted Hamiltonian <q, f> + theta g against Hbar(q, theta).
class ComplexHandle {
 public:
  enum class Kind { standard, upper, lower };

  ComplexHandle(Kind kind, double c, HamiltonianHandle H, bool lifted = false);

  Kind kind() const { return kind_; }
  bool lifted() const { return lifted_; }
  double c() const { return c_; }
  const HamiltonianHandle& hamiltonian() const { return H_; }
  /// Dimension of the vectors the selection acts on: n, or n + 1 when lifted.
  int selection_dim(int n) const { return lifted_ ? n + 1 : n; }

  double radius(double tau, const Path& y) const;

  /// Maps a raw vector into the set E(tau, y, param): radial clipping into
  /// the ball, then a convex step towards the support point of the half-space.
  /// Throws DomainError when the set is empty.
  ComplexPoint select(double tau, const Path& y, const Vector& param, const Vector& raw) const;

  bool contains(double tau, const Path& y, const Vector& param, const ComplexPoint& p, double tol = 1e-10) const;
  bool empty(double tau, const Path& y, const Vector& param) const;

  /// Extreme points of the set: the sphere mesh restricted to the half-space,
  /// infeasible mesh points pushed onto the hyperplane.  For the standard
  /// complex the support points of the objective are added, which makes the
  /// minimum over the ball exact.
  std::vector<ComplexPoint> mesh(double tau, const Path& y, const Vector& param, int directions,
                                 const Vector& objective) const;

 private:
  double constraint_value(double tau, const Path& y, const Vector& param) const;
  Vector stacked(const ComplexPoint& p) const;
  ComplexPoint unstack(const Vector& v, int n) const;

  Kind kind_;
  double c_;
  HamiltonianHandle H_;
  bool lifted_;
};

ComplexHandle standard_E(double c, const HamiltonianHandle& H);

struct ComplexPair {
  ComplexHandle upper;
  ComplexHandle lower;
};

ComplexPair homogeneous_complexes(double c, const HamiltonianHandle& H);

/// Complexes over (f, g) built on the lifted Hamiltonian.
ComplexPair lifted_complexes(double c, const HamiltonianHandle& H, std::vector<double> theta_schedule = {});

struct SelectionPolicy {
  enum class Mode { fixed, random, callback };
  using Callback = std::function<Vector(int cell, double tau, const Path& y)>;

  Mode mode = Mode::fixed;
  Vector fixed;
  Callback callback;
  std::uint64_t seed = 0;
  /// When false, raw vectors must already lie in the set.
  bool clip = true;

  static SelectionPolicy constant(Vector raw);
  static SelectionPolicy random(std::uint64_t seed);
  static SelectionPolicy driven(Callback cb);
};

/// Euler integration on [t, until] (until defaults to T); y stays frozen afterwards.
CharacteristicPair integrate_characteristic(const ComplexHandle& complex, const HistoryPoint& point,
                                            const Vector& param, const SelectionPolicy& policy,
                                            std::optional<double> until = std::nullopt);

struct C4Sample {
  double t;
  Path y;
  Vector s;
};

struct C4Report {
  std::vector<double> residuals;
  double worst = 0.0;
  int empty_sets = 0;
};

/// Sup-min (upper, standard) and inf-max (lower, standard) representations of
/// H over sampled parameters near s, each minimum/maximum taken over the mesh.
C4Report verify_C4(const ComplexHandle& complex, const HamiltonianHandle& H, const std::vector<C4Sample>& samples,
                   int mesh_directions, int param_perturbations, std::uint64_t seed);

struct ZeroSlice {
  double value = 0.0;
  std::vector<double> theta;
  std::vector<double> estimates;  // theta * H(s / theta)
  bool converged = true;
};

/// Limit of theta H(t, x, s / theta) as theta -> 0 by linear extrapolation on
/// the two smallest theta.  Flags divergence when the secant slope on the last
/// pair runs away from the first one.
ZeroSlice zero_slice(const HamiltonianHandle& H, double t, const Path& x, const Vector& s,
                     const std::vector<double>& theta_schedule);

/// Hbar(t, x, (s, theta)) = |theta| H(t, x, s / |theta|), and the zero-slice
/// limit at theta = 0 (DomainError when it does not settle).
HamiltonianHandle lift_hamiltonian(const HamiltonianHandle& H, std::vector<double> theta_schedule = {});

}  // namespace pdhj
