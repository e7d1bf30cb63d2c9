#ifndef TWISTLAB_CORE_MAPS_HPP
#define TWISTLAB_CORE_MAPS_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "twistlab/common.hpp"

namespace twistlab {

struct TorsionBounds {
  double b_min = 0.0;
  double b_max = 0.0;
};

/// A twist map of the annulus given through a lift F : R^2 -> R^2.
///
/// Immutable once built; every evaluator must be pure so the map can be
/// shared across worker threads. `differential` is optional: when absent,
/// map_jacobian falls back to central finite differences.
struct TwistMapSpec {
  using Evaluator = std::function<LiftPoint(const LiftPoint&)>;
  using Differential = std::function<Jacobian2(const LiftPoint&)>;

  std::string name;
  Evaluator forward;
  Evaluator inverse;
  Differential differential;  // may be empty
  std::optional<TorsionBounds> torsion_bounds;
  Strip declared_strip{};
  bool symplectic = true;
  double divergence_bound = 1e6;

  bool has_differential() const { return static_cast<bool>(differential); }
};

/// A closed essential curve sampled as a graph r = values[i] over the uniform
/// nodes theta_i = i / N, i = 0..N-1.
struct SampledCurve {
  std::vector<double> values;

  static SampledCurve from_function(const std::function<double(double)>& graph, std::size_t n);
  double theta(std::size_t i) const { return static_cast<double>(i) / static_cast<double>(values.size()); }
};

/// F^n(p) for any signed n, composing forward or inverse |n| times.
/// Throws DivergenceError once |r| exceeds the map's divergence bound.
LiftPoint map_eval_lift(const TwistMapSpec& map, const LiftPoint& p, long n);

/// Differential of F at p: the analytic differential when available, else
/// central differences with step max(1e-6, 1e-8 (1 + |coordinate|)).
Jacobian2 map_jacobian(const TwistMapSpec& map, const LiftPoint& p);

/// Differential by central differences regardless of analytic availability.
Jacobian2 finite_difference_jacobian(const TwistMapSpec::Evaluator& f, const LiftPoint& p);

/// Differential of F^n at p (n >= 0) by the chain rule along the orbit.
Jacobian2 iterated_jacobian(const TwistMapSpec& map, const LiftPoint& p, int n);

/// Minimum over a uniform grid of the strip of the finite-difference dF1/dr.
/// A positive value certifies the twist condition on the grid.
double twist_margin(const TwistMapSpec& map, const Strip& strip, const GridResolution& grid);

/// Same as twist_margin for the n-th iterate F^n.
double iterated_twist_margin(const TwistMapSpec& map, int n, const Strip& strip, const GridResolution& grid);

/// (min, max) of the finite-difference torsion dF1/dr over the grid.
TorsionBounds torsion_range(const TwistMapSpec& map, const Strip& strip, const GridResolution& grid);

/// Signed area between a sampled essential curve and its image under F:
/// area under the image graph minus area under the curve. Zero on every
/// curve for exact symplectic maps. Throws NotAGraphError if the image
/// does not project monotonically onto the circle.
double exactness_flux(const TwistMapSpec& map, const SampledCurve& curve);

/// Sampled checks of the structural invariants of a TwistMapSpec.
struct MapInvariantReport {
  double periodicity_defect = 0.0;  // max |F(x+1,r) - F(x,r) - (1,0)|
  double inverse_defect = 0.0;      // max |F^-1(F(p)) - p|
  double determinant_defect = 0.0;  // max |det DF - 1|
};

MapInvariantReport check_map_invariants(const TwistMapSpec& map, const Strip& strip, int samples,
                                        unsigned long long seed = 0);

}  // namespace twistlab

#endif  // TWISTLAB_CORE_MAPS_HPP
