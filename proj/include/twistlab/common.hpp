#ifndef TWISTLAB_COMMON_HPP
#define TWISTLAB_COMMON_HPP

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace twistlab {

/// Point of the universal cover R^2 of the annulus: (x, r), x the lifted angle.
using LiftPoint = Eigen::Vector2d;
/// Row-major 2x2 differential [[a, b], [c, d]].
using Jacobian2 = Eigen::Matrix2d;
using Grid = Eigen::MatrixXd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Point of the annulus T x R with theta reduced to [0, 1).
struct AnnulusPoint {
  double theta = 0.0;
  double r = 0.0;
};

inline double wrap_unit(double x) {
  double t = x - std::floor(x);
  return t >= 1.0 ? 0.0 : t;
}

inline AnnulusPoint project(const LiftPoint& p) { return {wrap_unit(p.x()), p.y()}; }

/// Signed distance between two angles, reduced to [-1/2, 1/2).
inline double angle_distance(double a, double b) {
  double d = a - b;
  return d - std::floor(d + 0.5);
}

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double width() const { return hi - lo; }
  bool contains(double v) const { return v >= lo && v <= hi; }
  bool contains(const Interval& other) const { return other.lo >= lo && other.hi <= hi; }
};

/// Rectangle [x_min, x_max] x [r_min, r_max] in lifted coordinates.
struct Strip {
  double x_min = 0.0;
  double x_max = 1.0;
  double r_min = 0.0;
  double r_max = 1.0;
};

struct GridResolution {
  int nx = 64;
  int nr = 64;
};

// Error hierarchy. Each operation throws the most specific type; callers that
// only care about failure catch twistlab::Error.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define TWISTLAB_DEFINE_ERROR(Name)         \
  class Name : public Error {               \
   public:                                  \
    using Error::Error;                     \
  }

TWISTLAB_DEFINE_ERROR(ArgumentError);
TWISTLAB_DEFINE_ERROR(DivergenceError);
TWISTLAB_DEFINE_ERROR(StepSizeError);
TWISTLAB_DEFINE_ERROR(LabelingError);
TWISTLAB_DEFINE_ERROR(InsufficientDataError);
TWISTLAB_DEFINE_ERROR(NotInvariantError);
TWISTLAB_DEFINE_ERROR(TorsionSignError);
TWISTLAB_DEFINE_ERROR(PreconditionError);
TWISTLAB_DEFINE_ERROR(VerticalImageError);
TWISTLAB_DEFINE_ERROR(DomainError);
TWISTLAB_DEFINE_ERROR(ParameterError);
TWISTLAB_DEFINE_ERROR(ConstructionError);

#undef TWISTLAB_DEFINE_ERROR

/// The image of a sampled curve is not a graph over the circle.
class NotAGraphError : public Error {
 public:
  NotAGraphError(const std::string& what, std::size_t index) : Error(what), index_(index) {}
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

/// A generating grid does not define a straightening homeomorphism.
class NotStraightenableError : public Error {
 public:
  NotStraightenableError(const std::string& what, double c_node) : Error(what), c_node_(c_node) {}
  double c_node() const { return c_node_; }

 private:
  double c_node_;
};

}  // namespace twistlab

#endif  // TWISTLAB_COMMON_HPP
