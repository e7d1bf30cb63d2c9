#include "twistlab/core_maps.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "twistlab/numerics.hpp"

namespace twistlab {

SampledCurve SampledCurve::from_function(const std::function<double(double)>& graph, std::size_t n) {
  SampledCurve curve;
  curve.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) curve.values[i] = graph(static_cast<double>(i) / static_cast<double>(n));
  return curve;
}

LiftPoint map_eval_lift(const TwistMapSpec& map, const LiftPoint& p, long n) {
  LiftPoint q = p;
  const auto& step = n >= 0 ? map.forward : map.inverse;
  const long count = n >= 0 ? n : -n;
  for (long k = 0; k < count; ++k) {
    q = step(q);
    if (!std::isfinite(q.x()) || !std::isfinite(q.y()) || std::abs(q.y()) > map.divergence_bound) {
      std::ostringstream msg;
      msg << "orbit of " << map.name << " left |r| <= " << map.divergence_bound << " after " << (k + 1)
          << " steps";
      throw DivergenceError(msg.str());
    }
  }
  return q;
}

Jacobian2 finite_difference_jacobian(const TwistMapSpec::Evaluator& f, const LiftPoint& p) {
  Jacobian2 jac;
  for (int col = 0; col < 2; ++col) {
    const double h = numerics::fd_step(p(col));
    LiftPoint plus = p, minus = p;
    plus(col) += h;
    minus(col) -= h;
    const double span = plus(col) - minus(col);
    if (!(span > 0.0)) throw StepSizeError("finite-difference step underflows at this coordinate");
    jac.col(col) = (f(plus) - f(minus)) / span;
  }
  return jac;
}

Jacobian2 map_jacobian(const TwistMapSpec& map, const LiftPoint& p) {
  if (map.has_differential()) return map.differential(p);
  return finite_difference_jacobian(map.forward, p);
}

Jacobian2 iterated_jacobian(const TwistMapSpec& map, const LiftPoint& p, int n) {
  Jacobian2 acc = Jacobian2::Identity();
  LiftPoint q = p;
  for (int k = 0; k < n; ++k) {
    acc = map_jacobian(map, q) * acc;
    q = map.forward(q);
  }
  return acc;
}

namespace {

double fd_first_component_dr(const TwistMapSpec& map, int n, double x, double r) {
  const double h = numerics::fd_step(r);
  const LiftPoint plus = map_eval_lift(map, LiftPoint(x, r + h), n);
  const LiftPoint minus = map_eval_lift(map, LiftPoint(x, r - h), n);
  return (plus.x() - minus.x()) / ((r + h) - (r - h));
}

template <typename Visit>
void for_each_node(const Strip& strip, const GridResolution& grid, Visit&& visit) {
  const int nx = std::max(grid.nx, 1), nr = std::max(grid.nr, 1);
  for (int i = 0; i < nx; ++i) {
    const double x = nx == 1 ? strip.x_min : strip.x_min + (strip.x_max - strip.x_min) * i / (nx - 1);
    for (int j = 0; j < nr; ++j) {
      const double r = nr == 1 ? strip.r_min : strip.r_min + (strip.r_max - strip.r_min) * j / (nr - 1);
      visit(x, r);
    }
  }
}

}  // namespace

double iterated_twist_margin(const TwistMapSpec& map, int n, const Strip& strip, const GridResolution& grid) {
  if (n <= 0) throw ArgumentError("iterated_twist_margin: n must be positive");
  double margin = std::numeric_limits<double>::infinity();
  for_each_node(strip, grid, [&](double x, double r) { margin = std::min(margin, fd_first_component_dr(map, n, x, r)); });
  return margin;
}

double twist_margin(const TwistMapSpec& map, const Strip& strip, const GridResolution& grid) {
  return iterated_twist_margin(map, 1, strip, grid);
}

TorsionBounds torsion_range(const TwistMapSpec& map, const Strip& strip, const GridResolution& grid) {
  TorsionBounds b{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for_each_node(strip, grid, [&](double x, double r) {
    const double t = fd_first_component_dr(map, 1, x, r);
    b.b_min = std::min(b.b_min, t);
    b.b_max = std::max(b.b_max, t);
  });
  return b;
}

double exactness_flux(const TwistMapSpec& map, const SampledCurve& curve) {
  const std::size_t n = curve.values.size();
  if (n < 3) throw ArgumentError("exactness_flux: need at least 3 curve samples");
  std::vector<LiftPoint> image(n + 1);
  for (std::size_t i = 0; i < n; ++i) image[i] = map.forward(LiftPoint(curve.theta(i), curve.values[i]));
  image[n] = image[0] + LiftPoint(1.0, 0.0);

  double image_area = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = image[i + 1].x() - image[i].x();
    if (!(dx > 0.0)) {
      std::ostringstream msg;
      msg << "image of the curve is not a graph: angle decreases at sample " << i;
      throw NotAGraphError(msg.str(), i);
    }
    image_area += 0.5 * (image[i].y() + image[i + 1].y()) * dx;
  }
  double curve_area = 0.0;
  for (double v : curve.values) curve_area += v;
  curve_area /= static_cast<double>(n);
  return image_area - curve_area;
}

MapInvariantReport check_map_invariants(const TwistMapSpec& map, const Strip& strip, int samples,
                                        unsigned long long seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(strip.x_min, strip.x_max), ur(strip.r_min, strip.r_max);
  MapInvariantReport report;
  for (int s = 0; s < samples; ++s) {
    const LiftPoint p(ux(rng), ur(rng));
    const LiftPoint fp = map.forward(p);
    const LiftPoint shifted = map.forward(p + LiftPoint(1.0, 0.0));
    report.periodicity_defect = std::max(report.periodicity_defect, (shifted - fp - LiftPoint(1.0, 0.0)).norm());
    report.inverse_defect = std::max(report.inverse_defect, (map.inverse(fp) - p).norm());
    report.determinant_defect = std::max(report.determinant_defect, std::abs(map_jacobian(map, p).determinant() - 1.0));
  }
  return report;
}

}  // namespace twistlab
