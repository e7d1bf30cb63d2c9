#ifndef TWISTLAB_NUMERICS_HPP
#define TWISTLAB_NUMERICS_HPP

// Low-level numeric kernels shared by every module: quadrature, finite
// difference stencils, interpolation, monotone root finding and linear
// regression. Kernels are templated on the scalar type; the rest of the
// library instantiates them with double.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include "twistlab/common.hpp"

namespace twistlab::numerics {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Uniform nodes lo, ..., hi (count >= 2, both ends included).
template <typename Scalar = double>
Vector<Scalar> uniform_nodes(Scalar lo, Scalar hi, Eigen::Index count) {
  return Vector<Scalar>::LinSpaced(count, lo, hi);
}

/// Simpson's rule on a single cell using the midpoint sample.
template <typename Scalar, typename F>
Scalar simpson_cell(const F& f, Scalar a, Scalar b) {
  const Scalar m = (a + b) / Scalar(2);
  return (b - a) / Scalar(6) * (f(a) + Scalar(4) * f(m) + f(b));
}

/// Running integral of f from nodes[0] to every node, one Simpson cell per
/// interval. Works for any node count; accuracy is O(h^4).
template <typename Scalar, typename F>
Vector<Scalar> cumulative_simpson(const F& f, const Vector<Scalar>& nodes) {
  Vector<Scalar> out(nodes.size());
  if (nodes.size() == 0) return out;
  out(0) = Scalar(0);
  Scalar left = f(nodes(0));
  for (Eigen::Index i = 1; i < nodes.size(); ++i) {
    const Scalar a = nodes(i - 1), b = nodes(i);
    const Scalar right = f(b);
    out(i) = out(i - 1) + (b - a) / Scalar(6) * (left + Scalar(4) * f((a + b) / Scalar(2)) + right);
    left = right;
  }
  return out;
}

/// Composite Simpson over [a, b] with an even number of panels.
template <typename Scalar, typename F>
Scalar simpson(const F& f, Scalar a, Scalar b, int panels) {
  if (panels < 2) panels = 2;
  if (panels % 2 != 0) ++panels;
  const Scalar h = (b - a) / Scalar(panels);
  Scalar sum = f(a) + f(b);
  for (int i = 1; i < panels; ++i) sum += Scalar(i % 2 == 1 ? 4 : 2) * f(a + Scalar(i) * h);
  return sum * h / Scalar(3);
}

/// Mean of a 1-periodic function by the trapezoidal rule on n points, which
/// converges spectrally for smooth periodic integrands.
template <typename Scalar, typename F>
Scalar periodic_mean(const F& f, int n) {
  Scalar sum(0);
  for (int i = 0; i < n; ++i) sum += f(Scalar(i) / Scalar(n));
  return sum / Scalar(n);
}

/// Fourth-order first derivative at index i of samples with spacing h.
/// Central five-point stencil in the interior, one-sided at the two edge
/// nodes on each side. Requires at least 5 samples.
template <typename Scalar, typename Samples>
Scalar derivative4(const Samples& v, Eigen::Index n, Eigen::Index i, Scalar h) {
  if (i >= 2 && i + 2 < n)
    return (v(i - 2) - Scalar(8) * v(i - 1) + Scalar(8) * v(i + 1) - v(i + 2)) / (Scalar(12) * h);
  if (i == 0)
    return (Scalar(-25) * v(0) + Scalar(48) * v(1) - Scalar(36) * v(2) + Scalar(16) * v(3) - Scalar(3) * v(4)) /
           (Scalar(12) * h);
  if (i == 1)
    return (Scalar(-3) * v(0) - Scalar(10) * v(1) + Scalar(18) * v(2) - Scalar(6) * v(3) + v(4)) / (Scalar(12) * h);
  if (i == n - 1)
    return -(Scalar(-25) * v(n - 1) + Scalar(48) * v(n - 2) - Scalar(36) * v(n - 3) + Scalar(16) * v(n - 4) -
             Scalar(3) * v(n - 5)) /
           (Scalar(12) * h);
  return -(Scalar(-3) * v(n - 1) - Scalar(10) * v(n - 2) + Scalar(18) * v(n - 3) - Scalar(6) * v(n - 4) + v(n - 5)) /
         (Scalar(12) * h);
}

/// Fourth-order central derivative of periodic samples. The samples hold
/// `period` distinct values; index arithmetic wraps modulo period.
template <typename Scalar, typename Samples>
Scalar periodic_derivative4(const Samples& v, Eigen::Index period, Eigen::Index i, Scalar h) {
  auto at = [&](Eigen::Index k) { return v(((k % period) + period) % period); };
  return (at(i - 2) - Scalar(8) * at(i - 1) + Scalar(8) * at(i + 1) - at(i + 2)) / (Scalar(12) * h);
}

/// Piecewise-linear interpolation on increasing abscissae, clamped at the ends.
template <typename Scalar>
Scalar interp_linear(const Vector<Scalar>& xs, const Vector<Scalar>& ys, Scalar x) {
  const Eigen::Index n = xs.size();
  if (x <= xs(0)) return ys(0);
  if (x >= xs(n - 1)) return ys(n - 1);
  const Scalar* begin = xs.data();
  const Eigen::Index k = std::upper_bound(begin, begin + n, x) - begin;  // xs(k-1) <= x < xs(k)
  const Scalar t = (x - xs(k - 1)) / (xs(k) - xs(k - 1));
  return ys(k - 1) + t * (ys(k) - ys(k - 1));
}

/// Cell index j with nodes(j) <= x <= nodes(j+1) for uniform nodes, and the
/// local coordinate in [0, 1].
template <typename Scalar>
std::pair<Eigen::Index, Scalar> locate_uniform(Scalar lo, Scalar step, Eigen::Index count, Scalar x) {
  Scalar s = (x - lo) / step;
  Eigen::Index j = static_cast<Eigen::Index>(std::floor(s));
  j = std::clamp<Eigen::Index>(j, 0, count - 2);
  return {j, s - Scalar(j)};
}

/// Root of an increasing function on [lo, hi] by bisection.
template <typename Scalar, typename F>
Scalar bisect_increasing(const F& f, Scalar target, Scalar lo, Scalar hi, int iterations = 200) {
  for (int it = 0; it < iterations; ++it) {
    const Scalar mid = lo + (hi - lo) / Scalar(2);
    if (mid <= lo || mid >= hi) break;
    if (f(mid) < target)
      lo = mid;
    else
      hi = mid;
  }
  return lo + (hi - lo) / Scalar(2);
}

/// Solves f(x) = target for an increasing C^1 function, Newton steps
/// safeguarded by a bracket that is expanded outward from `guess` first.
template <typename Scalar, typename F, typename DF>
Scalar solve_increasing(const F& f, const DF& df, Scalar target, Scalar guess, Scalar initial_step = Scalar(1)) {
  Scalar lo = guess - initial_step, hi = guess + initial_step;
  for (int k = 0; f(lo) > target; ++k) {
    lo -= initial_step * std::ldexp(Scalar(1), k);
    if (k > 60) throw DomainError("solve_increasing: no lower bracket");
  }
  for (int k = 0; f(hi) < target; ++k) {
    hi += initial_step * std::ldexp(Scalar(1), k);
    if (k > 60) throw DomainError("solve_increasing: no upper bracket");
  }
  Scalar x = std::clamp(guess, lo, hi);
  for (int it = 0; it < 100; ++it) {
    const Scalar fx = f(x) - target;
    if (fx == Scalar(0)) return x;
    if (fx < 0)
      lo = x;
    else
      hi = x;
    const Scalar d = df(x);
    Scalar next = (d > Scalar(0)) ? x - fx / d : lo + (hi - lo) / Scalar(2);
    if (!(next > lo && next < hi)) next = lo + (hi - lo) / Scalar(2);
    if (std::abs(next - x) <= Scalar(4) * std::numeric_limits<Scalar>::epsilon() * (Scalar(1) + std::abs(x)))
      return next;
    x = next;
    if (hi - lo <= Scalar(2) * std::numeric_limits<Scalar>::epsilon() * (Scalar(1) + std::abs(x))) return x;
  }
  return x;
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Ordinary least squares y ~ slope * x + intercept.
inline LineFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys) {
  const auto n = static_cast<Eigen::Index>(xs.size());
  Eigen::MatrixXd design(n, 2);
  Eigen::VectorXd rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    design(i, 0) = xs[static_cast<std::size_t>(i)];
    design(i, 1) = 1.0;
    rhs(i) = ys[static_cast<std::size_t>(i)];
  }
  const Eigen::Vector2d beta = design.colPivHouseholderQr().solve(rhs);
  const Eigen::VectorXd residual = rhs - design * beta;
  const double mean = rhs.mean();
  const double total = (rhs.array() - mean).square().sum();
  LineFit fit;
  fit.slope = beta(0);
  fit.intercept = beta(1);
  fit.r_squared = total > 0.0 ? std::clamp(1.0 - residual.squaredNorm() / total, 0.0, 1.0) : 1.0;
  return fit;
}

/// Central finite-difference step for a coordinate of magnitude |v|.
inline double fd_step(double v) { return std::max(1e-6, 1e-8 * (1.0 + std::abs(v))); }

}  // namespace twistlab::numerics

#endif  // TWISTLAB_NUMERICS_HPP
