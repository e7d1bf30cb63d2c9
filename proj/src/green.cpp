#include "twistlab/green.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "twistlab/csv.hpp"
#include "twistlab/parallel.hpp"

namespace twistlab {

namespace {

double slope_of(const Eigen::Vector2d& v) {
  if (std::abs(v.x()) <= 1e-14 * v.norm()) throw VerticalImageError("pushed vertical is vertical (conjugate point)");
  return v.y() / v.x();
}

// Points F^{sign*j}(p), j = 0..n.
std::vector<LiftPoint> orbit(const TwistMapSpec& map, const LiftPoint& p, int n, int sign) {
  std::vector<LiftPoint> pts(static_cast<std::size_t>(n) + 1);
  pts[0] = p;
  for (int j = 1; j <= n; ++j) pts[static_cast<std::size_t>(j)] = map_eval_lift(map, pts[static_cast<std::size_t>(j) - 1], sign);
  return pts;
}

// Slopes of the vertical pushed from F^{-k}p (sign = +1) or pulled back from
// F^{k}p (sign = -1), k = 1..n, by cumulative products kept at unit scale.
std::vector<double> slope_sequence(const TwistMapSpec& map, const LiftPoint& p, int n, int sign) {
  const auto pts = orbit(map, p, n, -sign);
  std::vector<double> slopes(static_cast<std::size_t>(n));
  Jacobian2 acc = Jacobian2::Identity();
  for (int k = 1; k <= n; ++k) {
    const Jacobian2 factor = sign > 0 ? map_jacobian(map, pts[static_cast<std::size_t>(k)])
                                      : map_jacobian(map, pts[static_cast<std::size_t>(k) - 1]).inverse().eval();
    acc = acc * factor;
    acc /= acc.cwiseAbs().maxCoeff();
    slopes[static_cast<std::size_t>(k) - 1] = slope_of(acc.col(1));
  }
  return slopes;
}

double extrapolate(const std::vector<double>& s) {
  const int n = static_cast<int>(s.size());
  const double last = s.back();
  if (n < 8) return last;
  const int ks[3] = {n / 4, n / 2, n};
  Eigen::Matrix3d a;
  Eigen::Vector3d rhs;
  for (int i = 0; i < 3; ++i) {
    const double e = 1.0 / ks[i], v = s[static_cast<std::size_t>(ks[i]) - 1];
    a.row(i) << 1.0, e, -e * v;
    rhs(i) = v;
  }
  Eigen::ColPivHouseholderQR<Eigen::Matrix3d> qr(a);
  qr.setThreshold(1e-10);
  if (qr.rank() < 3) return last;
  const double limit = qr.solve(rhs)(0);
  const double spread = std::abs(last - s[static_cast<std::size_t>(ks[0]) - 1]);
  if (!std::isfinite(limit) || std::abs(limit - last) > 10.0 * spread + 1e-12) return last;
  return limit;
}

}  // namespace

double green_slope(const TwistMapSpec& map, const LiftPoint& p, int k) {
  if (k == 0) throw ArgumentError("green_slope: k must be nonzero");
  const int sign = k > 0 ? 1 : -1;
  return slope_sequence(map, p, std::abs(k), sign).back();
}

GreenData green_limits(const TwistMapSpec& map, const LiftPoint& p, const GreenOptions& options) {
  if (options.n_max < 2) throw ArgumentError("green_limits: n_max must be at least 2");
  GreenData d;
  d.base_point = p;
  d.s_pos = slope_sequence(map, p, options.n_max, +1);
  d.s_neg = slope_sequence(map, p, options.n_max, -1);
  const std::size_t n = d.s_pos.size();
  d.s_plus_estimate = d.s_pos.back();
  d.s_minus_estimate = d.s_neg.back();
  d.s_plus_extrapolated = extrapolate(d.s_pos);
  d.s_minus_extrapolated = extrapolate(d.s_neg);
  d.converged_plus = std::abs(d.s_pos[n - 1] - d.s_pos[n - 2]) < options.tol;
  d.converged_minus = std::abs(d.s_neg[n - 1] - d.s_neg[n - 2]) < options.tol;

  const double tol = options.order_tolerance;
  std::ostringstream why;
  for (std::size_t k = 1; k < n && d.interleaved; ++k) {
    if (!(d.s_pos[k] < d.s_pos[k - 1] + tol)) {
      d.interleaved = false;
      why << "s_" << k + 1 << " = " << d.s_pos[k] << " is not below s_" << k << " = " << d.s_pos[k - 1];
    } else if (!(d.s_neg[k - 1] < d.s_neg[k] + tol)) {
      d.interleaved = false;
      why << "s_-" << k << " = " << d.s_neg[k - 1] << " is not below s_-" << k + 1 << " = " << d.s_neg[k];
    }
  }
  if (d.interleaved) {
    const auto hi_neg = std::max_element(d.s_neg.begin(), d.s_neg.end());
    const auto lo_pos = std::min_element(d.s_pos.begin(), d.s_pos.end());
    if (!(*hi_neg < *lo_pos + tol)) {
      d.interleaved = false;
      why << "s_-" << (hi_neg - d.s_neg.begin()) + 1 << " = " << *hi_neg << " is not below s_"
          << (lo_pos - d.s_pos.begin()) + 1 << " = " << *lo_pos;
    }
  }
  d.interleaving_violation = why.str();
  return d;
}

SandwichReport sandwich_check(const TwistMapSpec& map, const FoliationSpec& fol, double c, int samples,
                              const SandwichOptions& options) {
  if (samples < 1) throw ArgumentError("sandwich_check: need at least one sample");
  if (options.windows.empty()) throw ArgumentError("sandwich_check: no difference windows");
  std::vector<double> windows = options.windows;
  std::sort(windows.begin(), windows.end());
  const double fine = windows[0], coarse = windows.size() > 1 ? windows[1] : windows[0];
  SandwichReport report;
  report.samples = samples;
  std::vector<SandwichViolation> at(static_cast<std::size_t>(samples));
  std::vector<double> excess(static_cast<std::size_t>(samples), 0.0);
  parallel_for(static_cast<std::size_t>(samples), [&](std::size_t i) {
    const double t = static_cast<double>(i) / samples;
    const double y = fol.leaf(t, c);
    const GreenData g = green_limits(map, LiftPoint(t, y), options.green);
    SandwichViolation v;
    v.theta = t;
    v.s_minus = g.s_neg.back();
    v.s_plus = g.s_pos.back();
    // one-sided quotients carry a curvature error linear in the window;
    // extrapolating the two finest windows removes it
    const auto quotients = [&](double w) {
      return std::pair{(y - fol.leaf(wrap_unit(t - w), c)) / w, (fol.leaf(wrap_unit(t + w), c) - y) / w};
    };
    auto [left, right] = quotients(fine);
    if (coarse > fine) {
      const auto [cl, cr] = quotients(coarse);
      left = (coarse * left - fine * cl) / (coarse - fine);
      right = (coarse * right - fine * cr) / (coarse - fine);
    }
    v.dini_lower = std::min(left, right);
    v.dini_upper = std::max(left, right);
    at[i] = v;
    excess[i] = std::max({0.0, v.s_minus - options.tol - v.dini_lower, v.dini_upper - v.s_plus - options.tol});
  });
  for (std::size_t i = 0; i < at.size(); ++i) {
    if (excess[i] > 0.0) report.violations.push_back(at[i]);
    report.max_violation = std::max(report.max_violation, excess[i]);
  }
  return report;
}

CriterionEvidence dynamical_criterion(const TwistMapSpec& map, const LiftPoint& p, const Eigen::Vector2d& v, int n_max) {
  if (n_max < 2) throw ArgumentError("dynamical_criterion: n_max must be at least 2");
  CriterionEvidence ev;
  ev.forward.resize(static_cast<std::size_t>(n_max) + 1);
  ev.backward.resize(static_cast<std::size_t>(n_max) + 1);
  Eigen::Vector2d fwd = v, bwd = v;
  LiftPoint pf = p, pb = p;
  ev.forward[0] = ev.backward[0] = std::abs(v.x());
  for (int n = 1; n <= n_max; ++n) {
    fwd = map_jacobian(map, pf) * fwd;
    pf = map_eval_lift(map, pf, 1);
    pb = map_eval_lift(map, pb, -1);
    bwd = map_jacobian(map, pb).inverse() * bwd;
    ev.forward[static_cast<std::size_t>(n)] = std::abs(fwd.x());
    ev.backward[static_cast<std::size_t>(n)] = std::abs(bwd.x());
  }
  const auto first = static_cast<std::ptrdiff_t>(n_max / 2);
  ev.forward_window_min = *std::min_element(ev.forward.begin() + first, ev.forward.end());
  ev.backward_window_min = *std::min_element(ev.backward.begin() + first, ev.backward.end());
  const double bound = 10.0 * v.norm();
  ev.forward_bounded = ev.forward_window_min <= bound;
  ev.backward_bounded = ev.backward_window_min <= bound;

  GreenOptions opts;
  opts.n_max = n_max;
  const GreenData g = green_limits(map, p, opts);
  ev.s_minus = g.s_minus_extrapolated;
  ev.s_plus = g.s_plus_extrapolated;
  ev.slope = v.x() != 0.0 ? v.y() / v.x() : std::numeric_limits<double>::infinity();
  const std::size_t half = static_cast<std::size_t>(n_max / 2) - 1;
  const double slack_minus = 1e-6 + std::abs(g.s_neg.back() - g.s_neg[half]);
  const double slack_plus = 1e-6 + std::abs(g.s_pos.back() - g.s_pos[half]);
  ev.slope_matches_minus = std::isfinite(ev.slope) && std::abs(ev.slope - ev.s_minus) <= slack_minus;
  ev.slope_matches_plus = std::isfinite(ev.slope) && std::abs(ev.slope - ev.s_plus) <= slack_plus;
  return ev;
}

void write_green_csv(const GreenData& data, std::ostream& out) {
  csv::write_header(out, {"k", "s_k", "s_minus_k"});
  for (std::size_t k = 0; k < data.s_pos.size(); ++k)
    csv::write_row(out, {static_cast<double>(k + 1), data.s_pos[k], data.s_neg[k]});
}

}  // namespace twistlab
