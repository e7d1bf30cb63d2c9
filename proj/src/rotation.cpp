#include "twistlab/rotation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "twistlab/csv.hpp"
#include "twistlab/numerics.hpp"
#include "twistlab/parallel.hpp"

namespace twistlab {

CircleMapLift circle_inverse(const CircleMapLift& g) {
  CircleMapLift inv;
  inv.shift = 0;
  inv.g = [g](double y) {
    const double base = y - g(0.0);
    return numerics::bisect_increasing<double>([&](double x) { return g(x); }, y, base - 2.0, base + 2.0);
  };
  return inv;
}

CircleCheck check_circle_lift(const CircleMapLift& g, int samples) {
  CircleCheck out;
  out.min_increment = std::numeric_limits<double>::infinity();
  double prev = g(0.0);
  for (int i = 0; i < samples; ++i) {
    const double x = static_cast<double>(i) / samples;
    const double gx = g(x);
    out.degree_defect = std::max(out.degree_defect, std::abs(g(x + 1.0) - gx - 1.0));
    if (i > 0) out.min_increment = std::min(out.min_increment, gx - prev);
    prev = gx;
  }
  out.min_increment = std::min(out.min_increment, g(1.0) - prev);
  return out;
}

CircleMapLift projected_circle_map(const TwistMapSpec& map, const FoliationSpec& fol, double c,
                                   const ProjectionOptions& options) {
  double deviation = 0.0;
  for (int i = 0; i < options.invariance_samples; ++i) {
    const double t = static_cast<double>(i) / options.invariance_samples;
    const LiftPoint image = map.forward(LiftPoint(t, fol.leaf(t, c)));
    deviation = std::max(deviation, std::abs(image.y() - fol.leaf(wrap_unit(image.x()), c)));
  }
  if (!(deviation <= options.invariance_tolerance)) {
    std::ostringstream msg;
    msg << "leaf c = " << c << " is not invariant: max deviation " << deviation;
    throw NotInvariantError(msg.str());
  }
  auto raw = [&map, fol, c](double x) { return map.forward(LiftPoint(x, fol.leaf(wrap_unit(x), c))).x(); };
  CircleMapLift lift;
  lift.shift = options.normalize ? static_cast<long>(std::floor(raw(0.0))) : 0;
  const double s = static_cast<double>(lift.shift);
  lift.g = [raw, s](double x) { return raw(x) - s; };
  return lift;
}

namespace {

struct Fraction {
  long p = 0;
  long q = 1;
};

// Simplest rational in [lo, hi] (smallest denominator) by continued fractions.
Fraction simplest_fraction(double lo, double hi, int depth = 0) {
  const double fl = std::floor(lo);
  if (std::ceil(lo) <= hi || depth > 40) return {static_cast<long>(std::ceil(lo) <= hi ? std::ceil(lo) : std::round(lo)), 1};
  const double a = lo - fl, b = hi - fl;  // 0 < a <= b < 1
  const Fraction inner = simplest_fraction(1.0 / b, 1.0 / a, depth + 1);
  return {static_cast<long>(fl) * inner.p + inner.q, inner.p};
}

}  // namespace

RotationEstimate rotation_number(const CircleMapLift& g, long n_max, double tol) {
  if (n_max < 100) throw InsufficientDataError("rotation_number: need at least 100 iterations");
  std::vector<double> orbit(static_cast<std::size_t>(n_max) + 1);
  orbit[0] = 0.0;
  for (long j = 0; j < n_max; ++j) orbit[static_cast<std::size_t>(j) + 1] = g(orbit[static_cast<std::size_t>(j)]);

  RotationEstimate est;
  est.iterations = n_max;
  est.raw = orbit.back() / static_cast<double>(n_max);
  est.lower = -std::numeric_limits<double>::infinity();
  est.upper = std::numeric_limits<double>::infinity();
  for (long j = 1; j <= n_max; ++j) {
    const double xj = orbit[static_cast<std::size_t>(j)], jj = static_cast<double>(j);
    est.lower = std::max(est.lower, (xj - 1.0) / jj);
    est.upper = std::min(est.upper, (xj + 1.0) / jj);
  }

  // smooth-weighted average of the displacements
  double num = 0.0, den = 0.0;
  const double n1 = static_cast<double>(n_max) + 1.0;
  for (long j = 0; j < n_max; ++j) {
    const double t = static_cast<double>(j + 1) / n1;
    const double w = std::exp(-1.0 / (t * (1.0 - t)));
    num += w * (orbit[static_cast<std::size_t>(j) + 1] - orbit[static_cast<std::size_t>(j)]);
    den += w;
  }
  est.value = std::clamp(den > 0.0 ? num / den : est.raw, est.lower, est.upper);

  const Fraction f = simplest_fraction(est.lower, est.upper);
  est.p = f.p;
  est.q = f.q;
  if (f.q <= n_max && std::abs(orbit[static_cast<std::size_t>(f.q)] - static_cast<double>(f.p)) <= tol) {
    est.periodic = true;
    est.value = static_cast<double>(f.p) / static_cast<double>(f.q);
  }
  return est;
}

double ConjugacyData::h_at(double x) const {
  const double k = std::floor(x);
  const double f = x - k;
  if (labeled) {
    // piecewise linear through (sorted_orbit[j], orbit_labels[j]), closed by (1, 1)
    const auto it = std::upper_bound(sorted_orbit.begin(), sorted_orbit.end(), f);
    const auto j = static_cast<std::size_t>(it - sorted_orbit.begin()) - 1;
    const double x0 = sorted_orbit[j], y0 = orbit_labels[j];
    const double x1 = j + 1 < sorted_orbit.size() ? sorted_orbit[j + 1] : 1.0;
    const double y1 = j + 1 < sorted_orbit.size() ? orbit_labels[j + 1] : 1.0;
    return k + y0 + (y1 - y0) * (f - x0) / (x1 - x0);
  }
  if (!sorted_orbit.empty()) {
    // points within rounding of f count as lying to its right
    const auto count = std::lower_bound(sorted_orbit.begin(), sorted_orbit.end(), f - 1e-12) - sorted_orbit.begin();
    return k + static_cast<double>(count) / static_cast<double>(sorted_orbit.size());
  }
  return k + numerics::interp_linear<double>(theta_nodes, h_samples, f);
}

ConjugacyData measure_cdf(const CircleMapLift& g, const Eigen::VectorXd& theta_nodes, long n, const CdfOptions& options) {
  if (n < 100) throw InsufficientDataError("measure_cdf: need at least 100 orbit points");
  ConjugacyData data;
  data.orbit_length = n;
  data.theta_nodes = theta_nodes;
  std::vector<double> lifted(static_cast<std::size_t>(n));
  double x = 0.0;
  for (long j = 0; j < n; ++j) {
    lifted[static_cast<std::size_t>(j)] = x;
    x = g(x);
  }
  const RotationEstimate rot = rotation_number(g, n);
  data.rho = rot.value;

  if (rot.periodic) {
    // one period carries the invariant measure of the orbit; longer orbits
    // only add rounding drift around each periodic point
    data.sorted_orbit.resize(static_cast<std::size_t>(rot.q));
    std::transform(lifted.begin(), lifted.begin() + rot.q, data.sorted_orbit.begin(), wrap_unit);
    std::sort(data.sorted_orbit.begin(), data.sorted_orbit.end());
  } else {
    // A semi-conjugacy sends g^k(0) to k rho mod 1. When those labels
    // increase along the sorted orbit they pin h down far more precisely
    // than the orbit counts do.
    std::vector<std::pair<double, double>> labeled(lifted.size());
    for (std::size_t k = 0; k < lifted.size(); ++k) {
      const double label = std::fmod(static_cast<double>(k) * rot.value, 1.0);
      labeled[k] = {wrap_unit(lifted[k]), label < 0.0 ? label + 1.0 : label};
    }
    std::sort(labeled.begin(), labeled.end());
    data.sorted_orbit.resize(lifted.size());
    for (std::size_t k = 0; k < labeled.size(); ++k) data.sorted_orbit[k] = labeled[k].first;

    // a long periodic orbit revisits its points: merge repeats first
    std::vector<std::pair<double, double>> points{labeled.front()};
    bool increasing = labeled.front().first == 0.0;
    for (std::size_t k = 1; k < labeled.size() && increasing; ++k) {
      const auto& [x, y] = labeled[k];
      if (x - points.back().first <= 1e-9 && std::abs(y - points.back().second) <= 1e-6) continue;
      increasing = x > points.back().first && y > points.back().second;
      points.push_back(labeled[k]);
    }
    if (increasing) {
      data.sorted_orbit.resize(points.size());
      data.orbit_labels.resize(points.size());
      for (std::size_t k = 0; k < points.size(); ++k) {
        data.sorted_orbit[k] = points[k].first;
        data.orbit_labels[k] = points[k].second;
      }
      data.labeled = true;
    }
  }
  std::sort(lifted.begin(), lifted.end());

  data.h_samples.resize(theta_nodes.size());
  data.M_counts.resize(static_cast<std::size_t>(theta_nodes.size()));
  for (Eigen::Index i = 0; i < theta_nodes.size(); ++i) {
    const double t = theta_nodes(i);
    data.h_samples(i) = t >= 1.0 ? 1.0 : data.h_at(t);
    const auto lo = std::lower_bound(lifted.begin(), lifted.end(), 0.0);
    const auto hi = std::upper_bound(lifted.begin(), lifted.end(), t);
    data.M_counts[static_cast<std::size_t>(i)] = hi > lo ? static_cast<long>(hi - lo) : 0;
  }
  for (Eigen::Index i = 1; i < theta_nodes.size(); ++i)
    data.max_increment = std::max(data.max_increment, data.h_samples(i) - data.h_samples(i - 1));

  data.residual = semiconjugacy_residual(data, g);
  data.flagged = data.residual > 5.0 / static_cast<double>(n) || data.max_increment > options.atom_threshold;
  if (!options.keep_orbit && !data.labeled) {
    data.sorted_orbit.clear();
    data.sorted_orbit.shrink_to_fit();
  }
  return data;
}

double semiconjugacy_residual(const ConjugacyData& data, const CircleMapLift& g) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < data.theta_nodes.size(); ++i) {
    const double t = data.theta_nodes(i);
    const double h = t >= 1.0 ? 1.0 + data.h_at(0.0) : data.h_at(t);
    worst = std::max(worst, std::abs(data.h_at(g(t)) - h - data.rho));
  }
  return worst;
}

ConjugacyData conjugacy_from_grid(const GeneratingGrid& grid, double c, double rho) {
  ConjugacyData data;
  data.rho = rho;
  data.theta_nodes = grid.theta_nodes;
  data.h_samples.resize(grid.n_theta());
  for (Eigen::Index i = 0; i < grid.n_theta(); ++i)
    data.h_samples(i) = grid.theta_nodes(i) + grid.interpolate(grid.du_dc, grid.theta_nodes(i), c);
  for (Eigen::Index i = 1; i < grid.n_theta(); ++i)
    data.max_increment = std::max(data.max_increment, data.h_samples(i) - data.h_samples(i - 1));
  return data;
}

RationalDensity rational_leaf_density(const TwistMapSpec& map, const FoliationSpec& fol, double c, int q,
                                      const RationalDensityOptions& options) {
  if (q < 1) throw ArgumentError("rational_leaf_density: q must be positive");
  const int n = std::max(options.samples, 8);
  RationalDensity out;
  out.q = q;

  const LiftPoint start(0.0, fol.leaf(0.0, c));
  out.p = std::lround(map_eval_lift(map, start, q).x() - start.x());
  for (int i = 0; i < options.check_samples; ++i) {
    const double t = static_cast<double>(i) / options.check_samples;
    const LiftPoint p0(t, fol.leaf(t, c));
    const LiftPoint pq = map_eval_lift(map, p0, q);
    out.periodicity_defect = std::max(out.periodicity_defect, (pq - p0 - LiftPoint(static_cast<double>(out.p), 0.0)).norm());
  }
  if (!(out.periodicity_defect <= options.periodic_tolerance)) {
    std::ostringstream msg;
    msg << "F^" << q << " is not a translation by (" << out.p << ", 0) on leaf c = " << c << " (defect "
        << out.periodicity_defect << ")";
    throw PreconditionError(msg.str());
  }

  out.theta_nodes = numerics::uniform_nodes(0.0, 1.0, n + 1);
  out.torsion.resize(n + 1);
  std::vector<int> bad;
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t ii) {
    const auto i = static_cast<Eigen::Index>(ii);
    const double t = out.theta_nodes(i);
    out.torsion(i) = iterated_jacobian(map, LiftPoint(t, fol.leaf(t, c)), q)(0, 1);
  });
  out.torsion(n) = out.torsion(0);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(out.torsion(i) > 0.0)) {
      std::ostringstream msg;
      msg << "torsion s_" << q << " = " << out.torsion(i) << " <= 0 at theta = " << out.theta_nodes(i);
      throw TorsionSignError(msg.str());
    }
  }
  out.density = out.torsion.array().rsqrt();
  out.normalizer = out.density.head(n).mean();
  out.density /= out.normalizer;
  out.h.resize(n + 1);
  out.h(0) = 0.0;
  for (Eigen::Index i = 1; i <= n; ++i) out.h(i) = out.h(i - 1) + 0.5 * (out.density(i - 1) + out.density(i)) / n;
  return out;
}

double RhoProfile::rho_at(double c) const {
  if (c_nodes.empty()) throw ArgumentError("rho_at: empty profile");
  if (c_nodes.size() == 1) return rho_values.front();
  const Eigen::Map<const Eigen::VectorXd> xs(c_nodes.data(), static_cast<Eigen::Index>(c_nodes.size()));
  const Eigen::Map<const Eigen::VectorXd> ys(rho_values.data(), static_cast<Eigen::Index>(rho_values.size()));
  return numerics::interp_linear<double>(xs, ys, c);
}

RhoProfile rho_profile(const TwistMapSpec& map, const FoliationSpec& fol, const std::vector<double>& c_nodes, long n_max,
                       const ProjectionOptions& options) {
  RhoProfile profile;
  profile.c_nodes = c_nodes;
  profile.rho_values.resize(c_nodes.size());
  profile.brackets.resize(c_nodes.size());
  parallel_for(c_nodes.size(), [&](std::size_t k) {
    const CircleMapLift g = projected_circle_map(map, fol, c_nodes[k], options);
    const RotationEstimate est = rotation_number(g, n_max);
    profile.rho_values[k] = est.value + static_cast<double>(g.shift);
    profile.brackets[k] = est.error_bound();
  });
  profile.lower_lip = std::numeric_limits<double>::infinity();
  profile.upper_lip = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < c_nodes.size(); ++k) {
    const double q = (profile.rho_values[k + 1] - profile.rho_values[k]) / (c_nodes[k + 1] - c_nodes[k]);
    profile.lower_lip = std::min(profile.lower_lip, q);
    profile.upper_lip = std::max(profile.upper_lip, q);
    if (profile.monotone && profile.rho_values[k + 1] < profile.rho_values[k] - profile.brackets[k] - profile.brackets[k + 1]) {
      profile.monotone = false;
      profile.violation_index = k;
    }
  }
  return profile;
}

void write_profile_csv(const RhoProfile& profile, std::ostream& out) {
  csv::write_header(out, {"c", "rho", "bracket"});
  for (std::size_t k = 0; k < profile.c_nodes.size(); ++k)
    csv::write_row(out, {profile.c_nodes[k], profile.rho_values[k], profile.brackets[k]});
}

void write_conjugacy_csv(const ConjugacyData& data, const CircleMapLift& g, std::ostream& out) {
  csv::write_header(out, {"theta", "h", "residual"});
  for (Eigen::Index i = 0; i < data.theta_nodes.size(); ++i) {
    const double t = data.theta_nodes(i);
    const double h = data.h_samples(i);
    csv::write_row(out, {t, h, std::abs(data.h_at(g(t)) - h - data.rho)});
  }
}

}  // namespace twistlab
