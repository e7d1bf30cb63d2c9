#include "twistlab/foliation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>
#include <vector>

#include "twistlab/csv.hpp"
#include "twistlab/numerics.hpp"
#include "twistlab/parallel.hpp"

namespace twistlab {

namespace {

using numerics::derivative4;
using numerics::periodic_derivative4;

// Distinct theta samples of a grid whose last node repeats theta = 0.
Eigen::Index theta_period(const GeneratingGrid& g) { return g.n_theta() - 1; }

}  // namespace

double GeneratingGrid::interpolate(const Grid& field, double theta, double c) const {
  const double t = wrap_unit(theta);
  const auto [i, s] = numerics::locate_uniform(0.0, theta_step(), n_theta(), t);
  const double cc = std::clamp(c, c_nodes(0), c_nodes(n_c() - 1));
  const auto [j, w] = numerics::locate_uniform(c_nodes(0), c_step(), n_c(), cc);
  return (1 - s) * ((1 - w) * field(i, j) + w * field(i, j + 1)) + s * ((1 - w) * field(i + 1, j) + w * field(i + 1, j + 1));
}

LeafMean leaf_mean(const FoliationSpec& fol, double c, int n, double tolerance) {
  if (n < 1) throw ArgumentError("leaf_mean: need at least one sample");
  LeafMean out;
  out.mean = numerics::periodic_mean<double>([&](double t) { return fol.leaf(t, c); }, n);
  out.defect = out.mean - c;
  out.mislabeled = std::abs(out.defect) > tolerance;
  return out;
}

GeneratingGrid build_generating_function(const FoliationSpec& fol, int n_theta, int n_c, const Interval& window,
                                         const GridOptions& options) {
  if (n_theta < 8 || n_c < 8) throw ArgumentError("build_generating_function: N and M must be at least 8");
  if (!(window.hi > window.lo)) throw ArgumentError("build_generating_function: empty c-window");
  if (!fol.domain.contains(window)) throw DomainError("build_generating_function: window leaves the foliation's domain");

  GeneratingGrid g;
  g.theta_nodes = numerics::uniform_nodes(0.0, 1.0, n_theta);
  g.c_nodes = numerics::uniform_nodes(window.lo, window.hi, n_c);
  g.u.resize(n_theta, n_c);
  g.du_dtheta.resize(n_theta, n_c);
  g.du_dc.resize(n_theta, n_c);
  g.analytic_dc = fol.has_d_c();

  const int mean_samples = std::max(n_theta - 1, 256);
  std::vector<double> defects(static_cast<std::size_t>(n_c));
  parallel_for(static_cast<std::size_t>(n_c), [&](std::size_t jj) {
    const auto j = static_cast<Eigen::Index>(jj);
    const double c = g.c_nodes(j);
    defects[jj] = leaf_mean(fol, c, mean_samples).defect;
    g.u.col(j) = numerics::cumulative_simpson<double>([&](double t) { return fol.leaf(t, c) - c; }, g.theta_nodes);
    if (g.analytic_dc)
      g.du_dc.col(j) = numerics::cumulative_simpson<double>([&](double t) { return fol.d_c(t, c) - 1.0; }, g.theta_nodes);
  });
  for (Eigen::Index j = 0; j < n_c; ++j) {
    if (std::abs(defects[static_cast<std::size_t>(j)]) > options.labeling_tolerance) {
      std::ostringstream msg;
      msg << "leaf c = " << g.c_nodes(j) << " has mean " << g.c_nodes(j) + defects[static_cast<std::size_t>(j)]
          << " (off by " << defects[static_cast<std::size_t>(j)] << ")";
      throw LabelingError(msg.str());
    }
  }

  const Eigen::Index period = theta_period(g);
  const double ht = g.theta_step(), hc = g.c_step();
  for (Eigen::Index j = 0; j < n_c; ++j) {
    const auto col = g.u.col(j);
    for (Eigen::Index i = 0; i < period; ++i) g.du_dtheta(i, j) = periodic_derivative4(col, period, i, ht);
    g.du_dtheta(period, j) = g.du_dtheta(0, j);
  }
  if (!g.analytic_dc) {
    for (Eigen::Index i = 0; i < n_theta; ++i) {
      const auto row = g.u.row(i);
      for (Eigen::Index j = 0; j < n_c; ++j) g.du_dc(i, j) = derivative4(row, n_c, j, hc);
    }
  }
  return g;
}

namespace {

// Largest |D_{k+1} - D_{k-1}| over secant slopes D_k of u between c-nodes
// taken `stride` apart, over every starting offset.
struct LevelJump {
  double jump = 0.0;
  Eigen::Index theta_index = 0;
  double c = 0.0;
  double slope_scale = 0.0;
};

LevelJump level_jump(const GeneratingGrid& g, Eigen::Index stride) {
  LevelJump best;
  const Eigen::Index m = g.n_c();
  for (Eigen::Index offset = 0; offset < stride; ++offset) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index j = offset; j < m; j += stride) idx.push_back(j);
    if (idx.size() < 4) continue;
    for (Eigen::Index i = 0; i < g.n_theta(); ++i) {
      std::vector<double> slopes(idx.size() - 1);
      for (std::size_t k = 0; k + 1 < idx.size(); ++k) {
        slopes[k] = (g.u(i, idx[k + 1]) - g.u(i, idx[k])) / (g.c_nodes(idx[k + 1]) - g.c_nodes(idx[k]));
        best.slope_scale = std::max(best.slope_scale, std::abs(slopes[k]));
      }
      for (std::size_t k = 1; k + 1 < slopes.size(); ++k) {
        const double jump = std::abs(slopes[k + 1] - slopes[k - 1]);
        if (jump > best.jump) {
          best.jump = jump;
          best.theta_index = i;
          best.c = 0.5 * (g.c_nodes(idx[k]) + g.c_nodes(idx[k + 1]));
        }
      }
    }
  }
  return best;
}

}  // namespace

C1Report c1_report(const GeneratingGrid& grid) {
  if (grid.n_c() < 64) throw PreconditionError("c1_report: grid needs at least 64 c-nodes");
  C1Report report;
  const Eigen::Index strides[3] = {4, 2, 1};
  LevelJump levels[3];
  for (int l = 0; l < 3; ++l) {
    levels[l] = level_jump(grid, strides[l]);
    report.level_jumps[l] = levels[l].jump;
  }
  report.max_jump = levels[2].jump;
  report.theta_at = grid.theta_nodes(levels[2].theta_index);
  report.c_at = levels[2].c;
  for (int l = 0; l < 2; ++l)
    report.ratios[l] = levels[l].jump > 0.0 ? levels[l + 1].jump / levels[l].jump : 0.0;
  const double floor = 1e-10 + 1e-8 * levels[2].slope_scale;
  report.discontinuity = report.max_jump > floor && report.ratios[0] >= 0.8 && report.ratios[1] >= 0.8;
  return report;
}

HolderFit holder_fit(const FoliationSpec& fol, const Interval& window, int pair_count, const HolderOptions& options) {
  if (pair_count < 20) throw ArgumentError("holder_fit: need at least 20 pairs");
  if (!(window.hi > window.lo)) throw ArgumentError("holder_fit: empty window");
  if (!(options.min_gap > 0.0 && options.max_gap > options.min_gap))
    throw ArgumentError("holder_fit: gap range must satisfy 0 < min_gap < max_gap");
  const int n_fine = std::max(options.theta_resolution, 16);

  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  struct Pair {
    double c1, c2;
  };
  std::vector<Pair> pairs(static_cast<std::size_t>(pair_count));
  const double log_lo = std::log(options.min_gap), log_hi = std::log(options.max_gap);
  for (auto& p : pairs) {
    double gap = std::exp(log_lo + (log_hi - log_lo) * unit(rng));
    gap = std::min(gap, 0.5 * window.width());
    p.c1 = window.lo + (window.width() - gap) * unit(rng);
    p.c2 = p.c1 + gap;
  }

  // sup_theta on nested grids n/4 within n/2 within n
  std::vector<double> sup_fine(pairs.size()), sup_mid(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t k) {
    double s_mid = 0.0, s_fine = 0.0;
    for (int i = 0; i < n_fine; ++i) {
      const double t = static_cast<double>(i) / n_fine;
      const double d = std::abs(fol.leaf(t, pairs[k].c2) - fol.leaf(t, pairs[k].c1));
      s_fine = std::max(s_fine, d);
      if (i % 2 == 0) s_mid = std::max(s_mid, d);
    }
    sup_fine[k] = s_fine;
    sup_mid[k] = s_mid;
  });

  std::vector<double> xs, ys;
  HolderFit fit;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const double sup = sup_fine[k];
    if (!(sup > 0.0) || !std::isfinite(sup)) continue;
    xs.push_back(std::log(pairs[k].c2 - pairs[k].c1));
    ys.push_back(std::log(sup));
    fit.sup_refinement_change = std::max(fit.sup_refinement_change, (sup - sup_mid[k]) / sup);
  }
  if (xs.size() < 10)
    throw InsufficientDataError("holder_fit: only " + std::to_string(xs.size()) + " non-degenerate pairs");
  const auto line = numerics::fit_line(xs, ys);
  fit.exponent = line.slope;
  fit.constant = std::exp(line.intercept);
  fit.r_squared = line.r_squared;
  fit.pair_count = static_cast<int>(xs.size());
  return fit;
}

LipschitzFit bilipschitz_fit(const FoliationSpec& fol, const Interval& window, const LipschitzOptions& options) {
  if (!(window.hi > window.lo) || !std::isfinite(window.lo) || !std::isfinite(window.hi))
    throw ArgumentError("bilipschitz_fit: window must be a compact interval");
  const int nt = std::max(options.n_theta, 4), nc = std::max(options.n_c, 3);
  const Eigen::VectorXd cs = numerics::uniform_nodes(window.lo, window.hi, nc);
  const double dc = cs(1) - cs(0);

  // pairs: adjacent nodes plus pairs centred on each node at shrinking gaps
  struct Pair {
    double c1, c2;
  };
  std::vector<Pair> pairs;
  for (int j = 0; j + 1 < nc; ++j) pairs.push_back({cs(j), cs(j + 1)});
  for (int j = 0; j < nc; ++j) {
    for (double frac : {1e-1, 1e-2, 1e-3}) {
      const double g = 0.5 * frac * dc;
      const double lo = std::max(window.lo, cs(j) - g), hi = std::min(window.hi, cs(j) + g);
      if (hi > lo) pairs.push_back({lo, hi});
    }
  }

  struct Extremes {
    double upper = 0.0, lower = std::numeric_limits<double>::infinity();
    double t_lower = 0.0, c_lower = 0.0;
  };
  std::vector<Extremes> per_pair(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t k) {
    Extremes e;
    const auto& p = pairs[k];
    for (int i = 0; i < nt; ++i) {
      const double t = static_cast<double>(i) / nt;
      const double q = std::abs(fol.leaf(t, p.c2) - fol.leaf(t, p.c1)) / (p.c2 - p.c1);
      e.upper = std::max(e.upper, q);
      if (q < e.lower) {
        e.lower = q;
        e.t_lower = t;
        e.c_lower = 0.5 * (p.c1 + p.c2);
      }
    }
    per_pair[k] = e;
  });

  LipschitzFit fit;
  fit.K_lower = std::numeric_limits<double>::infinity();
  for (const auto& e : per_pair) {
    fit.K_upper = std::max(fit.K_upper, e.upper);
    if (e.lower < fit.K_lower) {
      fit.K_lower = e.lower;
      fit.theta_at_lower = e.t_lower;
      fit.c_at_lower = e.c_lower;
    }
  }

  // mixed partial d^2u/(dtheta dc) = d(eta)/dc - 1
  fit.k_minus = std::numeric_limits<double>::infinity();
  fit.k_plus = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < nc; ++j) {
    if (!fol.has_d_c() && j + 1 == nc) break;
    for (int i = 0; i < nt; ++i) {
      const double t = static_cast<double>(i) / nt;
      const double k = fol.has_d_c() ? fol.d_c(t, cs(j)) - 1.0
                                     : (fol.leaf(t, cs(j + 1)) - fol.leaf(t, cs(j))) / dc - 1.0;
      fit.k_minus = std::min(fit.k_minus, k);
      fit.k_plus = std::max(fit.k_plus, k);
    }
  }
  fit.bilipschitz = fit.K_lower > options.not_bilipschitz_threshold;
  fit.mixed_partial_condition = fit.k_minus > -1.0;
  return fit;
}

namespace {

// d/dtheta of every column (periodic), rows 0..period-1
Grid theta_derivative(const GeneratingGrid& g, const Grid& field) {
  const Eigen::Index period = theta_period(g);
  Grid out(g.n_theta(), field.cols());
  for (Eigen::Index j = 0; j < field.cols(); ++j) {
    const auto col = field.col(j);
    for (Eigen::Index i = 0; i < period; ++i) out(i, j) = periodic_derivative4(col, period, i, g.theta_step());
    out(period, j) = out(0, j);
  }
  return out;
}

Grid c_derivative(const GeneratingGrid& g, const Grid& field) {
  Grid out(field.rows(), field.cols());
  for (Eigen::Index i = 0; i < field.rows(); ++i) {
    const auto row = field.row(i);
    for (Eigen::Index j = 0; j < field.cols(); ++j) out(i, j) = derivative4(row, field.cols(), j, g.c_step());
  }
  return out;
}

void localize(MixedPartialsReport& r, const Grid& diff, const Eigen::VectorXd& theta, const Eigen::VectorXd& c,
              Eigen::Index j_lo, Eigen::Index j_hi) {
  const Eigen::Index rows = diff.rows() - 1;  // last theta row repeats the first
  for (Eigen::Index j = j_lo; j <= j_hi; ++j)
    for (Eigen::Index i = 0; i < rows; ++i)
      if (diff(i, j) > r.max_discrepancy) {
        r.max_discrepancy = diff(i, j);
        r.theta_at = theta(i);
        r.c_at = c(j);
        r.worst_row = j;
      }
  for (Eigen::Index j = j_lo; j <= j_hi; ++j) {
    if (std::abs(j - r.worst_row) <= 2) continue;
    for (Eigen::Index i = 0; i < rows; ++i) r.max_outside_band = std::max(r.max_outside_band, diff(i, j));
  }
}

}  // namespace

MixedPartialsReport mixed_partials_check(const GeneratingGrid& grid, const FoliationSpec* fol) {
  if (grid.n_theta() < 64 || grid.n_c() < 64) throw PreconditionError("mixed_partials_check: need N, M >= 64");
  MixedPartialsReport report;
  const Eigen::Index m = grid.n_c();

  if (grid.analytic_dc) {
    report.used_analytic = true;
    const Grid route_a = theta_derivative(grid, grid.du_dc);
    const Grid route_b = c_derivative(grid, grid.du_dtheta);
    const Grid diff = (route_a - route_b).cwiseAbs();
    localize(report, diff, grid.theta_nodes, grid.c_nodes, 2, m - 3);
    return report;
  }

  if (fol == nullptr)
    throw ArgumentError("mixed_partials_check: grid has no analytic du/dc, the foliation is needed for a staggered grid");
  const double h = grid.c_step();
  const GeneratingGrid staggered = build_generating_function(
      *fol, static_cast<int>(grid.n_theta()), static_cast<int>(m - 1), {grid.c_nodes(0) + 0.5 * h, grid.c_nodes(m - 1) - 0.5 * h});
  const Grid on_grid = theta_derivative(grid, grid.du_dc);
  const Grid on_staggered = c_derivative(staggered, staggered.du_dtheta);

  // bring the first route to the staggered rows with 4-point midpoint interpolation
  Grid diff = Grid::Zero(grid.n_theta(), m - 1);
  for (Eigen::Index j = 1; j + 2 < m; ++j)
    for (Eigen::Index i = 0; i < grid.n_theta(); ++i) {
      const double mid = (-on_grid(i, j - 1) + 9.0 * on_grid(i, j) + 9.0 * on_grid(i, j + 1) - on_grid(i, j + 2)) / 16.0;
      diff(i, j) = std::abs(mid - on_staggered(i, j));
    }
  localize(report, diff, grid.theta_nodes, staggered.c_nodes, 2, m - 4);
  return report;
}

double area_between(const FoliationSpec& fol, double c, double c2, double theta1, double theta2, int panels) {
  if (!(c < c2)) throw ArgumentError("area_between: need c < c'");
  if (!(theta1 < theta2) || theta2 > theta1 + 1.0) throw ArgumentError("area_between: need theta1 < theta2 <= theta1 + 1");
  const double integral =
      numerics::simpson<double>([&](double t) { return fol.leaf(t, c2) - fol.leaf(t, c); }, theta1, theta2, panels);
  return integral / (c2 - c);
}

void write_grid_csv(const GeneratingGrid& grid, std::ostream& out) {
  csv::write_header(out, {"theta", "c", "u", "du_dtheta", "du_dc"});
  for (Eigen::Index j = 0; j < grid.n_c(); ++j)
    for (Eigen::Index i = 0; i < grid.n_theta(); ++i)
      csv::write_row(out, {grid.theta_nodes(i), grid.c_nodes(j), grid.u(i, j), grid.du_dtheta(i, j), grid.du_dc(i, j)});
}

FoliationSpec standard_foliation() {
  FoliationSpec f;
  f.name = "standard";
  f.leaf = [](double, double c) { return c; };
  f.d_theta = [](double, double) { return 0.0; };
  f.d_c = [](double, double) { return 1.0; };
  f.domain = {-1e6, 1e6};
  return f;
}

}  // namespace twistlab
