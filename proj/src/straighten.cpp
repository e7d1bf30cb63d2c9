#include "twistlab/straighten.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

#include "twistlab/csv.hpp"
#include "twistlab/numerics.hpp"
#include "twistlab/parallel.hpp"

namespace twistlab {

namespace {

// Index k with f(k) <= y <= f(k+1) for increasing samples f(0..n-1).
template <typename F>
Eigen::Index segment_of(const F& f, Eigen::Index n, double y) {
  Eigen::Index lo = 0, hi = n - 1;
  while (hi - lo > 1) {
    const Eigen::Index mid = lo + (hi - lo) / 2;
    if (f(mid) <= y)
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

double solve_segment(double y0, double y1, double y) {
  const double dy = y1 - y0;
  return dy > 0.0 ? std::clamp((y - y0) / dy, 0.0, 1.0) : 0.0;
}

void check_monotone(const GeneratingGrid& g, double tol) {
  const Eigen::Index n = g.n_theta();
  for (Eigen::Index j = 0; j < g.n_c(); ++j) {
    bool increasing_somewhere = false;
    double worst = std::numeric_limits<double>::infinity();
    for (Eigen::Index stride : {4, 2, 1}) {
      double min_slope = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i + stride < n; i += stride) {
        const double d = (g.theta_nodes(i + stride) + g.du_dc(i + stride, j)) - (g.theta_nodes(i) + g.du_dc(i, j));
        min_slope = std::min(min_slope, d / (g.theta_nodes(i + stride) - g.theta_nodes(i)));
      }
      worst = std::min(worst, min_slope);
      if (min_slope > tol) increasing_somewhere = true;
    }
    if (!increasing_somewhere) {
      std::ostringstream msg;
      msg << "theta -> theta + du/dc is not increasing at c = " << g.c_nodes(j) << " (min slope " << worst << ")";
      throw NotStraightenableError(msg.str(), g.c_nodes(j));
    }
  }
}

}  // namespace

StraighteningMap build_straightening(const GeneratingGrid& grid, const StraightenOptions& options) {
  if (options.check_c1 && grid.n_c() >= 64) {
    const C1Report rep = c1_report(grid);
    if (rep.discontinuity) {
      std::ostringstream msg;
      msg << "du/dc jumps by " << rep.max_jump << " near c = " << rep.c_at << ", theta = " << rep.theta_at;
      throw NotStraightenableError(msg.str(), rep.c_at);
    }
  }
  check_monotone(grid, options.monotonicity_tolerance);

  auto g = std::make_shared<const GeneratingGrid>(grid);
  StraighteningMap phi;
  phi.source_grid = g;
  phi.c_window = g->window();

  phi.forward = [g](const LiftPoint& p) {
    const double x = p.x();
    const double c = std::clamp(p.y(), g->c_nodes(0), g->c_nodes(g->n_c() - 1));
    const auto [j, w] = numerics::locate_uniform(g->c_nodes(0), g->c_step(), g->n_c(), c);
    auto h = [&](Eigen::Index i) {
      return g->theta_nodes(i) + (1 - w) * g->du_dc(i, j) + w * g->du_dc(i, j + 1);
    };
    const Eigen::Index n = g->n_theta();
    const double k = std::floor(x - h(0));
    const double y = x - k;
    const Eigen::Index i = segment_of(h, n, y);
    const double t = solve_segment(h(i), h(i + 1), y);
    const double theta = g->theta_nodes(i) + t * g->theta_step() + k;
    return LiftPoint(theta, p.y() + g->interpolate(g->du_dtheta, theta, p.y()));
  };

  phi.inverse = [g](const LiftPoint& q) {
    const double theta = q.x(), r = q.y();
    const double tw = wrap_unit(theta);
    const auto [i, s] = numerics::locate_uniform(0.0, g->theta_step(), g->n_theta(), tw);
    auto v = [&](Eigen::Index j) {
      return g->c_nodes(j) + (1 - s) * g->du_dtheta(i, j) + s * g->du_dtheta(i + 1, j);
    };
    const Eigen::Index m = g->n_c();
    const Eigen::Index j = segment_of(v, m, r);
    const double v0 = v(j), v1 = v(j + 1);
    // linear extension of the end segments outside the window
    const double t = v1 > v0 ? (r - v0) / (v1 - v0) : 0.0;
    const double tc = (j == 0 || j + 2 == m) ? t : std::clamp(t, 0.0, 1.0);
    const double c = g->c_nodes(j) + tc * g->c_step();
    return LiftPoint(theta + g->interpolate(g->du_dc, theta, c), c);
  };
  return phi;
}

double area_distortion(const StraighteningMap& phi, const std::vector<Rect>& rectangles, int refinement) {
  const int n = std::max(refinement, 1);
  double worst = 0.0;
  std::vector<LiftPoint> boundary(static_cast<std::size_t>(4 * n));
  for (const Rect& rect : rectangles) {
    for (int k = 0; k < n; ++k) {
      const double t = static_cast<double>(k) / n;
      boundary[static_cast<std::size_t>(k)] = phi.forward(LiftPoint(rect.x0 + t * (rect.x1 - rect.x0), rect.c0));
      boundary[static_cast<std::size_t>(n + k)] = phi.forward(LiftPoint(rect.x1, rect.c0 + t * (rect.c1 - rect.c0)));
      boundary[static_cast<std::size_t>(2 * n + k)] = phi.forward(LiftPoint(rect.x1 - t * (rect.x1 - rect.x0), rect.c1));
      boundary[static_cast<std::size_t>(3 * n + k)] = phi.forward(LiftPoint(rect.x0, rect.c1 - t * (rect.c1 - rect.c0)));
    }
    double twice_area = 0.0;
    for (std::size_t k = 0; k < boundary.size(); ++k) {
      const LiftPoint& a = boundary[k];
      const LiftPoint& b = boundary[(k + 1) % boundary.size()];
      twice_area += a.x() * b.y() - b.x() * a.y();
    }
    worst = std::max(worst, std::abs(0.5 * twice_area / rect.area() - 1.0));
  }
  return worst;
}

std::vector<Rect> random_rectangles(const Interval& window, int count, unsigned long long seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Rect> out;
  for (int k = 0; k < count; ++k) {
    Rect r;
    const double wx = 0.05 + 0.2 * unit(rng);
    const double wc = (0.05 + 0.2 * unit(rng)) * window.width();
    r.x0 = (1.0 - wx) * unit(rng);
    r.x1 = r.x0 + wx;
    r.c0 = window.lo + (window.width() - wc) * unit(rng);
    r.c1 = r.c0 + wc;
    out.push_back(r);
  }
  return out;
}

double arnold_liouville_residual(const TwistMapSpec& map, const StraighteningMap& phi,
                                 const std::function<double(double)>& rho, const std::vector<LiftPoint>& samples) {
  double worst = 0.0;
  for (const LiftPoint& s : samples) {
    const LiftPoint back = phi.inverse(map.forward(phi.forward(s)));
    const double dx = std::abs(angle_distance(back.x(), s.x() + rho(s.y())));
    worst = std::max({worst, dx, std::abs(back.y() - s.y())});
  }
  return worst;
}

double arnold_liouville_residual(const TwistMapSpec& map, const StraighteningMap& phi, const RhoProfile& profile,
                                 int per_node, unsigned long long seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0.0;
  for (std::size_t k = 0; k < profile.c_nodes.size(); ++k) {
    std::vector<LiftPoint> samples;
    for (int s = 0; s < per_node; ++s) samples.emplace_back(unit(rng), profile.c_nodes[k]);
    const double rho = profile.rho_values[k];
    worst = std::max(worst, arnold_liouville_residual(map, phi, [rho](double) { return rho; }, samples));
  }
  return worst;
}

MollifiedFamily mollify(const GeneratingGrid& grid, const std::vector<double>& epsilons) {
  if (epsilons.empty()) throw ArgumentError("mollify: no epsilon values");
  const double eps_max = *std::max_element(epsilons.begin(), epsilons.end());
  if (!(*std::min_element(epsilons.begin(), epsilons.end()) > 0.0)) throw ArgumentError("mollify: epsilon must be positive");
  if (eps_max >= 0.5) throw DomainError("mollify: epsilon must stay below half the angular period");
  std::vector<Eigen::Index> out_cols;
  for (Eigen::Index j = 0; j < grid.n_c(); ++j) {
    const double c = grid.c_nodes(j);
    if (c >= grid.c_nodes(0) + eps_max - 1e-12 && c <= grid.c_nodes(grid.n_c() - 1) - eps_max + 1e-12) out_cols.push_back(j);
  }
  if (out_cols.size() < 8) throw DomainError("mollify: c-window too small to shrink by the largest epsilon");

  const Eigen::Index n = grid.n_theta(), period = n - 1;
  const auto mcols = static_cast<Eigen::Index>(out_cols.size());
  const double ht = grid.theta_step(), hc = grid.c_step();

  MollifiedFamily fam;
  fam.epsilon_values = epsilons;
  fam.u_eps_grids.resize(epsilons.size());
  fam.c1_errors.resize(epsilons.size());
  fam.min_monotone_slope.resize(epsilons.size());

  for (std::size_t e = 0; e < epsilons.size(); ++e) {
    const double eps = epsilons[e];
    const auto kt = static_cast<Eigen::Index>(std::floor(eps / ht));
    const auto kc = static_cast<Eigen::Index>(std::floor(eps / hc));
    Grid kernel = Grid::Zero(2 * kt + 1, 2 * kc + 1);
    for (Eigen::Index a = -kt; a <= kt; ++a)
      for (Eigen::Index b = -kc; b <= kc; ++b) {
        const double z2 = (std::pow(a * ht, 2) + std::pow(b * hc, 2)) / (eps * eps);
        if (z2 < 1.0) kernel(a + kt, b + kc) = std::exp(-1.0 / (1.0 - z2));
      }
    const double mass = kernel.sum();
    if (mass > 0.0)
      kernel /= mass;
    else
      kernel(kt, kc) = 1.0;

    GeneratingGrid out;
    out.theta_nodes = grid.theta_nodes;
    out.c_nodes.resize(mcols);
    out.u.resize(n, mcols);
    out.du_dtheta.resize(n, mcols);
    out.du_dc.resize(n, mcols);
    for (Eigen::Index jj = 0; jj < mcols; ++jj) out.c_nodes(jj) = grid.c_nodes(out_cols[static_cast<std::size_t>(jj)]);

    parallel_for(static_cast<std::size_t>(mcols), [&](std::size_t jj) {
      const Eigen::Index j = out_cols[jj];
      for (Eigen::Index i = 0; i < period; ++i) {
        double su = 0.0, st = 0.0, sc = 0.0;
        for (Eigen::Index a = -kt; a <= kt; ++a) {
          const Eigen::Index row = ((i - a) % period + period) % period;
          for (Eigen::Index b = -kc; b <= kc; ++b) {
            const double w = kernel(a + kt, b + kc);
            if (w == 0.0) continue;
            const Eigen::Index col = j - b;
            su += w * grid.u(row, col);
            st += w * grid.du_dtheta(row, col);
            sc += w * grid.du_dc(row, col);
          }
        }
        out.u(i, static_cast<Eigen::Index>(jj)) = su;
        out.du_dtheta(i, static_cast<Eigen::Index>(jj)) = st;
        out.du_dc(i, static_cast<Eigen::Index>(jj)) = sc;
      }
      out.u(period, static_cast<Eigen::Index>(jj)) = out.u(0, static_cast<Eigen::Index>(jj));
      out.du_dtheta(period, static_cast<Eigen::Index>(jj)) = out.du_dtheta(0, static_cast<Eigen::Index>(jj));
      out.du_dc(period, static_cast<Eigen::Index>(jj)) = out.du_dc(0, static_cast<Eigen::Index>(jj));
    });

    double err = 0.0, slope = std::numeric_limits<double>::infinity();
    for (Eigen::Index jj = 0; jj < mcols; ++jj) {
      const Eigen::Index j = out_cols[static_cast<std::size_t>(jj)];
      for (Eigen::Index i = 0; i < n; ++i) {
        err = std::max({err, std::abs(out.u(i, jj) - grid.u(i, j)), std::abs(out.du_dtheta(i, jj) - grid.du_dtheta(i, j)),
                        std::abs(out.du_dc(i, jj) - grid.du_dc(i, j))});
        if (i + 1 < n) slope = std::min(slope, 1.0 + (out.du_dc(i + 1, jj) - out.du_dc(i, jj)) / ht);
      }
    }
    fam.c1_errors[e] = err;
    fam.min_monotone_slope[e] = slope;
    fam.u_eps_grids[e] = std::move(out);
  }
  return fam;
}

MonotoneConvolution monotone_convolution_check(const std::function<double(double)>& g, double eps, const Interval& range,
                                                int samples) {
  if (!(eps > 0.0) || samples < 2) throw ArgumentError("monotone_convolution_check: need eps > 0 and 2 samples");
  const int panels = 400;
  auto bump = [eps](double s) {
    const double z2 = (s / eps) * (s / eps);
    return z2 < 1.0 ? std::exp(-1.0 / (1.0 - z2)) : 0.0;
  };
  const double mass = numerics::simpson<double>(bump, -eps, eps, panels);
  auto smoothed = [&](double c) {
    return numerics::simpson<double>([&](double s) { return g(c - s) * bump(s); }, -eps, eps, panels) / mass;
  };
  MonotoneConvolution out;
  out.samples = samples;
  out.min_increment = std::numeric_limits<double>::infinity();
  double prev = smoothed(range.lo);
  for (int k = 1; k < samples; ++k) {
    const double cur = smoothed(range.lo + range.width() * k / (samples - 1));
    out.min_increment = std::min(out.min_increment, cur - prev);
    prev = cur;
  }
  out.increasing = out.min_increment > 0.0;
  return out;
}

void write_straightening_csv(const StraighteningMap& phi, const Interval& window, int nx, int nc, std::ostream& out) {
  csv::write_header(out, {"x", "c", "theta", "r"});
  for (int j = 0; j < nc; ++j) {
    const double c = nc == 1 ? window.lo : window.lo + window.width() * j / (nc - 1);
    for (int i = 0; i < nx; ++i) {
      const double x = static_cast<double>(i) / nx;
      const LiftPoint p = phi.forward(LiftPoint(x, c));
      csv::write_row(out, {x, c, p.x(), p.y()});
    }
  }
}

void write_mollified_csv(const MollifiedFamily& family, std::ostream& out) {
  csv::write_header(out, {"epsilon", "c1_error"});
  for (std::size_t e = 0; e < family.epsilon_values.size(); ++e)
    csv::write_row(out, {family.epsilon_values[e], family.c1_errors[e]});
}

}  // namespace twistlab
