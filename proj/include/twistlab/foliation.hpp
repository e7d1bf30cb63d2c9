#ifndef TWISTLAB_FOLIATION_HPP
#define TWISTLAB_FOLIATION_HPP

#include <functional>
#include <iosfwd>
#include <string>

#include "twistlab/common.hpp"

namespace twistlab {

/// Continuous foliation of the annulus by graphs theta -> eta_c(theta),
/// labeled so that the mean of eta_c over the circle is c.
struct FoliationSpec {
  using Field = std::function<double(double theta, double c)>;

  std::string name;
  Field leaf;
  Interval domain{-1.0, 1.0};
  Field d_theta;  // optional d(eta)/d(theta)
  Field d_c;      // optional d(eta)/dc

  double operator()(double theta, double c) const { return leaf(theta, c); }
  bool has_d_c() const { return static_cast<bool>(d_c); }
};

/// Sampled generating function u(theta, c) = int_0^theta (eta_c - c) on
/// N uniform theta nodes over [0, 1] (node N-1 is theta = 1) and M uniform
/// c nodes over a window. Matrices are N x M, column j is the c_j leaf.
struct GeneratingGrid {
  Eigen::VectorXd theta_nodes;
  Eigen::VectorXd c_nodes;
  Grid u;
  Grid du_dtheta;
  Grid du_dc;
  bool analytic_dc = false;

  Eigen::Index n_theta() const { return theta_nodes.size(); }
  Eigen::Index n_c() const { return c_nodes.size(); }
  double theta_step() const { return theta_nodes(1) - theta_nodes(0); }
  double c_step() const { return c_nodes(1) - c_nodes(0); }
  Interval window() const { return {c_nodes(0), c_nodes(n_c() - 1)}; }

  /// Bilinear interpolation of a field, periodic in theta, clamped in c.
  double interpolate(const Grid& field, double theta, double c) const;
};

struct GridOptions {
  double labeling_tolerance = 1e-6;  // allowed |mean(eta_c) - c|
};

/// Builds u by Simpson quadrature per c-node (one Simpson cell per theta
/// interval). du_dtheta comes from fourth-order periodic differences of u;
/// du_dc from quadrature of the analytic d(eta)/dc when the foliation
/// provides it, else from fourth-order differences in c. Throws
/// LabelingError if a leaf's mean departs from its label.
GeneratingGrid build_generating_function(const FoliationSpec& fol, int n_theta, int n_c, const Interval& window,
                                         const GridOptions& options = {});

struct LeafMean {
  double mean = 0.0;
  double defect = 0.0;  // mean - c
  bool mislabeled = false;
};

/// Mean of eta_c over the circle by the n-point periodic trapezoidal rule.
LeafMean leaf_mean(const FoliationSpec& fol, double c, int n, double tolerance = 1e-6);

struct C1Report {
  double max_jump = 0.0;  // finest level
  double theta_at = 0.0;
  double c_at = 0.0;
  double level_jumps[3] = {0.0, 0.0, 0.0};  // c-strides 4, 2, 1
  double ratios[2] = {0.0, 0.0};            // jump(stride 2)/jump(4), jump(1)/jump(2)
  bool discontinuity = false;
};

/// Modulus-of-continuity check of du/dc in the c direction. The c-derivative
/// is taken as the secant slope of u on each c cell and the jump at a cell is
/// the difference between the slopes of its two neighbours, so a kink
/// anywhere in the cell registers its full size. Three levels come from
/// subsampling the grid; a jump whose ratio stays >= 0.8 over both
/// refinements is flagged as a discontinuity of du/dc.
C1Report c1_report(const GeneratingGrid& grid);

struct HolderFit {
  double exponent = 0.0;
  double constant = 0.0;
  double r_squared = 0.0;
  int pair_count = 0;
  double sup_refinement_change = 0.0;  // max relative change of sup_theta between the two finest resolutions
};

struct HolderOptions {
  double min_gap = 1e-6;
  double max_gap = 1e-1;
  int theta_resolution = 1024;  // finest of three nested resolutions
  unsigned long long seed = 0;
};

/// Least-squares slope of log sup_theta |eta_c' - eta_c| against log|c' - c|
/// over pairs with log-uniform gaps.
HolderFit holder_fit(const FoliationSpec& fol, const Interval& window, int pair_count,
                     const HolderOptions& options = {});

struct LipschitzFit {
  double K_upper = 0.0;  // max |eta_c1 - eta_c2| / |c1 - c2|
  double K_lower = 0.0;  // min of the same quotient
  double k_minus = 0.0;  // min sampled d^2u/(dtheta dc)
  double k_plus = 0.0;   // max sampled d^2u/(dtheta dc)
  bool bilipschitz = true;
  bool mixed_partial_condition = true;  // k_minus > -1
  double theta_at_lower = 0.0;
  double c_at_lower = 0.0;
};

struct LipschitzOptions {
  int n_theta = 256;
  int n_c = 65;
  double not_bilipschitz_threshold = 1e-3;
};

LipschitzFit bilipschitz_fit(const FoliationSpec& fol, const Interval& window, const LipschitzOptions& options = {});

struct MixedPartialsReport {
  double max_discrepancy = 0.0;
  double theta_at = 0.0;
  double c_at = 0.0;
  Eigen::Index worst_row = 0;
  double max_outside_band = 0.0;  // rows more than two nodes from worst_row
  bool used_analytic = false;
};

/// Compares d/dtheta(du/dc) with d/dc(du/dtheta). With analytic du/dc on the
/// grid the two routes are independent; otherwise `fol` must be supplied and
/// a second grid staggered by half a c-cell provides the comparison.
MixedPartialsReport mixed_partials_check(const GeneratingGrid& grid, const FoliationSpec* fol = nullptr);

/// Normalized area measure of the vertical strip [theta1, theta2] between
/// leaves c < c2.
double area_between(const FoliationSpec& fol, double c, double c2, double theta1, double theta2, int panels = 4096);

/// CSV with header theta,c,u,du_dtheta,du_dc.
void write_grid_csv(const GeneratingGrid& grid, std::ostream& out);

/// Standard foliation eta_c = c.
FoliationSpec standard_foliation();

}  // namespace twistlab

#endif  // TWISTLAB_FOLIATION_HPP
