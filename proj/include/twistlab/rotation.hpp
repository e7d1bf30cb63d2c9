#ifndef TWISTLAB_ROTATION_HPP
#define TWISTLAB_ROTATION_HPP

#include <functional>
#include <iosfwd>
#include <vector>

#include "twistlab/core_maps.hpp"
#include "twistlab/foliation.hpp"

namespace twistlab {

/// Degree-one lift of a circle homeomorphism: g(x + 1) = g(x) + 1.
/// `shift` is the integer that was subtracted to put g(0) in [0, 1); the
/// unnormalized lift is g + shift.
struct CircleMapLift {
  std::function<double(double)> g;
  long shift = 0;

  double operator()(double x) const { return g(x); }
};

/// Inverse lift by bracketed bisection on g(x) = y.
CircleMapLift circle_inverse(const CircleMapLift& g);

struct CircleCheck {
  double degree_defect = 0.0;  // max |g(x+1) - g(x) - 1|
  double min_increment = 0.0;  // min g(x_{i+1}) - g(x_i) over sorted samples
};
CircleCheck check_circle_lift(const CircleMapLift& g, int samples = 256);

struct ProjectionOptions {
  double invariance_tolerance = 1e-8;
  int invariance_samples = 64;
  bool normalize = true;  // g(0) in [0, 1)
};

/// theta -> first coordinate of F(theta, eta_c(theta)). Throws
/// NotInvariantError if the image of the leaf leaves the leaf.
CircleMapLift projected_circle_map(const TwistMapSpec& map, const FoliationSpec& fol, double c,
                                   const ProjectionOptions& options = {});

struct RotationEstimate {
  double value = 0.0;        // weighted Birkhoff estimate, kept inside the bracket
  double raw = 0.0;          // g^n(0) / n
  double lower = 0.0;        // rigorous bracket from |g^j(0) - j rho| < 1
  double upper = 0.0;
  long iterations = 0;
  long p = 0;                // simplest fraction in the bracket
  long q = 1;
  bool periodic = false;     // |g^q(0) - p| <= tol, value snapped to p/q
  double error_bound() const { return 0.5 * (upper - lower); }
};

/// Rotation number of a degree-one monotone lift from the orbit of 0.
/// Throws InsufficientDataError when n_max < 100.
RotationEstimate rotation_number(const CircleMapLift& g, long n_max = 1000000, double tol = 1e-9);

/// Semi-conjugacy h_c sampled at theta nodes, with the data needed to
/// evaluate it between nodes.
struct ConjugacyData {
  double rho = 0.0;
  Eigen::VectorXd theta_nodes;
  Eigen::VectorXd h_samples;
  double residual = 0.0;
  long orbit_length = 0;
  std::vector<long> M_counts;        // lifted orbit points of 0 in [0, theta], per node
  std::vector<double> sorted_orbit;  // orbit of 0 mod 1, sorted; empty for grid-derived data
  std::vector<double> orbit_labels;  // frac(k rho) for the point g^k(0) at the same sorted position
  bool labeled = false;              // h interpolates the labels rather than counting
  double max_increment = 0.0;        // largest h jump between adjacent nodes
  bool flagged = false;              // residual above 5/N or an atom detected

  /// Lifted evaluation h(x) = floor(x) + h(frac x). Uses the exact empirical
  /// distribution when the orbit is kept, else linear interpolation.
  double h_at(double x) const;
};

struct CdfOptions {
  double atom_threshold = 0.25;  // node-to-node mass that signals an atom
  bool keep_orbit = true;
};

/// Birkhoff CDF h(theta) = #{0 <= j < N : g^j(0) mod 1 in [0, theta)} / N.
ConjugacyData measure_cdf(const CircleMapLift& g, const Eigen::VectorXd& theta_nodes, long n,
                          const CdfOptions& options = {});

/// sup over nodes of |h(g(theta)) - h(theta) - rho| with lifted h.
double semiconjugacy_residual(const ConjugacyData& data, const CircleMapLift& g);

/// h_c = id + du/dc read off a generating grid at label c.
ConjugacyData conjugacy_from_grid(const GeneratingGrid& grid, double c, double rho);

struct RationalDensity {
  long p = 0;
  int q = 1;
  Eigen::VectorXd theta_nodes;  // n + 1 nodes, last is theta = 1
  Eigen::VectorXd torsion;      // s_q
  Eigen::VectorXd density;
  Eigen::VectorXd h;            // cumulative density, h(0) = 0, h(1) = 1
  double normalizer = 0.0;      // integral of 1/sqrt(s_q) before normalization
  double periodicity_defect = 0.0;
};

struct RationalDensityOptions {
  int samples = 512;
  double periodic_tolerance = 1e-6;
  int check_samples = 16;
};

/// Density proportional to 1/sqrt(s_q) on a leaf where F^q = id + (p, 0).
/// Throws PreconditionError if the leaf is not completely periodic and
/// TorsionSignError if s_q <= 0 somewhere.
RationalDensity rational_leaf_density(const TwistMapSpec& map, const FoliationSpec& fol, double c, int q,
                                      const RationalDensityOptions& options = {});

struct RhoProfile {
  std::vector<double> c_nodes;
  std::vector<double> rho_values;
  std::vector<double> brackets;  // half-width of the rigorous bracket per node
  double lower_lip = 0.0;
  double upper_lip = 0.0;
  bool monotone = true;
  std::size_t violation_index = 0;  // first node pair breaking monotonicity

  /// Linear interpolation of rho between nodes.
  double rho_at(double c) const;
};

/// Rotation numbers along c_nodes using the map's own lift (the integer
/// shift of the normalization is added back so the profile is continuous).
RhoProfile rho_profile(const TwistMapSpec& map, const FoliationSpec& fol, const std::vector<double>& c_nodes,
                       long n_max = 1000000, const ProjectionOptions& options = {});

void write_profile_csv(const RhoProfile& profile, std::ostream& out);  // c,rho,bracket
void write_conjugacy_csv(const ConjugacyData& data, const CircleMapLift& g, std::ostream& out);  // theta,h,residual

}  // namespace twistlab

#endif  // TWISTLAB_ROTATION_HPP
