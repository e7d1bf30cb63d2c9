#ifndef TWISTLAB_GREEN_HPP
#define TWISTLAB_GREEN_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "twistlab/core_maps.hpp"
#include "twistlab/foliation.hpp"

namespace twistlab {

/// Slope of DF^k(F^-k p) (0, 1)^T for k > 0, of DF^k(F^-k p)(0, 1)^T with
/// inverse differentials along the forward orbit for k < 0. Throws
/// VerticalImageError when the pushed vertical is vertical again.
double green_slope(const TwistMapSpec& map, const LiftPoint& p, int k);

struct GreenData {
  LiftPoint base_point = LiftPoint::Zero();
  std::vector<double> s_pos;  // s_k, k = 1..n_max
  std::vector<double> s_neg;  // s_-k, k = 1..n_max
  double s_plus_estimate = 0.0;   // s_{n_max}
  double s_minus_estimate = 0.0;  // s_{-n_max}
  // Limits from a rational fit s(1/k) = (a + b/k) / (1 + d/k) through
  // k = n/4, n/2, n. Exact when DF^k acts as a shear in straightened
  // coordinates; falls back to the last term when the fit is singular.
  double s_plus_extrapolated = 0.0;
  double s_minus_extrapolated = 0.0;
  bool converged_plus = false;
  bool converged_minus = false;
  bool interleaved = true;
  std::string interleaving_violation;  // first violated inequality, empty if none
};

struct GreenOptions {
  int n_max = 200;
  double tol = 1e-9;                // convergence |s_n - s_{n-1}|
  double order_tolerance = 1e-12;   // slack in the interleaving checks
};

/// Slope sequences in both directions with their limits. Orbit escape raises
/// DivergenceError; an interleaving failure is reported, not raised.
GreenData green_limits(const TwistMapSpec& map, const LiftPoint& p, const GreenOptions& options = {});

struct SandwichViolation {
  double theta = 0.0;
  double dini_lower = 0.0;
  double dini_upper = 0.0;
  double s_minus = 0.0;
  double s_plus = 0.0;
};

struct SandwichReport {
  int samples = 0;
  double max_violation = 0.0;
  std::vector<SandwichViolation> violations;
  bool passed() const { return violations.empty(); }
};

struct SandwichOptions {
  GreenOptions green{};
  double tol = 1e-6;
  std::vector<double> windows{1e-4, 1e-5};  // Dini quotients extrapolated from the two finest
};

/// Checks s_-n <= lower Dini slope <= upper Dini slope <= s_n of the leaf
/// eta_c at `samples` uniform angles. The finite-n slopes bound the limits
/// from outside, so an invariant leaf always passes.
SandwichReport sandwich_check(const TwistMapSpec& map, const FoliationSpec& fol, double c, int samples,
                              const SandwichOptions& options = {});

struct CriterionEvidence {
  std::vector<double> forward;   // |first component of DF^n(p) v|, n = 0..n_max
  std::vector<double> backward;  // |first component of DF^-n(p) v|
  double forward_window_min = 0.0;
  double backward_window_min = 0.0;
  bool forward_bounded = false;   // evidence v in G_-
  bool backward_bounded = false;  // evidence v in G_+
  double slope = 0.0;             // slope of v (infinite for vertical v)
  double s_minus = 0.0;
  double s_plus = 0.0;
  bool slope_matches_minus = false;  // within the spread of the second half of the slope sequence
  bool slope_matches_plus = false;
};

/// The window is n in [n_max/2, n_max]; "bounded" means the window minimum
/// is at most 10 |v|.
CriterionEvidence dynamical_criterion(const TwistMapSpec& map, const LiftPoint& p, const Eigen::Vector2d& v,
                                      int n_max = 200);

void write_green_csv(const GreenData& data, std::ostream& out);  // k,s_k,s_minus_k

}  // namespace twistlab

#endif  // TWISTLAB_GREEN_HPP
