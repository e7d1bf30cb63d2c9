#ifndef TWISTLAB_STRAIGHTEN_HPP
#define TWISTLAB_STRAIGHTEN_HPP

#include <functional>
#include <iosfwd>
#include <memory>
#include <vector>

#include "twistlab/core_maps.hpp"
#include "twistlab/foliation.hpp"
#include "twistlab/rotation.hpp"

namespace twistlab {

/// Phi(x, c) = (theta, r) with x = theta + du/dc(theta, c) and
/// r = c + du/dtheta(theta, c); it carries the horizontal line c onto the
/// leaf eta_c. Built from a grid, or from closed forms (source_grid null).
struct StraighteningMap {
  using Evaluator = std::function<LiftPoint(const LiftPoint&)>;
  Evaluator forward;  // (x, c) -> (theta, r)
  Evaluator inverse;  // (theta, r) -> (x, c)
  std::shared_ptr<const GeneratingGrid> source_grid;
  Interval c_window{-1.0, 1.0};
};

struct StraightenOptions {
  double monotonicity_tolerance = 1e-9;  // min slope of theta + du/dc regarded as zero
  bool check_c1 = true;                   // run c1_report when the grid allows it
};

/// Builds Phi from a grid. Throws NotStraightenableError naming the c-node
/// when theta -> theta + du/dc fails to increase at that node on all three
/// subsampled theta resolutions, or when c1_report finds a jump of du/dc.
StraighteningMap build_straightening(const GeneratingGrid& grid, const StraightenOptions& options = {});

struct Rect {
  double x0 = 0.0, x1 = 1.0;
  double c0 = 0.0, c1 = 1.0;
  double area() const { return (x1 - x0) * (c1 - c0); }
};

/// max over rectangles of |area(Phi(R)) / area(R) - 1|, image area by the
/// shoelace formula on `refinement` points per side.
double area_distortion(const StraighteningMap& phi, const std::vector<Rect>& rectangles, int refinement = 1024);

/// Random rectangles inside [0, 1] x window.
std::vector<Rect> random_rectangles(const Interval& window, int count, unsigned long long seed = 0);

/// sup over samples of the distance between Phi^-1 F Phi (x, c) and
/// (x + rho(c), c), angles compared mod 1.
double arnold_liouville_residual(const TwistMapSpec& map, const StraighteningMap& phi,
                                 const std::function<double(double)>& rho, const std::vector<LiftPoint>& samples);

/// Same with rho from a profile; `per_node` random angles at every profile
/// node, so no interpolation of rho is involved.
double arnold_liouville_residual(const TwistMapSpec& map, const StraighteningMap& phi, const RhoProfile& profile,
                                 int per_node, unsigned long long seed = 0);

struct MollifiedFamily {
  std::vector<double> epsilon_values;
  std::vector<GeneratingGrid> u_eps_grids;  // on the window shrunk by max epsilon
  std::vector<double> c1_errors;            // max of |U - u|, |U_theta - u_theta|, |U_c - u_c|
  std::vector<double> min_monotone_slope;   // min over the window of d/dtheta (theta + dU/dc)
};

/// Convolution with the radial bump a exp(-1 / (1 - |z|^2 / eps^2)),
/// normalized to unit discrete mass. Throws DomainError when the window
/// cannot be shrunk by the largest epsilon.
MollifiedFamily mollify(const GeneratingGrid& grid, const std::vector<double>& epsilons);

struct MonotoneConvolution {
  int samples = 0;
  double min_increment = 0.0;
  bool increasing = false;
};

/// Samples (g * v_eps)(c) on a uniform set in `range` and reports whether it
/// strictly increases.
MonotoneConvolution monotone_convolution_check(const std::function<double(double)>& g, double eps,
                                                const Interval& range, int samples);

void write_straightening_csv(const StraighteningMap& phi, const Interval& window, int nx, int nc, std::ostream& out);
void write_mollified_csv(const MollifiedFamily& family, std::ostream& out);  // epsilon,c1_error

}  // namespace twistlab

#endif  // TWISTLAB_STRAIGHTEN_HPP
