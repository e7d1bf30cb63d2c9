#ifndef TWISTLAB_GALLERY_HPP
#define TWISTLAB_GALLERY_HPP

#include <functional>
#include <optional>
#include <vector>

#include "twistlab/core_maps.hpp"
#include "twistlab/foliation.hpp"
#include "twistlab/straighten.hpp"

namespace twistlab {

/// Scalar function with its first two derivatives.
struct Profile {
  std::function<double(double)> f;
  std::function<double(double)> df;
  std::function<double(double)> ddf;
};

// ---- integrable and conjugated-integrable families ----

/// Exact symplectic diffeomorphism of the annulus used to conjugate the
/// integrable map. `preserves_means` says that the image of the line r = s
/// has mean s, so no relabeling is needed.
struct Conjugator {
  TwistMapSpec::Evaluator forward;
  TwistMapSpec::Evaluator inverse;
  TwistMapSpec::Differential differential;
  bool preserves_means = false;
};

/// Psi(theta, r) = (theta + k(r + g(theta)), r + g(theta)) with
/// g = a sin(2 pi theta) / (2 pi), k(s) = b sin(2 pi s) / (2 pi).
Conjugator shear_conjugator(double a = 0.15, double b = 0.15);

/// Vertical shear (theta, r + g(theta)) for an arbitrary periodic g with
/// derivative dg.
Conjugator vertical_shear(std::function<double(double)> g, std::function<double(double)> dg);

struct IntegrableFamily {
  TwistMapSpec map;
  FoliationSpec foliation;
  Profile rho;
  std::optional<Conjugator> conjugator;
  /// Closed-form straightening Phi = Psi composed with the relabeling (the
  /// identity without conjugator).
  StraighteningMap phi;
};

/// Map Psi f_rho Psi^-1 with f_rho(x, r) = (x + rho(r), r) and foliation the
/// Psi-image of the horizontal lines labeled by their means. Throws
/// ArgumentError if rho is not increasing on [-4, 4].
IntegrableFamily integrable_family(const Profile& rho, const std::optional<Conjugator>& conjugator = std::nullopt);

Profile linear_rho(double slope = 1.0);
Profile cubic_rho(double cubic = 0.1);  // r + cubic r^3

// ---- strange foliation and its twist map ----

struct StrangeParams {
  /// Smooth extensions of epsilon restricted to c >= 0 and to c <= 0.
  Profile epsilon_plus;
  Profile epsilon_minus;
  double M1 = 0.0;
  double M2 = 1.0;
  double M = 0.0;  // rho(t) = sign(t) t^2 exp(M |t|)

  double epsilon(double c) const { return c >= 0.0 ? epsilon_plus.f(c) : epsilon_minus.f(c); }
  double epsilon_derivative(double c) const { return c >= 0.0 ? epsilon_plus.df(c) : epsilon_minus.df(c); }
  Profile rho() const;
};

/// epsilon(c) = scale |c| exp(-c^2), default scale 1/(8 pi); M from m_constants.
StrangeParams default_strange_params(double scale = 1.0 / (8.0 * kPi));
/// epsilon(c) = slope |c|.
StrangeParams abs_strange_params(double slope = 1.0 / (8.0 * kPi));

/// Samples difference quotients of epsilon on [-range, range] and throws
/// ParameterError if they exceed 1/(4 pi) or epsilon(0) != 0.
void validate_strange_params(const StrangeParams& params, double range = 4.0);

/// eta_c = c + epsilon(c) cos(2 pi theta).
FoliationSpec strange_foliation(const StrangeParams& params);

/// Straightening of one half: with a = epsilon'(c),
/// x = h + a sin(2 pi h) / (2 pi) defines h(x, c) and
/// Phi(x, c) = (h, c + epsilon(c) cos(2 pi h)).
struct HalfStraightening {
  Profile epsilon;
  double h(double x, double c) const;
  double h_x(double x, double c) const;
  double h_c(double x, double c) const;
  double h_xx(double x, double c) const;
  double h_cx(double x, double c) const;
  LiftPoint forward(const LiftPoint& xc) const;
  LiftPoint inverse(const LiftPoint& theta_r) const;
  Jacobian2 differential(const LiftPoint& xc) const;
};

struct StrangeTwistMap {
  StrangeParams params;
  HalfStraightening plus;
  HalfStraightening minus;
  Profile rho;
  TwistMapSpec map;  // glued: Phi+ f_rho (Phi+)^-1 for r >= 0, Phi- ... for r < 0

  const HalfStraightening& half(int sign) const { return sign >= 0 ? plus : minus; }
  LiftPoint f_rho(const LiftPoint& xc) const { return {xc.x() + rho.f(xc.y()), xc.y()}; }
  LiftPoint f_rho_inverse(const LiftPoint& xc) const { return {xc.x() - rho.f(xc.y()), xc.y()}; }
  /// Phi+ on r >= 0 and Phi- on r < 0, as a straightening map.
  StraighteningMap phi(int sign) const;
};

StrangeTwistMap strange_twist_map(const StrangeParams& params);

struct MConstants {
  double M1 = 0.0;
  double M2 = 1.0;
  double M1_coarse = 0.0;  // at half the resolution
  double M2_coarse = 1.0;
  double relative_change() const;
};

/// M1 = |h_cx| + |1/h_x| |h_xx| |h_c| (sup norms) and M2 = min h_x over
/// x in [0, 1], c in `window`, by grid extremization at n and n/2 points per
/// side. Throws ConstructionError when M2 <= 0.
MConstants m_constants(const HalfStraightening& phi, const Interval& window, int n = 256);

// ---- plateau family ----

struct AppendixAParams {
  double plateau_halfwidth = 0.1;  // gamma' = -1 on [1/2 - w, 1/2 + w]
  double blend_width = 0.2;        // smoothstep transition width
};

/// gamma(theta) with gamma(0) = 0, its derivative profile, and zeta(c),
/// with the approximants gamma_n = (1 - 1/n) gamma and
/// zeta_n(c) = c/2 + (1/2 - 1/n) atan(c). n = 0 selects the limit.
struct AppendixAFamily {
  AppendixAParams params;
  double A = 0.0;  // height of the smoothstep, 1 / (1 - 2 w - blend)

  double gamma(double theta, int n = 0) const;
  double gamma_prime(double theta, int n = 0) const;
  double gamma_second(double theta, int n = 0) const;
  double zeta(double c, int n = 0) const;
  double zeta_prime(double c, int n = 0) const;
  double zeta_second(double c, int n = 0) const;

  FoliationSpec foliation(int n = 0) const;
  /// h_c(theta) = theta + gamma(theta) zeta'(c); h_0' vanishes on the plateau.
  double h(double theta, double c, int n = 0) const;
  /// H_n = G_n F_n^-1: (theta, r) -> (theta + gamma_n(theta) zeta_n'(c), c)
  /// where r = c + zeta_n(c) gamma_n'(theta).
  LiftPoint H(const LiftPoint& theta_r, int n = 0) const;
  Jacobian2 H_differential(const LiftPoint& theta_r, int n = 0) const;
  /// Solves h_c(theta) = x; h_c must be increasing, so n >= 1 or c != 0.
  LiftPoint H_inverse(const LiftPoint& xc, int n = 0) const;
  /// H_n^-1 as the straightening of foliation(n); needs n >= 2.
  StraighteningMap straightening(int n) const;
};

AppendixAFamily appendix_a_family(const AppendixAParams& params = {});

/// sup over a uniform grid of [0, 1] x window of |H_n - H_2n|.
/// H_n^-1 f_rho H_n, preserving the leaves of foliation(n); needs n >= 2.
TwistMapSpec appendix_a_map(const AppendixAFamily& family, int n, const Profile& rho);

double appendix_a_cauchy_gap(const AppendixAFamily& family, int n, const Interval& window, int samples = 64);

}  // namespace twistlab

#endif  // TWISTLAB_GALLERY_HPP
