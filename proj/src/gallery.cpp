#include "twistlab/gallery.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "twistlab/numerics.hpp"

namespace twistlab {

namespace {

double sgn(double t) { return (t > 0.0) - (t < 0.0); }

Jacobian2 unimodular_inverse(const Jacobian2& m) {
  Jacobian2 inv;
  inv << m(1, 1), -m(0, 1), -m(1, 0), m(0, 0);
  return inv / m.determinant();
}

Profile negated(const Profile& p) {
  return {[f = p.f](double c) { return -f(c); }, [f = p.df](double c) { return -f(c); },
          [f = p.ddf](double c) { return -f(c); }};
}

}  // namespace

// ---- integrable families ----

Conjugator shear_conjugator(double a, double b) {
  auto g = [a](double t) { return a * std::sin(kTwoPi * t) / kTwoPi; };
  auto dg = [a](double t) { return a * std::cos(kTwoPi * t); };
  auto k = [b](double s) { return b * std::sin(kTwoPi * s) / kTwoPi; };
  auto dk = [b](double s) { return b * std::cos(kTwoPi * s); };
  Conjugator psi;
  psi.forward = [g, k](const LiftPoint& p) {
    const double w = p.y() + g(p.x());
    return LiftPoint(p.x() + k(w), w);
  };
  psi.inverse = [g, k](const LiftPoint& q) {
    const double theta = q.x() - k(q.y());
    return LiftPoint(theta, q.y() - g(theta));
  };
  psi.differential = [g, dg, dk](const LiftPoint& p) {
    const double w = p.y() + g(p.x());
    Jacobian2 m;
    m << 1.0 + dk(w) * dg(p.x()), dk(w), dg(p.x()), 1.0;
    return m;
  };
  psi.preserves_means = true;
  return psi;
}

Conjugator vertical_shear(std::function<double(double)> g, std::function<double(double)> dg) {
  Conjugator psi;
  psi.forward = [g](const LiftPoint& p) { return LiftPoint(p.x(), p.y() + g(p.x())); };
  psi.inverse = [g](const LiftPoint& q) { return LiftPoint(q.x(), q.y() - g(q.x())); };
  psi.differential = [dg](const LiftPoint& p) {
    Jacobian2 m;
    m << 1.0, 0.0, dg(p.x()), 1.0;
    return m;
  };
  return psi;
}

Profile linear_rho(double slope) {
  return {[slope](double r) { return slope * r; }, [slope](double) { return slope; }, [](double) { return 0.0; }};
}

Profile cubic_rho(double cubic) {
  return {[cubic](double r) { return r + cubic * r * r * r; }, [cubic](double r) { return 1.0 + 3.0 * cubic * r * r; },
          [cubic](double r) { return 6.0 * cubic * r; }};
}

IntegrableFamily integrable_family(const Profile& rho, const std::optional<Conjugator>& conjugator) {
  for (int i = 0; i < 800; ++i) {
    const double r0 = -4.0 + 8.0 * i / 800, r1 = -4.0 + 8.0 * (i + 1) / 800;
    if (!(rho.f(r1) > rho.f(r0))) throw ArgumentError("integrable_family: rho must be increasing");
  }
  IntegrableFamily fam;
  fam.rho = rho;
  fam.conjugator = conjugator;

  auto f_rho = [rho](const LiftPoint& p) { return LiftPoint(p.x() + rho.f(p.y()), p.y()); };
  auto f_rho_inv = [rho](const LiftPoint& p) { return LiftPoint(p.x() - rho.f(p.y()), p.y()); };
  auto shear = [rho](double r) {
    Jacobian2 m;
    m << 1.0, rho.df(r), 0.0, 1.0;
    return m;
  };

  fam.map.declared_strip = {0.0, 1.0, -2.0, 2.0};
  if (!conjugator) {
    fam.map.name = "integrable";
    fam.map.forward = f_rho;
    fam.map.inverse = f_rho_inv;
    fam.map.differential = [shear](const LiftPoint& p) { return shear(p.y()); };
    fam.foliation = standard_foliation();
    fam.phi.forward = [](const LiftPoint& p) { return p; };
    fam.phi.inverse = [](const LiftPoint& p) { return p; };
    fam.phi.c_window = {-4.0, 4.0};
    return fam;
  }

  const Conjugator psi = *conjugator;
  fam.map.name = "conjugated-integrable";
  fam.map.forward = [psi, f_rho](const LiftPoint& p) { return psi.forward(f_rho(psi.inverse(p))); };
  fam.map.inverse = [psi, f_rho_inv](const LiftPoint& p) { return psi.forward(f_rho_inv(psi.inverse(p))); };
  fam.map.differential = [psi, f_rho, shear](const LiftPoint& p) {
    const LiftPoint q = psi.inverse(p);
    return Jacobian2(psi.differential(f_rho(q)) * shear(q.y()) * unimodular_inverse(psi.differential(q)));
  };

  // label of the image of r = s is its mean; s(c) inverts it
  auto mean_of = [psi](double s) {
    return numerics::periodic_mean<double>(
        [&](double x) { return psi.forward(LiftPoint(x, s)).y() * psi.differential(LiftPoint(x, s))(0, 0); }, 256);
  };
  std::function<double(double)> level;
  std::function<double(double)> label;
  if (psi.preserves_means) {
    level = [](double c) { return c; };
    label = [](double s) { return s; };
  } else {
    label = mean_of;
    level = [mean_of](double c) {
      auto dmean = [&](double s) { return (mean_of(s + 1e-6) - mean_of(s - 1e-6)) / 2e-6; };
      return numerics::solve_increasing<double>(mean_of, dmean, c, c, 1.0);
    };
  }
  // x with Psi_1(x, s) = theta
  auto foot = [psi](double theta, double s) {
    return numerics::solve_increasing<double>([&](double x) { return psi.forward(LiftPoint(x, s)).x(); },
                                              [&](double x) { return psi.differential(LiftPoint(x, s))(0, 0); }, theta,
                                              theta, 0.5);
  };

  fam.foliation.name = "conjugated-integrable";
  fam.foliation.domain = {-4.0, 4.0};
  fam.foliation.leaf = [psi, foot, level](double theta, double c) {
    const double s = level(c);
    return psi.forward(LiftPoint(foot(theta, s), s)).y();
  };
  fam.foliation.d_theta = [psi, foot, level](double theta, double c) {
    const double s = level(c);
    const Jacobian2 d = psi.differential(LiftPoint(foot(theta, s), s));
    return d(1, 0) / d(0, 0);
  };
  if (psi.preserves_means) {
    fam.foliation.d_c = [psi, foot](double theta, double c) {
      const Jacobian2 d = psi.differential(LiftPoint(foot(theta, c), c));
      return d(1, 1) - d(1, 0) * d(0, 1) / d(0, 0);
    };
  }
  fam.phi.forward = [psi, level](const LiftPoint& p) { return psi.forward(LiftPoint(p.x(), level(p.y()))); };
  fam.phi.inverse = [psi, label](const LiftPoint& q) {
    const LiftPoint p = psi.inverse(q);
    return LiftPoint(p.x(), label(p.y()));
  };
  fam.phi.c_window = {-4.0, 4.0};
  return fam;
}

// ---- strange foliation ----

Profile StrangeParams::rho() const {
  const double m = M;
  return {[m](double t) { return sgn(t) * t * t * std::exp(m * std::abs(t)); },
          [m](double t) { return (2.0 * std::abs(t) + m * t * t) * std::exp(m * std::abs(t)); },
          [m](double t) {
            const double a = std::abs(t);
            return sgn(t) * (2.0 + 4.0 * m * a + m * m * a * a) * std::exp(m * a);
          }};
}

namespace {

void set_twist_constants(StrangeParams& p) {
  const MConstants plus = m_constants(HalfStraightening{p.epsilon_plus}, {0.0, 4.0});
  const MConstants minus = m_constants(HalfStraightening{p.epsilon_minus}, {-4.0, 0.0});
  p.M1 = std::max(plus.M1, minus.M1);
  p.M2 = std::min(plus.M2, minus.M2);
  p.M = 2.0 * p.M1 / p.M2;
}

}  // namespace

StrangeParams default_strange_params(double scale) {
  StrangeParams p;
  p.epsilon_plus = {[scale](double c) { return scale * c * std::exp(-c * c); },
                    [scale](double c) { return scale * (1.0 - 2.0 * c * c) * std::exp(-c * c); },
                    [scale](double c) { return scale * (4.0 * c * c * c - 6.0 * c) * std::exp(-c * c); }};
  p.epsilon_minus = negated(p.epsilon_plus);
  set_twist_constants(p);
  return p;
}

StrangeParams abs_strange_params(double slope) {
  StrangeParams p;
  p.epsilon_plus = {[slope](double c) { return slope * c; }, [slope](double) { return slope; }, [](double) { return 0.0; }};
  p.epsilon_minus = negated(p.epsilon_plus);
  set_twist_constants(p);
  return p;
}

void validate_strange_params(const StrangeParams& params, double range) {
  if (params.epsilon(0.0) != 0.0) throw ParameterError("strange foliation: epsilon(0) must vanish");
  const double bound = 1.0 / (4.0 * kPi);
  const int n = 4000;
  for (int i = 0; i < n; ++i) {
    const double c0 = -range + 2.0 * range * i / n, c1 = -range + 2.0 * range * (i + 1) / n;
    const double q = std::abs(params.epsilon(c1) - params.epsilon(c0)) / (c1 - c0);
    if (q > bound * (1.0 + 1e-12)) {
      std::ostringstream msg;
      msg << "strange foliation: epsilon has difference quotient " << q << " > 1/(4 pi) near c = " << c0;
      throw ParameterError(msg.str());
    }
  }
  if (!(params.M2 > 0.0)) throw ParameterError("strange foliation: M2 must be positive");
}

FoliationSpec strange_foliation(const StrangeParams& params) {
  validate_strange_params(params);
  FoliationSpec f;
  f.name = "strange";
  f.domain = {-10.0, 10.0};
  f.leaf = [params](double t, double c) { return c + params.epsilon(c) * std::cos(kTwoPi * t); };
  f.d_theta = [params](double t, double c) { return -kTwoPi * params.epsilon(c) * std::sin(kTwoPi * t); };
  f.d_c = [params](double t, double c) { return 1.0 + params.epsilon_derivative(c) * std::cos(kTwoPi * t); };
  return f;
}

double HalfStraightening::h(double x, double c) const {
  const double a = epsilon.df(c);
  return numerics::solve_increasing<double>([a](double t) { return t + a * std::sin(kTwoPi * t) / kTwoPi; },
                                            [a](double t) { return 1.0 + a * std::cos(kTwoPi * t); }, x, x, 0.5);
}

double HalfStraightening::h_x(double x, double c) const {
  return 1.0 / (1.0 + epsilon.df(c) * std::cos(kTwoPi * h(x, c)));
}

double HalfStraightening::h_c(double x, double c) const {
  const double t = h(x, c);
  return -epsilon.ddf(c) * std::sin(kTwoPi * t) / kTwoPi / (1.0 + epsilon.df(c) * std::cos(kTwoPi * t));
}

double HalfStraightening::h_xx(double x, double c) const {
  const double t = h(x, c), a = epsilon.df(c);
  const double hx = 1.0 / (1.0 + a * std::cos(kTwoPi * t));
  return kTwoPi * a * std::sin(kTwoPi * t) * hx * hx * hx;
}

double HalfStraightening::h_cx(double x, double c) const {
  const double t = h(x, c), a = epsilon.df(c), da = epsilon.ddf(c);
  const double hx = 1.0 / (1.0 + a * std::cos(kTwoPi * t));
  const double hc = -da * std::sin(kTwoPi * t) / kTwoPi * hx;
  return -hx * hx * (da * std::cos(kTwoPi * t) - kTwoPi * a * std::sin(kTwoPi * t) * hc);
}

LiftPoint HalfStraightening::forward(const LiftPoint& xc) const {
  const double t = h(xc.x(), xc.y());
  return {t, xc.y() + epsilon.f(xc.y()) * std::cos(kTwoPi * t)};
}

LiftPoint HalfStraightening::inverse(const LiftPoint& tr) const {
  const double ct = std::cos(kTwoPi * tr.x());
  const double c = numerics::solve_increasing<double>([&](double s) { return s + epsilon.f(s) * ct; },
                                                      [&](double s) { return 1.0 + epsilon.df(s) * ct; }, tr.y(),
                                                      tr.y(), 0.5);
  return {tr.x() + epsilon.df(c) * std::sin(kTwoPi * tr.x()) / kTwoPi, c};
}

Jacobian2 HalfStraightening::differential(const LiftPoint& xc) const {
  const double x = xc.x(), c = xc.y();
  const double t = h(x, c), a = epsilon.df(c), da = epsilon.ddf(c);
  const double s = std::sin(kTwoPi * t), co = std::cos(kTwoPi * t);
  const double hx = 1.0 / (1.0 + a * co);
  const double hc = -da * s / kTwoPi * hx;
  const double eta_theta = -kTwoPi * epsilon.f(c) * s;
  const double eta_c = 1.0 + a * co;
  Jacobian2 m;
  m << hx, hc, eta_theta * hx, eta_theta * hc + eta_c;
  return m;
}

StraighteningMap StrangeTwistMap::phi(int sign) const {
  const HalfStraightening part = half(sign);
  StraighteningMap out;
  out.forward = [part](const LiftPoint& p) { return part.forward(p); };
  out.inverse = [part](const LiftPoint& p) { return part.inverse(p); };
  out.c_window = sign >= 0 ? Interval{0.0, 4.0} : Interval{-4.0, 0.0};
  return out;
}

StrangeTwistMap strange_twist_map(const StrangeParams& params) {
  validate_strange_params(params);
  StrangeTwistMap s;
  s.params = params;
  s.plus = HalfStraightening{params.epsilon_plus};
  s.minus = HalfStraightening{params.epsilon_minus};
  s.rho = params.rho();

  const HalfStraightening plus = s.plus, minus = s.minus;
  const Profile rho = s.rho;
  auto pick = [plus, minus](double r) -> const HalfStraightening& { return r >= 0.0 ? plus : minus; };
  s.map.name = "strange";
  s.map.declared_strip = {0.0, 1.0, -1.0, 1.0};
  s.map.forward = [pick, rho](const LiftPoint& p) {
    const HalfStraightening& phi = pick(p.y());
    const LiftPoint xc = phi.inverse(p);
    return phi.forward(LiftPoint(xc.x() + rho.f(xc.y()), xc.y()));
  };
  s.map.inverse = [pick, rho](const LiftPoint& p) {
    const HalfStraightening& phi = pick(p.y());
    const LiftPoint xc = phi.inverse(p);
    return phi.forward(LiftPoint(xc.x() - rho.f(xc.y()), xc.y()));
  };
  s.map.differential = [pick, rho](const LiftPoint& p) {
    const HalfStraightening& phi = pick(p.y());
    const LiftPoint xc = phi.inverse(p);
    Jacobian2 shear;
    shear << 1.0, rho.df(xc.y()), 0.0, 1.0;
    const LiftPoint moved(xc.x() + rho.f(xc.y()), xc.y());
    return Jacobian2(phi.differential(moved) * shear * unimodular_inverse(phi.differential(xc)));
  };
  return s;
}

double MConstants::relative_change() const {
  const double d1 = M1 > 0.0 ? std::abs(M1 - M1_coarse) / M1 : std::abs(M1_coarse);
  const double d2 = std::abs(M2 - M2_coarse) / M2;
  return std::max(d1, d2);
}

namespace {

std::pair<double, double> m_pair(const HalfStraightening& phi, const Interval& window, int n) {
  double sup_hcx = 0.0, sup_inv_hx = 0.0, sup_hxx = 0.0, sup_hc = 0.0;
  double min_hx = std::numeric_limits<double>::infinity();
  for (int j = 0; j < n; ++j) {
    const double c = window.lo + window.width() * j / (n - 1);
    for (int i = 0; i < n; ++i) {
      const double x = static_cast<double>(i) / n;
      const double hx = phi.h_x(x, c);
      min_hx = std::min(min_hx, hx);
      sup_inv_hx = std::max(sup_inv_hx, std::abs(1.0 / hx));
      sup_hcx = std::max(sup_hcx, std::abs(phi.h_cx(x, c)));
      sup_hxx = std::max(sup_hxx, std::abs(phi.h_xx(x, c)));
      sup_hc = std::max(sup_hc, std::abs(phi.h_c(x, c)));
    }
  }
  return {sup_hcx + sup_inv_hx * sup_hxx * sup_hc, min_hx};
}

}  // namespace

MConstants m_constants(const HalfStraightening& phi, const Interval& window, int n) {
  if (n < 8) throw ArgumentError("m_constants: resolution too small");
  MConstants m;
  std::tie(m.M1, m.M2) = m_pair(phi, window, n);
  std::tie(m.M1_coarse, m.M2_coarse) = m_pair(phi, window, n / 2);
  if (!(m.M2 > 0.0)) throw ConstructionError("m_constants: h is not increasing in x (M2 <= 0)");
  return m;
}

// ---- plateau family ----

namespace {

double smoothstep(double t) { return t * t * t * t * (35.0 + t * (-84.0 + t * (70.0 - 20.0 * t))); }
double smoothstep_integral(double t) { return t * t * t * t * t * (7.0 + t * (-14.0 + t * (10.0 - 2.5 * t))); }
double smoothstep_derivative(double t) { return 140.0 * t * t * t * (1.0 - t) * (1.0 - t) * (1.0 - t); }

double approx_factor(int n) { return n > 0 ? 1.0 - 1.0 / n : 1.0; }

}  // namespace

double AppendixAFamily::gamma_prime(double theta, int n) const {
  const double d = std::abs(wrap_unit(theta) - 0.5);
  const double t = std::clamp((d - params.plateau_halfwidth) / params.blend_width, 0.0, 1.0);
  return approx_factor(n) * (-1.0 + A * smoothstep(t));
}

double AppendixAFamily::gamma_second(double theta, int n) const {
  const double u = wrap_unit(theta);
  const double s = (std::abs(u - 0.5) - params.plateau_halfwidth) / params.blend_width;
  if (s <= 0.0 || s >= 1.0) return 0.0;
  return approx_factor(n) * A * smoothstep_derivative(s) * (u >= 0.5 ? 1.0 : -1.0) / params.blend_width;
}

double AppendixAFamily::gamma(double theta, int n) const {
  const double eps = params.plateau_halfwidth, w = params.blend_width;
  auto J = [eps, w](double d) {
    if (d <= eps) return 0.0;
    return w * smoothstep_integral(std::min((d - eps) / w, 1.0)) + std::max(0.0, d - eps - w);
  };
  const double t = wrap_unit(theta);
  const double I = t <= 0.5 ? J(0.5) - J(0.5 - t) : J(0.5) + J(t - 0.5);
  return approx_factor(n) * (-t + A * I);
}

double AppendixAFamily::zeta(double c, int n) const {
  const double k = n > 0 ? 0.5 - 1.0 / n : 0.5;
  return 0.5 * c + k * std::atan(c);
}

double AppendixAFamily::zeta_prime(double c, int n) const {
  const double k = n > 0 ? 0.5 - 1.0 / n : 0.5;
  return 0.5 + k / (1.0 + c * c);
}

double AppendixAFamily::zeta_second(double c, int n) const {
  const double k = n > 0 ? 0.5 - 1.0 / n : 0.5;
  return -2.0 * k * c / ((1.0 + c * c) * (1.0 + c * c));
}

FoliationSpec AppendixAFamily::foliation(int n) const {
  const AppendixAFamily fam = *this;
  FoliationSpec f;
  f.name = n > 0 ? "appendix-a-approximant" : "appendix-a";
  f.domain = {-10.0, 10.0};
  f.leaf = [fam, n](double t, double c) { return c + fam.zeta(c, n) * fam.gamma_prime(t, n); };
  f.d_theta = [fam, n](double t, double c) { return fam.zeta(c, n) * fam.gamma_second(t, n); };
  f.d_c = [fam, n](double t, double c) { return 1.0 + fam.zeta_prime(c, n) * fam.gamma_prime(t, n); };
  return f;
}

double AppendixAFamily::h(double theta, double c, int n) const { return theta + gamma(theta, n) * zeta_prime(c, n); }

LiftPoint AppendixAFamily::H(const LiftPoint& tr, int n) const {
  const double gp = gamma_prime(tr.x(), n);
  const double c = numerics::solve_increasing<double>([&](double s) { return s + zeta(s, n) * gp; },
                                                      [&](double s) { return 1.0 + zeta_prime(s, n) * gp; }, tr.y(),
                                                      tr.y(), 0.5);
  return {h(tr.x(), c, n), c};
}

Jacobian2 AppendixAFamily::H_differential(const LiftPoint& tr, int n) const {
  const LiftPoint xc = H(tr, n);
  const double theta = tr.x(), c = xc.y();
  // c is implicit in c + zeta(c) gamma'(theta) = r
  const double D = 1.0 + zeta_prime(c, n) * gamma_prime(theta, n);
  const double c_theta = -zeta(c, n) * gamma_second(theta, n) / D, c_r = 1.0 / D;
  const double g = gamma(theta, n), zpp = zeta_second(c, n);
  Jacobian2 m;
  m << 1.0 + gamma_prime(theta, n) * zeta_prime(c, n) + g * zpp * c_theta, g * zpp * c_r, c_theta, c_r;
  return m;
}

AppendixAFamily appendix_a_family(const AppendixAParams& params) {
  if (!(params.plateau_halfwidth > 0.0 && params.blend_width > 0.0 &&
        params.plateau_halfwidth + params.blend_width < 0.5))
    throw ParameterError("appendix_a_family: need plateau + blend < 1/2 with both positive");
  AppendixAFamily fam;
  fam.params = params;
  fam.A = 1.0 / (1.0 - 2.0 * params.plateau_halfwidth - params.blend_width);
  return fam;
}

LiftPoint AppendixAFamily::H_inverse(const LiftPoint& xc, int n) const {
  const double zp = zeta_prime(xc.y(), n);
  const double theta = numerics::solve_increasing<double>(
      [&](double t) { return h(t, xc.y(), n); }, [&](double t) { return 1.0 + gamma_prime(t, n) * zp; }, xc.x(), xc.x(),
      0.5);
  return LiftPoint(theta, xc.y() + zeta(xc.y(), n) * gamma_prime(theta, n));
}

StraighteningMap AppendixAFamily::straightening(int n) const {
  if (n < 2) throw ParameterError("appendix_a straightening: the approximant index must be at least 2");
  const AppendixAFamily fam = *this;
  StraighteningMap phi;
  phi.forward = [fam, n](const LiftPoint& xc) { return fam.H_inverse(xc, n); };
  phi.inverse = [fam, n](const LiftPoint& p) { return fam.H(p, n); };
  phi.c_window = {-4.0, 4.0};
  return phi;
}

TwistMapSpec appendix_a_map(const AppendixAFamily& family, int n, const Profile& rho) {
  if (n < 2) throw ParameterError("appendix_a_map: the approximant index must be at least 2");
  const AppendixAFamily fam = family;
  auto H = [fam, n](const LiftPoint& p) { return fam.H(p, n); };
  auto H_inverse = [fam, n](const LiftPoint& xc) { return fam.H_inverse(xc, n); };
  TwistMapSpec m;
  m.name = "appendix_a";
  m.declared_strip = {0.0, 1.0, -1.0, 1.0};
  m.forward = [H, H_inverse, rho](const LiftPoint& p) {
    const LiftPoint xc = H(p);
    return H_inverse(LiftPoint(xc.x() + rho.f(xc.y()), xc.y()));
  };
  m.inverse = [H, H_inverse, rho](const LiftPoint& p) {
    const LiftPoint xc = H(p);
    return H_inverse(LiftPoint(xc.x() - rho.f(xc.y()), xc.y()));
  };
  auto forward = m.forward;
  m.differential = [fam, n, rho, forward](const LiftPoint& p) {
    const LiftPoint c = fam.H(p, n);
    Jacobian2 shear;
    shear << 1.0, rho.df(c.y()), 0.0, 1.0;
    return Jacobian2(unimodular_inverse(fam.H_differential(forward(p), n)) * shear * fam.H_differential(p, n));
  };
  return m;
}

double appendix_a_cauchy_gap(const AppendixAFamily& family, int n, const Interval& window, int samples) {
  double gap = 0.0;
  for (int j = 0; j < samples; ++j) {
    const double r = window.lo + window.width() * j / (samples - 1);
    for (int i = 0; i < samples; ++i) {
      const LiftPoint p(static_cast<double>(i) / samples, r);
      gap = std::max(gap, (family.H(p, n) - family.H(p, 2 * n)).norm());
    }
  }
  return gap;
}

}  // namespace twistlab
