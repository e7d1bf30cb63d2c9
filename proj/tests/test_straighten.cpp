#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "twistlab/gallery.hpp"
#include "twistlab/straighten.hpp"

using namespace twistlab;

namespace {

// eta_c = c + a c sin(2 pi theta): smooth, mean c, u = a c (1 - cos 2 pi theta) / (2 pi)
FoliationSpec wavy(double a) {
  FoliationSpec f;
  f.name = "wavy";
  f.domain = {-2.0, 2.0};
  f.leaf = [a](double t, double c) { return c + a * c * std::sin(2 * oracle::pi * t); };
  f.d_theta = [a](double t, double c) { return 2 * oracle::pi * a * c * std::cos(2 * oracle::pi * t); };
  f.d_c = [a](double t, double) { return 1.0 + a * std::sin(2 * oracle::pi * t); };
  return f;
}

// eta_c = c + 0.05 cos(c) sin(2 pi theta)
FoliationSpec bent() {
  FoliationSpec f;
  f.name = "bent";
  f.domain = {-3.0, 3.0};
  f.leaf = [](double t, double c) { return c + 0.05 * std::cos(c) * std::sin(2 * oracle::pi * t); };
  return f;
}

}  // namespace

TEST_CASE("zero generating function straightens to the identity") {
  const GeneratingGrid g = build_generating_function(standard_foliation(), 65, 33, {-1.0, 1.0});
  const StraighteningMap phi = build_straightening(g);
  for (const LiftPoint p : {LiftPoint(0.1, 0.2), LiftPoint(0.77, -0.9), LiftPoint(0.5, 0.0)}) {
    CHECK((phi.forward(p) - p).norm() < 1e-12);
    CHECK((phi.inverse(p) - p).norm() < 1e-12);
  }
  CHECK(area_distortion(phi, random_rectangles(g.window(), 10, 1), 64) < 1e-12);
}

TEST_CASE("horizontal lines land on leaves") {
  const double a = 0.01;
  const FoliationSpec fol = wavy(a);
  const GeneratingGrid g = build_generating_function(fol, 513, 65, {-1.0, 1.0});
  const StraighteningMap phi = build_straightening(g);
  const double c = 0.5;
  for (double t : {0.0, 0.13, 0.5, 0.91}) {
    // x = theta + du/dc at the leaf c
    const double x = t + a * (1.0 - std::cos(2 * oracle::pi * t)) / (2 * oracle::pi);
    const LiftPoint img = phi.forward(LiftPoint(x, c));
    CHECK(std::abs(img.x() - t) < 1e-6);
    CHECK(std::abs(img.y() - fol.leaf(img.x(), c)) < 1e-6);
    CHECK((phi.inverse(img) - LiftPoint(x, c)).norm() < 1e-9);
  }
}

TEST_CASE("area distortion") {
  StraighteningMap shear;
  shear.forward = [](const LiftPoint& p) { return LiftPoint(p.x() + 0.3 * p.y(), p.y()); };
  shear.inverse = [](const LiftPoint& p) { return LiftPoint(p.x() - 0.3 * p.y(), p.y()); };
  CHECK(area_distortion(shear, {{0.1, 0.4, -0.2, 0.5}, {0.0, 1.0, 0.0, 1.0}}, 16) < 1e-12);

  StraighteningMap stretch;
  stretch.forward = [](const LiftPoint& p) { return LiftPoint(2.0 * p.x(), p.y()); };
  CHECK(area_distortion(stretch, {{0.1, 0.4, -0.2, 0.5}}, 16) == doctest::Approx(1.0));

  const GeneratingGrid g = build_generating_function(bent(), 257, 129, {-1.0, 1.0});
  const StraighteningMap phi = build_straightening(g);
  CHECK(area_distortion(phi, random_rectangles(g.window(), 20, 3), 1024) <= 1e-4);

  const auto rects = random_rectangles({-0.5, 0.25}, 50, 9);
  CHECK(rects.size() == 50);
  for (const Rect& r : rects) {
    CHECK(r.x0 >= 0.0);
    CHECK(r.x1 <= 1.0);
    CHECK(r.c0 >= -0.5);
    CHECK(r.c1 <= 0.25);
    CHECK(r.area() > 0.0);
  }
}

TEST_CASE("non-C1 generating functions are rejected") {
  const StrangeTwistMap s = strange_twist_map(default_strange_params());
  const FoliationSpec fol = strange_foliation(s.params);
  for (const Interval w : {Interval{-0.5, 0.5}, Interval{-0.1, 0.3}, Interval{-1.0, 0.05}}) {
    const GeneratingGrid g = build_generating_function(fol, 129, 65, w);
    CHECK_THROWS_AS(build_straightening(g), NotStraightenableError);
  }
  CHECK_NOTHROW(build_straightening(build_generating_function(fol, 129, 65, {0.05, 1.0})));

  // the plateau family limit has h_0' = 0 on a plateau at c = 0
  const AppendixAFamily fam = appendix_a_family();
  const GeneratingGrid ga = build_generating_function(fam.foliation(0), 257, 65, {-0.5, 0.5});
  try {
    build_straightening(ga);
    FAIL("expected NotStraightenableError");
  } catch (const NotStraightenableError& e) {
    CHECK(std::abs(e.c_node()) <= 2 * ga.c_step());
  }
}

TEST_CASE("Arnold-Liouville residuals") {
  const auto fam = integrable_family(linear_rho(), shear_conjugator());
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ux(0.0, 1.0), uc(-0.5, 0.5);
  std::vector<LiftPoint> samples;
  for (int i = 0; i < 200; ++i) samples.emplace_back(ux(rng), uc(rng));
  const auto rho = [](double c) { return c; };
  CHECK(arnold_liouville_residual(fam.map, fam.phi, rho, samples) <= 1e-8);

  const StraighteningMap numeric = build_straightening(build_generating_function(fam.foliation, 257, 257, {-0.5, 0.5}));
  CHECK(arnold_liouville_residual(fam.map, numeric, rho, samples) <= 1e-3);

  // a wrong rotation number is caught
  CHECK(arnold_liouville_residual(fam.map, fam.phi, [](double c) { return c + 0.01; }, samples) ==
        doctest::Approx(0.01).epsilon(1e-6));

  const auto cubic = integrable_family(cubic_rho(0.1));
  RhoProfile prof;
  prof.c_nodes = {-0.4, 0.0, 0.3};
  for (double c : prof.c_nodes) prof.rho_values.push_back(c + 0.1 * c * c * c);
  CHECK(arnold_liouville_residual(cubic.map, cubic.phi, prof, 16, 2) <= 1e-12);
}

TEST_CASE("mollification") {
  const auto errors = [](const FoliationSpec& fol) {
    return mollify(build_generating_function(fol, 257, 257, {-1.0, 1.0}), {0.2, 0.1, 0.05, 0.025});
  };
  const MollifiedFamily flat = errors(standard_foliation());
  for (double e : flat.c1_errors) CHECK(e < 1e-12);

  const MollifiedFamily smooth = errors(bent());
  REQUIRE(smooth.c1_errors.size() == 4);
  CHECK(smooth.epsilon_values == std::vector<double>{0.2, 0.1, 0.05, 0.025});
  for (std::size_t k = 1; k < 4; ++k) {
    CHECK(smooth.c1_errors[k] < smooth.c1_errors[k - 1]);
    // second order for a symmetric kernel, so halving eps at least halves the error
    CHECK(smooth.c1_errors[k] <= 0.5 * smooth.c1_errors[k - 1]);
  }
  for (double m : smooth.min_monotone_slope) CHECK(m > 0.0);

  const GeneratingGrid narrow = build_generating_function(bent(), 65, 17, {-0.1, 0.1});
  CHECK_THROWS_AS(mollify(narrow, {0.2}), DomainError);
  CHECK_THROWS_AS(mollify(narrow, {}), ArgumentError);
}

TEST_CASE("monotone convolution") {
  const auto g = [](double c) { return c + 0.5 * std::atan(c); };
  const MonotoneConvolution ok = monotone_convolution_check(g, 0.1, {-1.0, 1.0}, 10000);
  CHECK(ok.samples == 10000);
  CHECK(ok.increasing);
  CHECK(ok.min_increment > 0.0);

  // the convolution of an increasing step is still increasing where the kernel sees it
  const auto step = [](double c) { return c < 0.0 ? c : c + 1.0; };
  CHECK(monotone_convolution_check(step, 0.05, {-0.5, 0.5}, 2000).increasing);

  const auto wave = [](double c) { return std::sin(4.0 * c); };
  CHECK_FALSE(monotone_convolution_check(wave, 0.05, {-1.0, 1.0}, 1000).increasing);
}

TEST_CASE("straightening csv") {
  const GeneratingGrid g = build_generating_function(standard_foliation(), 33, 9, {-1.0, 1.0});
  std::ostringstream out;
  write_straightening_csv(build_straightening(g), g.window(), 5, 3, out);
  std::istringstream lines(out.str());
  std::string header;
  std::getline(lines, header);
  int rows = 0;
  for (std::string line; std::getline(lines, line);) ++rows;
  CHECK(rows == 15);
  CHECK(header.find("theta") != std::string::npos);
}
