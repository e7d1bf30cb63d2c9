#include <doctest.h>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "twistlab/foliation.hpp"
#include "twistlab/gallery.hpp"
#include "twistlab/table.hpp"

using namespace twistlab;

namespace {

// Foliation with generating function u(theta, c) = a(c) sin(2 pi theta) / (2 pi).
FoliationSpec sine_foliation(std::function<double(double)> a, std::function<double(double)> da) {
  FoliationSpec f;
  f.name = "sine";
  f.leaf = [a](double t, double c) { return c + a(c) * std::cos(2 * oracle::pi * t); };
  f.d_theta = [a](double t, double c) { return -2 * oracle::pi * a(c) * std::sin(2 * oracle::pi * t); };
  f.d_c = [da](double t, double c) { return 1.0 + da(c) * std::cos(2 * oracle::pi * t); };
  return f;
}

// u = c^2 sin(2 pi theta)
FoliationSpec smooth_quadratic() {
  return sine_foliation([](double c) { return 2 * oracle::pi * c * c; }, [](double c) { return 4 * oracle::pi * c; });
}

double max_abs(const Grid& g) { return g.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("generating function of the standard foliation vanishes") {
  const GeneratingGrid g = build_generating_function(standard_foliation(), 33, 17, {-1.0, 1.0});
  CHECK(max_abs(g.u) == 0.0);
  CHECK(max_abs(g.du_dtheta) == 0.0);
  CHECK(max_abs(g.du_dc) == 0.0);
  CHECK(g.theta_nodes(g.n_theta() - 1) == 1.0);
}

TEST_CASE("generating function of the strange foliation is eps(c) sin(2 pi theta)/(2 pi)") {
  const auto params = abs_strange_params();
  const GeneratingGrid g = build_generating_function(strange_foliation(params), 129, 65, {-1.0, 1.0});
  double err = 0.0, err_c = 0.0;
  for (Eigen::Index i = 0; i < g.n_theta(); ++i)
    for (Eigen::Index j = 0; j < g.n_c(); ++j) {
      const double t = g.theta_nodes(i), c = g.c_nodes(j);
      err = std::max(err, std::abs(g.u(i, j) - params.epsilon(c) * std::sin(2 * oracle::pi * t) / (2 * oracle::pi)));
      if (c != 0.0)
        err_c = std::max(err_c, std::abs(g.du_dc(i, j) - params.epsilon_derivative(c) *
                                                              std::sin(2 * oracle::pi * t) / (2 * oracle::pi)));
    }
  CHECK(err < 1e-10);
  CHECK(err_c < 1e-8);
}

TEST_CASE("generating function of the plateau foliation") {
  const AppendixAFamily fam = appendix_a_family();
  const GeneratingGrid g = build_generating_function(fam.foliation(), 257, 33, {-0.5, 0.5});
  double err = 0.0;
  for (Eigen::Index i = 0; i < g.n_theta(); ++i)
    for (Eigen::Index j = 0; j < g.n_c(); ++j) {
      const double t = g.theta_nodes(i), c = g.c_nodes(j);
      // gamma from the plateau/blend definition, integrated independently
      const double gamma = oracle::midpoint_rule([&](double s) { return fam.gamma_prime(s); }, 0.0, t, 4000);
      err = std::max(err, std::abs(g.u(i, j) - fam.zeta(c) * gamma));
    }
  CHECK(err < 1e-7);
}

TEST_CASE("generating grid errors") {
  CHECK_THROWS_AS(build_generating_function(standard_foliation(), 7, 16, {0.0, 1.0}), ArgumentError);
  FoliationSpec narrow = standard_foliation();
  narrow.domain = {0.0, 1.0};
  CHECK_THROWS_AS(build_generating_function(narrow, 16, 16, {-0.5, 0.5}), DomainError);
}

TEST_CASE("leaf means and labeling") {
  CHECK(leaf_mean(standard_foliation(), 0.3, 64).mean == doctest::Approx(0.3).epsilon(1e-15));
  const LeafMean m = leaf_mean(strange_foliation(default_strange_params()), 0.7, 256);
  CHECK(m.mean == doctest::Approx(0.7).epsilon(1e-14));
  CHECK_FALSE(m.mislabeled);

  // tabulate the strange foliation with every leaf shifted by +0.1
  FoliationTable table = tabulate_foliation(strange_foliation(default_strange_params()), 64, 21, {-1.0, 1.0});
  table.eta.array() += 0.1;
  const FoliationSpec bad = table_foliation(table);
  const LeafMean lm = leaf_mean(bad, 0.5, 256);
  CHECK(lm.mean == doctest::Approx(0.6).epsilon(1e-3));
  CHECK(lm.defect == doctest::Approx(0.1).epsilon(1e-3));
  CHECK(lm.mislabeled);
  CHECK_THROWS_AS(build_generating_function(bad, 64, 16, {-0.5, 0.5}), LabelingError);
}

TEST_CASE("c1 report") {
  SUBCASE("kink of |c| is flagged with the one-sided derivative jump") {
    const GeneratingGrid g = build_generating_function(strange_foliation(abs_strange_params()), 129, 129, {-0.5, 0.5});
    const C1Report r = c1_report(g);
    CHECK(r.discontinuity);
    CHECK(std::abs(r.c_at) <= g.c_step());
    // jump of eps'(c) sin(2 pi theta)/(2 pi) across c = 0: 2 (1/(8 pi)) / (2 pi)
    CHECK(r.max_jump == doctest::Approx(1.0 / (8 * oracle::pi * oracle::pi)).epsilon(1e-3));
  }
  SUBCASE("zero function") {
    const GeneratingGrid g = build_generating_function(standard_foliation(), 65, 65, {-0.5, 0.5});
    const C1Report r = c1_report(g);
    CHECK_FALSE(r.discontinuity);
    CHECK(r.max_jump == 0.0);
  }
  SUBCASE("smooth u: jumps shrink linearly under refinement") {
    std::vector<double> jumps;
    for (int m : {64, 128, 256}) {
      const C1Report r = c1_report(build_generating_function(smooth_quadratic(), 65, m, {-0.5, 0.5}));
      CHECK_FALSE(r.discontinuity);
      jumps.push_back(r.max_jump);
    }
    CHECK(jumps[0] / jumps[1] == doctest::Approx(2.0).epsilon(0.05));
    CHECK(jumps[1] / jumps[2] == doctest::Approx(2.0).epsilon(0.05));
  }
  CHECK_THROWS_AS(c1_report(build_generating_function(standard_foliation(), 64, 63, {-0.5, 0.5})), PreconditionError);
}

TEST_CASE("hoelder fits") {
  const HolderFit s = holder_fit(standard_foliation(), {-1.0, 1.0}, 200);
  CHECK(s.exponent == doctest::Approx(1.0).epsilon(0.01));
  CHECK(s.r_squared >= 0.99);
  const HolderFit a = holder_fit(strange_foliation(abs_strange_params()), {-1.0, 1.0}, 200);
  CHECK(std::abs(a.exponent - 1.0) <= 0.05);
  // Weierstrass-type leaf offsets, 1/2-Hoelder at every scale
  FoliationSpec rough;
  rough.leaf = [](double t, double c) {
    double w = 0.0;
    for (int k = 0; k < 40; ++k) w += std::pow(2.0, -0.5 * k) * std::cos(std::ldexp(c, k));
    return c + 0.25 * w * std::cos(2 * oracle::pi * t);
  };
  const HolderFit r = holder_fit(rough, {0.0, 1.0}, 400);
  CHECK(r.exponent == doctest::Approx(0.5).epsilon(0.2));

  CHECK_THROWS_AS(holder_fit(standard_foliation(), {-1.0, 1.0}, 19), ArgumentError);
  FoliationSpec flat;
  flat.leaf = [](double, double) { return 0.0; };
  CHECK_THROWS_AS(holder_fit(flat, {-1.0, 1.0}, 50), InsufficientDataError);
}

TEST_CASE("biLipschitz constants") {
  const LipschitzFit s = bilipschitz_fit(standard_foliation(), {-1.0, 1.0});
  CHECK(s.K_upper == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s.K_lower == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(s.k_minus) < 1e-12);
  CHECK(std::abs(s.k_plus) < 1e-12);
  CHECK(s.bilipschitz);

  const LipschitzFit a = bilipschitz_fit(strange_foliation(abs_strange_params()), {-1.0, 1.0});
  const double e = 1.0 / (8 * oracle::pi);
  CHECK(std::abs(a.K_upper - (1.0 + e)) <= 1e-3);
  CHECK(std::abs(a.K_lower - (1.0 - e)) <= 1e-3);
  CHECK(a.bilipschitz);

  const AppendixAFamily fam = appendix_a_family();
  const LipschitzFit ap = bilipschitz_fit(fam.foliation(), {-0.25, 0.25});
  CHECK_FALSE(ap.bilipschitz);
  CHECK(ap.K_lower < 1e-3);
  CHECK(std::abs(ap.theta_at_lower - 0.5) <= fam.params.plateau_halfwidth + 1e-9);
  CHECK(std::abs(ap.c_at_lower) <= 0.25 / 32);
  // away from c = 0 the leaves stay strictly ordered
  double lowest = 1e9;
  for (int i = 0; i <= 400; ++i)
    for (double c : {-2.0, -1.0, -0.5, -0.1, 0.1, 0.5, 1.0, 2.0}) {
      const double t = i / 400.0;
      lowest = std::min(lowest, 1.0 + fam.zeta_prime(c) * fam.gamma_prime(t));
    }
  CHECK(lowest > 0.0);
}

TEST_CASE("mixed partials") {
  const GeneratingGrid smooth = build_generating_function(smooth_quadratic(), 128, 128, {-0.5, 0.5});
  const FoliationSpec sq = smooth_quadratic();
  CHECK(mixed_partials_check(smooth, &sq).max_discrepancy <= 1e-6);
  // staggered route without analytic partials
  FoliationSpec bare;
  bare.leaf = sq.leaf;
  const GeneratingGrid staggered = build_generating_function(bare, 128, 128, {-0.5, 0.5});
  const MixedPartialsReport st = mixed_partials_check(staggered, &bare);
  CHECK_FALSE(st.used_analytic);
  CHECK(st.max_discrepancy <= 1e-6);

  const FoliationSpec std_fol = standard_foliation();
  const GeneratingGrid zero = build_generating_function(std_fol, 64, 64, {-0.5, 0.5});
  CHECK(mixed_partials_check(zero, &std_fol).max_discrepancy == 0.0);

  const FoliationSpec strange = strange_foliation(abs_strange_params());
  const GeneratingGrid sg = build_generating_function(strange, 128, 129, {-0.5, 0.5});
  const MixedPartialsReport r = mixed_partials_check(sg, &strange);
  CHECK(std::abs(r.c_at) <= 1e-12);
  CHECK(r.max_discrepancy > 1e-3);
  CHECK(r.max_outside_band <= 1e-6);

  CHECK_THROWS_AS(mixed_partials_check(build_generating_function(std_fol, 63, 64, {-0.5, 0.5}), &std_fol),
                  PreconditionError);
}

TEST_CASE("area between leaves") {
  const FoliationSpec s = standard_foliation();
  // normalized by c' - c
  CHECK(area_between(s, 0.1, 0.4, 0.2, 0.7) == doctest::Approx(0.5).epsilon(1e-13));
  const FoliationSpec strange = strange_foliation(default_strange_params());
  CHECK(area_between(strange, -0.3, 0.7, 0.25, 1.25) == doctest::Approx(1.0).epsilon(1e-12));
  const double d = 0.05;
  const double expected =
      oracle::midpoint_rule([&](double t) { return strange.leaf(t, d) - strange.leaf(t, -d); }, 0.0, 0.5, 10000) /
      (2 * d);
  CHECK(area_between(strange, -d, d, 0.0, 0.5) == doctest::Approx(expected).epsilon(1e-9));
  CHECK_THROWS_AS(area_between(s, 0.4, 0.4, 0.0, 1.0), ArgumentError);
}

TEST_CASE("grid csv layout") {
  const GeneratingGrid g = build_generating_function(standard_foliation(), 8, 8, {0.0, 1.0});
  std::ostringstream out;
  write_grid_csv(g, out);
  const std::string text = out.str();
  CHECK(text.rfind("theta,c,u,du_dtheta,du_dc\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 1 + 64);
}
