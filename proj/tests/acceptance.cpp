// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "twistlab/foliation.hpp"
#include "twistlab/gallery.hpp"
#include "twistlab/green.hpp"
#include "twistlab/rotation.hpp"
#include "twistlab/straighten.hpp"
#include "twistlab/table.hpp"

using namespace twistlab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool passed = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      passed = false;
      detail << " [failed: " << what << "]";
    }
  }
};

struct GalleryCase {
  std::string name;
  TwistMapSpec map;
  FoliationSpec foliation;
  std::function<double(double)> rho_inverse;  // leaf label with a given rotation number
};

std::vector<GalleryCase> gallery() {
  const auto fam = integrable_family(linear_rho(), shear_conjugator());
  const StrangeTwistMap s = strange_twist_map(default_strange_params());
  const AppendixAFamily a = appendix_a_family();
  const auto identity = [](double r) { return r; };
  const Profile rho = s.rho;
  const auto strange_inverse = [rho](double r) {
    return oracle::invert_increasing(rho.f, r, -2.0, 2.0);
  };
  return {{"integrable", fam.map, fam.foliation, identity},
          {"strange", s.map, strange_foliation(s.params), strange_inverse},
          {"appendix_a", appendix_a_map(a, 8, linear_rho()), a.foliation(8), identity}};
}

double leaf_invariance(const TwistMapSpec& map, const FoliationSpec& fol, double c, int samples) {
  double worst = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double t = static_cast<double>(i) / samples;
    const LiftPoint q = map.forward(LiftPoint(t, fol.leaf(t, c)));
    worst = std::max(worst, std::abs(q.y() - fol.leaf(wrap_unit(q.x()), c)));
  }
  return worst;
}

std::vector<LiftPoint> random_points(const Interval& w, int n, unsigned long long seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(0.0, 1.0), uc(w.lo, w.hi);
  std::vector<LiftPoint> pts;
  for (int i = 0; i < n; ++i) {
    const double x = ux(rng);
    pts.emplace_back(x, uc(rng));
  }
  return pts;
}

void integrable_ground_truth(Outcome& out) {
  const auto fam = integrable_family(linear_rho(), shear_conjugator());
  const auto pts = random_points({-0.5, 0.5}, 256, 1);
  const auto rho = [](double c) { return c; };
  const double analytic = arnold_liouville_residual(fam.map, fam.phi, rho, pts);
  const StraighteningMap numeric =
      build_straightening(build_generating_function(fam.foliation, 512, 512, {-0.5, 0.5}));
  const double built = arnold_liouville_residual(fam.map, numeric, rho, pts);
  out.detail << "analytic " << analytic << ", numeric " << built;
  out.require(analytic <= 1e-8, "analytic residual <= 1e-8");
  out.require(built <= 1e-4, "numeric residual <= 1e-4");
}

void rational_density(Outcome& out) {
  const auto fam = integrable_family(linear_rho(), shear_conjugator());
  const RationalDensity d = rational_leaf_density(fam.map, fam.foliation, 0.0, 1);
  double err = 0.0;
  for (Eigen::Index i = 0; i < d.theta_nodes.size(); ++i) {
    const double t = d.theta_nodes(i), h = 1e-5;
    const double fd = (fam.foliation.leaf(t, h) - fam.foliation.leaf(t, -h)) / (2 * h);
    err = std::max(err, std::abs(fd - d.density(i)));
  }
  // periodic trapezoid over the nodes, independent of the cumulative h
  const Eigen::Index n = d.theta_nodes.size() - 1;
  const double mass = d.density.head(n).sum() / static_cast<double>(n);
  const double end = d.h(n);
  out.detail << "sup |density - d eta/dc| " << err << ", mass " << mass << ", h(1) " << end;
  out.require(err <= 1e-3, "density matches d eta/dc within 1e-3");
  out.require(std::abs(mass - 1.0) <= 1e-9, "density integrates to 1 within 1e-9");
  out.require(std::abs(end - 1.0) <= 1e-9, "h(1) = 1 within 1e-9");
}

void semi_conjugacy(Outcome& out) {
  const long n = 100000;
  const Eigen::VectorXd nodes = Eigen::VectorXd::LinSpaced(1025, 0.0, 1.0);
  double worst = 0.0;
  bool continuity = true;
  for (const GalleryCase& g : gallery()) {
    std::vector<double> labels;
    for (double r : {0.05, 0.1234, 0.2, 0.31, 0.4, 0.5 - 5e-4, 0.5 + 4e-4, 0.618034, 0.75, 0.9})
      labels.push_back(g.rho_inverse(r));
    int near_half = 0;
    for (double c : labels) {
      const CircleMapLift lift = projected_circle_map(g.map, g.foliation, c);
      const ConjugacyData d = measure_cdf(lift, nodes, n);
      worst = std::max(worst, d.residual * static_cast<double>(n));
      if (std::abs(d.rho - 0.5) <= 1e-3) ++near_half;
    }
    out.require(near_half >= 2, g.name + ": two leaves with rotation number near 1/2");

    // leaves straddling rotation number 1/2, at spacings halved twice
    std::vector<double> sups;
    for (double delta : {0.04, 0.02, 0.01}) {
      const double d = delta / std::sqrt(2.0);
      const auto h = [&](double r) {
        return measure_cdf(projected_circle_map(g.map, g.foliation, g.rho_inverse(r)), nodes, n).h_samples;
      };
      sups.push_back((h(0.5 - d) - h(0.5 + d)).cwiseAbs().maxCoeff());
    }
    const bool decreasing = sups[1] < sups[0] && sups[2] < sups[1];
    continuity = continuity && decreasing;
    out.detail << g.name << " adjacent sups " << sups[0] << " " << sups[1] << " " << sups[2] << "; ";
  }
  out.detail << "max residual*N " << worst;
  out.require(worst <= 5.0, "residual <= 5/N on all leaves");
  out.require(continuity, "adjacent sup-distance decreases under refinement");
}

void holder(Outcome& out) {
  const Interval w{-0.5, 0.5};
  for (const GalleryCase& g : gallery()) {
    const FoliationSpec table = table_foliation(tabulate_foliation(g.foliation, 512, 257, w));
    const HolderFit fit = holder_fit(table, w, 200);
    out.detail << g.name << " exponent " << fit.exponent << " r2 " << fit.r_squared << "; ";
    out.require(fit.exponent >= 0.45 && fit.r_squared >= 0.9, g.name + " exponent >= 0.45, r2 >= 0.9");
  }
  const HolderFit flat = holder_fit(standard_foliation(), w, 200);
  out.detail << "standard " << flat.exponent;
  out.require(std::abs(flat.exponent - 1.0) <= 0.01, "standard foliation exponent 1 +- 0.01");
}

void green_bundles(Outcome& out) {
  const auto plain = integrable_family(linear_rho());
  GreenOptions opts;
  opts.n_max = 100;
  const GreenData g = green_limits(plain.map, LiftPoint(0.3, 0.2), opts);
  double err = 0.0;
  for (int k = 1; k <= opts.n_max; ++k)
    err = std::max({err, std::abs(g.s_pos[k - 1] - 1.0 / k), std::abs(g.s_neg[k - 1] + 1.0 / k)});
  out.detail << "integrable slope error " << err;
  out.require(err <= 1e-12, "s_k = +-1/k to 1e-12");

  const auto cases = gallery();
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ut(0.0, 1.0), uc(-0.5, 0.5);
  int interleaved = 0;
  for (int i = 0; i < 100; ++i) {
    const GalleryCase& gc = cases[static_cast<std::size_t>(i) % cases.size()];
    const double t = ut(rng), c = uc(rng);
    interleaved += green_limits(gc.map, LiftPoint(t, gc.foliation.leaf(t, c)), opts).interleaved ? 1 : 0;
  }
  out.detail << ", interleaved " << interleaved << "/100";
  out.require(interleaved == 100, "interleaving on 100 random leaf points");

  int leaves = 0, passed = 0;
  for (const GalleryCase& gc : cases)
    for (double c : {-0.4, 0.15, 0.45}) {
      ++leaves;
      passed += sandwich_check(gc.map, gc.foliation, c, 32).passed() ? 1 : 0;
    }
  out.detail << ", sandwich " << passed << "/" << leaves;
  out.require(passed == leaves, "sandwich passes on invariant leaves");

  FoliationSpec tilted = cases[1].foliation;
  const FoliationSpec base = tilted;
  tilted.leaf = [base](double t, double c) { return base.leaf(t, c) + 0.1 * std::sin(2 * oracle::pi * t) / (2 * oracle::pi); };
  tilted.d_theta = nullptr;
  tilted.d_c = nullptr;
  const bool caught = !sandwich_check(cases[1].map, tilted, 0.3, 32).passed();
  out.detail << ", tilted curve " << (caught ? "rejected" : "accepted");
  out.require(caught, "sandwich fails on a tilted curve");
}

void straightening_gate(Outcome& out) {
  const auto fam = integrable_family(linear_rho(), shear_conjugator());
  const StrangeTwistMap s = strange_twist_map(default_strange_params());
  const FoliationSpec strange = strange_foliation(s.params);
  const AppendixAFamily a = appendix_a_family();
  const std::vector<std::pair<std::string, GeneratingGrid>> smooth{
      {"integrable", build_generating_function(fam.foliation, 257, 129, {-0.5, 0.5})},
      {"strange upper half", build_generating_function(strange, 257, 129, {0.05, 1.0})},
      {"appendix_a n=8", build_generating_function(a.foliation(8), 257, 129, {-0.5, 0.5})}};
  for (const auto& [name, grid] : smooth) {
    try {
      const StraighteningMap phi = build_straightening(grid);
      const double d = area_distortion(phi, random_rectangles(grid.window(), 32, 0), 256);
      out.detail << name << " distortion " << d << "; ";
      out.require(d <= 1e-3, name + " area distortion <= 1e-3");
    } catch (const NotStraightenableError& e) {
      out.require(false, name + " straightenable (" + e.what() + ")");
    }
  }
  int rejected = 0;
  const std::vector<Interval> straddling{{-0.5, 0.5}, {-0.05, 0.7}, {-1.0, 0.02}, {-0.3, 0.1}};
  for (const Interval& w : straddling) {
    try {
      build_straightening(build_generating_function(strange, 129, 65, w));
    } catch (const NotStraightenableError&) {
      ++rejected;
    }
  }
  out.detail << "strange straddling rejected " << rejected << "/" << straddling.size();
  out.require(rejected == static_cast<int>(straddling.size()), "strange straddling windows not straightenable");

  const GeneratingGrid ga = build_generating_function(a.foliation(0), 257, 65, {-0.5, 0.5});
  try {
    build_straightening(ga);
    out.require(false, "plateau limit not straightenable");
  } catch (const NotStraightenableError& e) {
    out.detail << ", appendix_a limit rejected at c = " << e.c_node();
    out.require(std::abs(e.c_node()) <= 2 * ga.c_step(), "plateau limit rejected at c = 0");
  }
}

void strange_map(Outcome& out) {
  const StrangeTwistMap s = strange_twist_map(default_strange_params());
  const FoliationSpec fol = strange_foliation(s.params);
  double invariance = 0.0;
  for (int l = 0; l < 20; ++l) invariance = std::max(invariance, leaf_invariance(s.map, fol, -1.0 + (l + 0.5) / 10.0, 256));

  std::vector<double> norms;
  for (double R : {1e-2, 1e-3, 1e-4}) {
    double m = 0.0;
    for (int i = 0; i < 64; ++i)
      for (double r : {R, -R}) m = std::max(m, (map_jacobian(s.map, LiftPoint(i / 64.0, r)) - Jacobian2::Identity()).norm());
    norms.push_back(m);
  }
  const double r1 = norms[0] / norms[1], r2 = norms[1] / norms[2];
  const double margin = twist_margin(s.map, {0.0, 1.0, 1e-3, 1.0}, {256, 256});
  double flux = 0.0;
  for (double c : {-0.7, -0.2, 0.3, 0.6, 0.9})
    flux = std::max(flux, std::abs(exactness_flux(s.map, SampledCurve::from_function(
                                                              [&fol, c](double t) { return fol.leaf(t, c); }, 4096))));
  out.detail << "invariance " << invariance << ", |Df - I| ratios " << r1 << " " << r2 << ", twist margin " << margin
             << ", flux " << flux;
  out.require(invariance <= 1e-8, "leaf invariance <= 1e-8");
  out.require(r1 > 8.0 && r1 < 12.5 && r2 > 8.0 && r2 < 12.5, "|Df - I| decays linearly in R");
  out.require(margin > 0.0, "twist margin > 0");
  out.require(flux <= 1e-6, "exactness flux <= 1e-6");
}

void mollification(Outcome& out) {
  const auto fam = integrable_family(linear_rho(), shear_conjugator());
  const MollifiedFamily m = mollify(build_generating_function(fam.foliation, 257, 257, {-1.0, 1.0}), {0.2, 0.1, 0.05, 0.025});
  bool decreasing = true;
  out.detail << "c1 errors";
  for (std::size_t k = 0; k < m.c1_errors.size(); ++k) {
    out.detail << " " << m.c1_errors[k];
    if (k > 0) decreasing = decreasing && m.c1_errors[k] < m.c1_errors[k - 1];
  }
  const FoliationSpec fol = fam.foliation;
  const MonotoneConvolution mc =
      monotone_convolution_check([&fol](double c) { return fol.leaf(0.3, c); }, 0.2, {-0.8, 0.8}, 10000);
  out.detail << ", convolution min increment " << mc.min_increment << " on " << mc.samples << " samples";
  out.require(decreasing, "c1 errors strictly decreasing");
  out.require(mc.increasing && mc.samples == 10000, "monotone convolution on 1e4 samples");
}

void mixed_partials(Outcome& out) {
  const auto fam = integrable_family(linear_rho(), shear_conjugator());
  const AppendixAFamily a = appendix_a_family();
  const std::vector<std::pair<std::string, FoliationSpec>> smooth{{"integrable", fam.foliation},
                                                                  {"appendix_a n=8", a.foliation(8)}};
  for (const auto& [name, fol] : smooth) {
    const MixedPartialsReport r = mixed_partials_check(build_generating_function(fol, 128, 128, {-0.5, 0.5}), &fol);
    out.detail << name << " " << r.max_discrepancy << "; ";
    out.require(r.max_discrepancy <= 1e-5, name + " discrepancy <= 1e-5");
  }
  const FoliationSpec strange = strange_foliation(default_strange_params());
  const GeneratingGrid sg = build_generating_function(strange, 128, 128, {-0.5, 0.5});
  const MixedPartialsReport r = mixed_partials_check(sg, &strange);
  out.detail << "strange worst at c = " << r.c_at << " (" << r.max_discrepancy << "), outside band " << r.max_outside_band;
  out.require(std::abs(r.c_at) <= sg.c_step(), "strange discrepancy peaks at the c = 0 row");
  out.require(r.max_outside_band <= 1e-5, "strange discrepancy small away from c = 0");
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::ifstream in(entry.path(), std::ios::binary);
    files[fs::relative(entry.path(), dir).string()] =
        std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
  return files;
}

void determinism(Outcome& out) {
  const std::vector<std::string> runs{
      "straighten --map-kind integrable --seed 7",
      "holder-fit --map-kind strange --set tabulate=true --seed 7",
      "green --map-kind strange --set random_points=20 --seed 7",
      "conjugacy --map-kind appendix_a --set n=20000 --seed 7",
  };
  const fs::path root = fs::path("acceptance_out") / "determinism";
  int identical = 0;
  for (std::size_t k = 0; k < runs.size(); ++k) {
    std::map<std::string, std::string> seen[2];
    const fs::path dir = root / std::to_string(k);
    for (int rep = 0; rep < 2; ++rep) {
      fs::remove_all(dir);
      const std::string cmd = std::string(TWISTLAB_CLI_PATH) + " " + runs[k] + " -o " + dir.string() + " 2>/dev/null";
      if (std::system(cmd.c_str()) != 0) out.require(false, "run '" + runs[k] + "' exits 0");
      seen[rep] = snapshot(dir);
    }
    if (!seen[0].empty() && seen[0] == seen[1]) ++identical;
  }
  out.detail << identical << "/" << runs.size() << " runs byte-identical";
  out.require(identical == static_cast<int>(runs.size()), "identical artifacts");
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, void (*)(Outcome&)>> criteria{
      {"integrable ground truth", integrable_ground_truth},
      {"rational-leaf density", rational_density},
      {"semi-conjugacy", semi_conjugacy},
      {"Hoelder exponent", holder},
      {"Green bundles", green_bundles},
      {"straightening gate", straightening_gate},
      {"strange map", strange_map},
      {"mollification", mollification},
      {"mixed partials", mixed_partials},
      {"determinism", determinism},
  };
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome out;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      criteria[k].second(out);
    } catch (const std::exception& e) {
      out.passed = false;
      out.detail << " [exception: " << e.what() << "]";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %zu %s: %s (%.1fs)\n", out.passed ? "PASS" : "FAIL", k + 1, criteria[k].first.c_str(),
                out.detail.str().c_str(), secs);
    std::fflush(stdout);
    failures += out.passed ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
