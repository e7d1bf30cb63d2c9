#include "twistlab/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <random>

#include "twistlab/core_maps.hpp"
#include "twistlab/csv.hpp"
#include "twistlab/foliation.hpp"
#include "twistlab/gallery.hpp"
#include "twistlab/green.hpp"
#include "twistlab/rotation.hpp"
#include "twistlab/straighten.hpp"
#include "twistlab/table.hpp"

namespace twistlab::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kMapKinds{"integrable", "strange", "appendix_a", "user_table"};
const std::vector<std::string> kFoliationKinds{"integrable", "strange", "appendix_a", "user_table", "standard"};

bool known(const std::vector<std::string>& list, const std::string& s) {
  return std::find(list.begin(), list.end(), s) != list.end();
}

// Typed access to a parameter object; wrong types are usage errors.
class Params {
 public:
  explicit Params(const json& j) : j_(j) {}

  double num(const std::string& key, double def) const {
    if (!j_.contains(key)) return def;
    if (!j_[key].is_number()) throw UsageError("parameter '" + key + "' must be a number");
    return j_[key].get<double>();
  }
  long integer(const std::string& key, long def) const {
    const double v = num(key, static_cast<double>(def));
    if (v != std::floor(v)) throw UsageError("parameter '" + key + "' must be an integer");
    return static_cast<long>(v);
  }
  bool flag(const std::string& key, bool def) const {
    if (!j_.contains(key)) return def;
    if (!j_[key].is_boolean()) throw UsageError("parameter '" + key + "' must be true or false");
    return j_[key].get<bool>();
  }
  std::string str(const std::string& key, const std::string& def) const {
    if (!j_.contains(key)) return def;
    if (!j_[key].is_string()) throw UsageError("parameter '" + key + "' must be a string");
    return j_[key].get<std::string>();
  }
  std::vector<double> list(const std::string& key, const std::vector<double>& def) const {
    if (!j_.contains(key)) return def;
    const json& v = j_[key];
    if (!v.is_array()) throw UsageError("parameter '" + key + "' must be an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) throw UsageError("parameter '" + key + "' must be an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }
  Interval window(const std::string& key, const Interval& def) const {
    const auto v = list(key, {def.lo, def.hi});
    if (v.size() != 2 || !(v[0] < v[1])) throw UsageError("parameter '" + key + "' must be [lo, hi] with lo < hi");
    return {v[0], v[1]};
  }

 private:
  const json& j_;
};

struct Model {
  TwistMapSpec map;
  FoliationSpec foliation;
  std::function<double(double)> rho;     // empty when not known in closed form
  std::optional<StraighteningMap> phi;   // analytic straightening, when available
  Interval window{-0.5, 0.5};
};

Profile rho_from(const Params& p) {
  const std::string kind = p.str("rho", "linear");
  if (kind == "linear") return linear_rho(p.num("slope", 1.0));
  if (kind == "cubic") return cubic_rho(p.num("cubic", 0.1));
  throw UsageError("unknown rho profile '" + kind + "' (linear, cubic)");
}

IntegrableFamily integrable_from(const Params& p) {
  const std::string conj = p.str("conjugator", "shear");
  std::optional<Conjugator> c;
  if (conj == "shear")
    c = shear_conjugator(p.num("a", 0.15), p.num("b", 0.15));
  else if (conj != "none")
    throw UsageError("unknown conjugator '" + conj + "' (shear, none)");
  return integrable_family(rho_from(p), c);
}

StrangeParams strange_from(const Params& p) {
  const std::string eps = p.str("epsilon", "default");
  if (eps == "default") return default_strange_params(p.num("scale", 1.0 / (8.0 * kPi)));
  if (eps == "abs") return abs_strange_params(p.num("scale", 1.0 / (8.0 * kPi)));
  throw UsageError("unknown strange epsilon profile '" + eps + "' (default, abs)");
}

AppendixAFamily appendix_from(const Params& p) {
  AppendixAParams ap;
  ap.plateau_halfwidth = p.num("plateau_halfwidth", ap.plateau_halfwidth);
  ap.blend_width = p.num("blend_width", ap.blend_width);
  return appendix_a_family(ap);
}

std::string table_file(const Params& p, const char* what) {
  const std::string file = p.str("file", "");
  if (file.empty()) throw UsageError(std::string(what) + " kind user_table needs a 'file' parameter");
  return file;
}

FoliationSpec foliation_from(const Descriptor& d) {
  const Params p(d.params);
  if (d.kind == "integrable") return integrable_from(p).foliation;
  if (d.kind == "strange") return strange_foliation(strange_from(p));
  if (d.kind == "appendix_a") return appendix_from(p).foliation(static_cast<int>(p.integer("n", 0)));
  if (d.kind == "standard") return standard_foliation();
  if (d.kind == "user_table") return table_foliation(foliation_table_from_csv(csv::read_file(table_file(p, "foliation"))));
  throw UsageError("unknown foliation kind '" + d.kind + "'");
}

Model build_model(const ExperimentConfig& config) {
  Model m;
  const Params p(config.map.params);
  const std::string& kind = config.map.kind;
  if (kind == "integrable") {
    IntegrableFamily fam = integrable_from(p);
    m.map = fam.map;
    m.foliation = fam.foliation;
    m.rho = fam.rho.f;
    m.phi = fam.phi;
  } else if (kind == "strange") {
    const StrangeParams params = strange_from(p);
    const StrangeTwistMap s = strange_twist_map(params);
    m.map = s.map;
    m.foliation = strange_foliation(params);
    m.rho = s.rho.f;
  } else if (kind == "appendix_a") {
    const AppendixAFamily fam = appendix_from(p);
    const int n = static_cast<int>(p.integer("n", 8));
    const Profile rho = rho_from(p);
    m.map = appendix_a_map(fam, n, rho);
    m.foliation = fam.foliation(n);
    m.rho = rho.f;
    m.phi = fam.straightening(n);
  } else if (kind == "user_table") {
    m.map = table_map(map_table_from_csv(csv::read_file(table_file(p, "map"))));
    if (config.foliation.kind.empty())
      m.foliation = standard_foliation();
  } else {
    throw UsageError("unknown map kind '" + kind + "'");
  }
  if (!config.foliation.kind.empty()) {
    m.foliation = foliation_from(config.foliation);
    if (config.foliation.kind != kind || config.foliation.params != config.map.params) {
      m.rho = nullptr;
      m.phi.reset();
    }
  }
  if (m.foliation.domain.width() < 1.0) m.window = m.foliation.domain;
  return m;
}

// Result accumulation -------------------------------------------------------

struct Report {
  json results = json::object();
  json checks = json::array();
  json files = json::array();

  bool add(const std::string& name, double value, const std::string& comparison, double threshold) {
    bool ok = false;
    if (comparison == "<=") ok = value <= threshold;
    else if (comparison == ">=") ok = value >= threshold;
    else if (comparison == "<") ok = value < threshold;
    else if (comparison == ">") ok = value > threshold;
    else if (comparison == "==") ok = value == threshold;
    checks.push_back({{"name", name}, {"value", value}, {"comparison", comparison}, {"threshold", threshold},
                      {"passed", ok}});
    return ok;
  }
  bool expect(const std::string& name, bool observed, bool wanted) {
    checks.push_back({{"name", name}, {"value", observed}, {"comparison", "=="}, {"threshold", wanted},
                      {"passed", observed == wanted}});
    return observed == wanted;
  }
  bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const json& c) { return c["passed"].get<bool>(); });
  }
};

struct Context {
  const ExperimentConfig& config;
  const Model& model;
  Params params;
  fs::path out_dir;
  Report& report;
  std::ostream& log;

  std::ofstream open(const std::string& name) const {
    report.files.push_back(name);
    std::ofstream f(out_dir / name, std::ios::binary);
    if (!f) throw UsageError("cannot write " + (out_dir / name).string());
    return f;
  }
};

json interval_json(const Interval& w) { return json::array({w.lo, w.hi}); }

ProjectionOptions projection(const Params& p) {
  ProjectionOptions o;
  o.invariance_tolerance = p.num("invariance_tol", o.invariance_tolerance);
  return o;
}

GeneratingGrid grid_from(const Context& ctx, int n_theta, int n_c) {
  const Interval w = ctx.params.window("window", ctx.model.window);
  GridOptions o;
  o.labeling_tolerance = ctx.params.num("labeling_tol", o.labeling_tolerance);
  return build_generating_function(ctx.model.foliation, static_cast<int>(ctx.params.integer("n_theta", n_theta)),
                                   static_cast<int>(ctx.params.integer("n_c", n_c)), w, o);
}

// Operations ----------------------------------------------------------------

void op_rotation_number(const Context& ctx) {
  const double c = ctx.params.num("c", 0.1234);
  const long n = ctx.params.integer("n_max", 1000000);
  const double tol = ctx.params.num("tol", 1e-9);
  const CircleMapLift g = projected_circle_map(ctx.model.map, ctx.model.foliation, c, projection(ctx.params));
  const RotationEstimate r = rotation_number(g, n, tol);
  auto& res = ctx.report.results;
  res = {{"c", c},         {"rho", r.value}, {"raw", r.raw},         {"lower", r.lower},
         {"upper", r.upper}, {"p", r.p},       {"q", r.q},             {"periodic", r.periodic},
         {"iterations", r.iterations}, {"error_bound", r.error_bound()}};
  ctx.report.expect("estimate_inside_bracket", r.lower <= r.value && r.value <= r.upper, true);
  if (ctx.model.rho) {
    res["rho_exact"] = ctx.model.rho(c);
    ctx.report.add("rho_error", std::abs(r.value - ctx.model.rho(c)), "<=", ctx.params.num("rho_tol", 1e-6));
  }
  auto f = ctx.open("rotation.csv");
  csv::write_header(f, {"c", "rho", "lower", "upper", "p", "q"});
  csv::write_row(f, {c, r.value, r.lower, r.upper, static_cast<double>(r.p), static_cast<double>(r.q)});
}

void op_rho_profile(const Context& ctx) {
  const Interval w = ctx.params.window("window", ctx.model.window);
  const long count = ctx.params.integer("nodes", 21);
  if (count < 2) throw UsageError("rho-profile needs at least 2 nodes");
  std::vector<double> nodes;
  for (long k = 0; k < count; ++k) nodes.push_back(w.lo + w.width() * static_cast<double>(k) / (count - 1));
  const RhoProfile prof = rho_profile(ctx.model.map, ctx.model.foliation, nodes, ctx.params.integer("n_max", 100000),
                                      projection(ctx.params));
  ctx.report.results = {{"window", interval_json(w)}, {"nodes", count},
                        {"lower_lipschitz", prof.lower_lip}, {"upper_lipschitz", prof.upper_lip},
                        {"monotone", prof.monotone}};
  ctx.report.expect("monotone", prof.monotone, true);
  if (ctx.model.rho) {
    double err = 0.0;
    for (std::size_t k = 0; k < nodes.size(); ++k) err = std::max(err, std::abs(prof.rho_values[k] - ctx.model.rho(nodes[k])));
    ctx.report.results["max_rho_error"] = err;
    ctx.report.add("max_rho_error", err, "<=", ctx.params.num("rho_tol", 1e-6));
  }
  auto f = ctx.open("profile.csv");
  write_profile_csv(prof, f);
}

void op_conjugacy(const Context& ctx) {
  const double c = ctx.params.num("c", 0.1234);
  const long n = ctx.params.integer("n", 100000);
  const long count = ctx.params.integer("nodes", 1024);
  const CircleMapLift g = projected_circle_map(ctx.model.map, ctx.model.foliation, c, projection(ctx.params));
  const Eigen::VectorXd nodes = Eigen::VectorXd::LinSpaced(count + 1, 0.0, 1.0);
  const ConjugacyData d = measure_cdf(g, nodes, n);
  const double bound = ctx.params.num("residual_factor", 5.0) / static_cast<double>(n);
  ctx.report.results = {{"c", c},           {"rho", d.rho},       {"orbit_length", n},
                        {"residual", d.residual}, {"residual_times_n", d.residual * static_cast<double>(n)},
                        {"max_increment", d.max_increment}, {"flagged", d.flagged}};
  ctx.report.add("residual", d.residual, "<=", bound);
  auto f = ctx.open("conjugacy.csv");
  write_conjugacy_csv(d, g, f);
}

void op_rational_density(const Context& ctx) {
  const double c = ctx.params.num("c", 0.0);
  const int q = static_cast<int>(ctx.params.integer("q", 1));
  RationalDensityOptions o;
  o.samples = static_cast<int>(ctx.params.integer("samples", o.samples));
  const RationalDensity d = rational_leaf_density(ctx.model.map, ctx.model.foliation, c, q, o);
  const Eigen::Index last = d.h.size() - 1;
  ctx.report.results = {{"c", c}, {"p", d.p}, {"q", d.q}, {"normalizer", d.normalizer},
                        {"periodicity_defect", d.periodicity_defect}, {"h_end", d.h(last)}};
  ctx.report.add("normalization", std::abs(d.h(last) - 1.0), "<=", ctx.params.num("normalization_tol", 1e-9));
  if (ctx.params.flag("compare_fd", true)) {
    const double step = ctx.params.num("fd_step", 1e-5);
    double err = 0.0;
    for (Eigen::Index i = 0; i < d.theta_nodes.size(); ++i) {
      const double t = d.theta_nodes(i);
      const double fd = (ctx.model.foliation.leaf(t, c + step) - ctx.model.foliation.leaf(t, c - step)) / (2.0 * step);
      err = std::max(err, std::abs(fd - d.density(i)));
    }
    ctx.report.results["density_vs_fd"] = err;
    ctx.report.add("density_vs_fd", err, "<=", ctx.params.num("density_tol", 1e-3));
  }
  auto f = ctx.open("density.csv");
  csv::write_header(f, {"theta", "torsion", "density", "h"});
  for (Eigen::Index i = 0; i < d.theta_nodes.size(); ++i)
    csv::write_row(f, {d.theta_nodes(i), d.torsion(i), d.density(i), d.h(i)});
}

void op_generating_function(const Context& ctx) {
  const GeneratingGrid g = grid_from(ctx, 257, 129);
  double defect = 0.0;
  for (Eigen::Index j = 0; j < g.n_c(); ++j) defect = std::max(defect, std::abs(g.u(g.n_theta() - 1, j)));
  ctx.report.results = {{"n_theta", g.n_theta()}, {"n_c", g.n_c()}, {"window", interval_json(g.window())},
                        {"analytic_dc", g.analytic_dc}, {"max_u_at_theta_1", defect}};
  ctx.report.add("max_u_at_theta_1", defect, "<=", ctx.params.num("labeling_tol", 1e-6));
  auto f = ctx.open("grid.csv");
  write_grid_csv(g, f);
}

void op_c1_report(const Context& ctx) {
  const GeneratingGrid g = grid_from(ctx, 129, 129);
  const C1Report r = c1_report(g);
  ctx.report.results = {{"max_jump", r.max_jump}, {"theta_at", r.theta_at}, {"c_at", r.c_at},
                        {"level_jumps", {r.level_jumps[0], r.level_jumps[1], r.level_jumps[2]}},
                        {"ratios", {r.ratios[0], r.ratios[1]}}, {"discontinuity", r.discontinuity}};
  ctx.report.expect("discontinuity", r.discontinuity, !ctx.params.flag("expect_c1", true));
  auto f = ctx.open("c1.csv");
  csv::write_header(f, {"stride", "jump"});
  const double strides[3] = {4.0, 2.0, 1.0};
  for (int k = 0; k < 3; ++k) csv::write_row(f, {strides[k], r.level_jumps[k]});
}

void op_holder_fit(const Context& ctx) {
  const Interval w = ctx.params.window("window", ctx.model.window);
  FoliationSpec fol = ctx.model.foliation;
  if (ctx.params.flag("tabulate", false))
    fol = table_foliation(tabulate_foliation(fol, static_cast<int>(ctx.params.integer("table_n_theta", 512)),
                                             static_cast<int>(ctx.params.integer("table_n_c", 257)), w));
  HolderOptions o;
  o.min_gap = ctx.params.num("min_gap", o.min_gap);
  o.max_gap = ctx.params.num("max_gap", o.max_gap);
  o.theta_resolution = static_cast<int>(ctx.params.integer("theta_resolution", o.theta_resolution));
  o.seed = ctx.config.seed;
  const HolderFit h = holder_fit(fol, w, static_cast<int>(ctx.params.integer("pairs", 200)), o);
  ctx.report.results = {{"exponent", h.exponent}, {"constant", h.constant}, {"r_squared", h.r_squared},
                        {"pair_count", h.pair_count}, {"sup_refinement_change", h.sup_refinement_change},
                        {"window", interval_json(w)}};
  ctx.report.add("exponent", h.exponent, ">=", ctx.params.num("threshold", 0.45));
  ctx.report.add("r_squared", h.r_squared, ">=", ctx.params.num("r2_threshold", 0.9));
  auto f = ctx.open("holder.csv");
  csv::write_header(f, {"exponent", "constant", "r_squared", "pair_count"});
  csv::write_row(f, {h.exponent, h.constant, h.r_squared, static_cast<double>(h.pair_count)});
}

void op_bilipschitz(const Context& ctx) {
  const Interval w = ctx.params.window("window", ctx.model.window);
  LipschitzOptions o;
  o.n_theta = static_cast<int>(ctx.params.integer("n_theta", o.n_theta));
  o.n_c = static_cast<int>(ctx.params.integer("n_c", o.n_c));
  o.not_bilipschitz_threshold = ctx.params.num("threshold", o.not_bilipschitz_threshold);
  const LipschitzFit l = bilipschitz_fit(ctx.model.foliation, w, o);
  ctx.report.results = {{"K_upper", l.K_upper}, {"K_lower", l.K_lower}, {"k_minus", l.k_minus},
                        {"k_plus", l.k_plus}, {"bilipschitz", l.bilipschitz},
                        {"mixed_partial_condition", l.mixed_partial_condition},
                        {"theta_at_lower", l.theta_at_lower}, {"c_at_lower", l.c_at_lower}};
  ctx.report.expect("bilipschitz", l.bilipschitz, ctx.params.flag("expect_bilipschitz", true));
  auto f = ctx.open("bilipschitz.csv");
  csv::write_header(f, {"K_upper", "K_lower", "k_minus", "k_plus", "theta_at_lower", "c_at_lower"});
  csv::write_row(f, {l.K_upper, l.K_lower, l.k_minus, l.k_plus, l.theta_at_lower, l.c_at_lower});
}

void op_mixed_partials(const Context& ctx) {
  const int n = static_cast<int>(ctx.params.integer("n", 128));
  const GeneratingGrid g = grid_from(ctx, n, n);
  const MixedPartialsReport r = mixed_partials_check(g, &ctx.model.foliation);
  ctx.report.results = {{"max_discrepancy", r.max_discrepancy}, {"theta_at", r.theta_at}, {"c_at", r.c_at},
                        {"max_outside_band", r.max_outside_band}, {"used_analytic", r.used_analytic}};
  const double tol = ctx.params.num("tol", 1e-5);
  const std::string mode = ctx.params.str("mode", "smooth");
  if (mode == "smooth") {
    ctx.report.add("max_discrepancy", r.max_discrepancy, "<=", tol);
  } else if (mode == "localized") {
    ctx.report.add("max_outside_band", r.max_outside_band, "<=", tol);
    ctx.report.add("worst_row_offset", std::abs(r.c_at - ctx.params.num("expected_c", 0.0)), "<=",
                   2.0 * g.c_step());
  } else {
    throw UsageError("mixed-partials mode must be smooth or localized");
  }
  auto f = ctx.open("mixed_partials.csv");
  csv::write_header(f, {"max_discrepancy", "theta_at", "c_at", "max_outside_band"});
  csv::write_row(f, {r.max_discrepancy, r.theta_at, r.c_at, r.max_outside_band});
}

void op_green(const Context& ctx) {
  const double theta = ctx.params.num("theta", 0.3), c = ctx.params.num("c", 0.5);
  GreenOptions o;
  o.n_max = static_cast<int>(ctx.params.integer("n_max", o.n_max));
  const LiftPoint p(theta, ctx.model.foliation.leaf(theta, c));
  const GreenData d = green_limits(ctx.model.map, p, o);
  ctx.report.results = {{"theta", theta}, {"c", c}, {"s_plus", d.s_plus_estimate}, {"s_minus", d.s_minus_estimate},
                        {"s_plus_extrapolated", d.s_plus_extrapolated},
                        {"s_minus_extrapolated", d.s_minus_extrapolated}, {"converged_plus", d.converged_plus},
                        {"converged_minus", d.converged_minus}, {"interleaved", d.interleaved}};
  ctx.report.expect("interleaved", d.interleaved, true);
  const long random_points = ctx.params.integer("random_points", 0);
  if (random_points > 0) {
    const Interval w = ctx.params.window("window", ctx.model.window);
    std::mt19937_64 rng(ctx.config.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    long bad = 0;
    for (long k = 0; k < random_points; ++k) {
      const double t = unit(rng), cc = w.lo + w.width() * unit(rng);
      if (!green_limits(ctx.model.map, LiftPoint(t, ctx.model.foliation.leaf(t, cc)), o).interleaved) ++bad;
    }
    ctx.report.results["random_points"] = random_points;
    ctx.report.add("random_points_not_interleaved", static_cast<double>(bad), "==", 0.0);
  }
  auto f = ctx.open("green.csv");
  write_green_csv(d, f);
}

void op_sandwich(const Context& ctx) {
  const double c = ctx.params.num("c", 0.5), tilt = ctx.params.num("tilt", 0.0);
  FoliationSpec fol = ctx.model.foliation;
  if (tilt != 0.0) {
    const FoliationSpec base = fol;
    fol.leaf = [base, tilt](double t, double cc) { return base.leaf(t, cc) + tilt * std::sin(kTwoPi * t) / kTwoPi; };
    fol.d_theta = nullptr;
    fol.d_c = nullptr;
  }
  SandwichOptions o;
  o.tol = ctx.params.num("tol", o.tol);
  o.green.n_max = static_cast<int>(ctx.params.integer("n_max", o.green.n_max));
  const SandwichReport r = sandwich_check(ctx.model.map, fol, c, static_cast<int>(ctx.params.integer("samples", 64)), o);
  ctx.report.results = {{"c", c}, {"tilt", tilt}, {"samples", r.samples}, {"max_violation", r.max_violation},
                        {"violations", r.violations.size()}};
  const std::string expect = ctx.params.str("expect", "pass");
  if (expect != "pass" && expect != "fail") throw UsageError("sandwich expect must be pass or fail");
  ctx.report.expect("sandwiched", r.passed(), expect == "pass");
  auto f = ctx.open("sandwich.csv");
  csv::write_header(f, {"theta", "dini_lower", "dini_upper", "s_minus", "s_plus"});
  for (const auto& v : r.violations) csv::write_row(f, {v.theta, v.dini_lower, v.dini_upper, v.s_minus, v.s_plus});
}

void op_straighten(const Context& ctx) {
  const GeneratingGrid g = grid_from(ctx, 257, 129);
  const std::string expect = ctx.params.str("expect", "straightenable");
  if (expect != "straightenable" && expect != "not_straightenable")
    throw UsageError("straighten expect must be straightenable or not_straightenable");
  StraightenOptions o;
  o.monotonicity_tolerance = ctx.params.num("monotonicity_tol", o.monotonicity_tolerance);
  std::optional<StraighteningMap> phi;
  try {
    phi = build_straightening(g, o);
  } catch (const NotStraightenableError& e) {
    ctx.report.results = {{"straightenable", false}, {"c_node", e.c_node()}, {"reason", e.what()},
                          {"window", interval_json(g.window())}};
    ctx.report.expect("straightenable", false, expect == "straightenable");
    return;
  }
  const auto rects = random_rectangles(g.window(), static_cast<int>(ctx.params.integer("rectangles", 32)),
                                       ctx.config.seed);
  const double distortion = area_distortion(*phi, rects, static_cast<int>(ctx.params.integer("refinement", 256)));
  ctx.report.results = {{"straightenable", true}, {"area_distortion", distortion},
                        {"window", interval_json(g.window())}};
  ctx.report.expect("straightenable", true, expect == "straightenable");
  ctx.report.add("area_distortion", distortion, "<=", ctx.params.num("area_tol", 1e-3));
  auto f = ctx.open("straightening.csv");
  write_straightening_csv(*phi, g.window(), 33, 17, f);
}

void op_arnold_liouville(const Context& ctx) {
  const std::string source = ctx.params.str("source", ctx.model.phi ? "analytic" : "numeric");
  const Interval w = ctx.params.window("window", ctx.model.window);
  const long count = ctx.params.integer("samples", 256);
  std::optional<StraighteningMap> phi;
  if (source == "analytic") {
    if (!ctx.model.phi) throw UsageError("no analytic straightening for map kind '" + ctx.config.map.kind + "'");
    phi = ctx.model.phi;
  } else if (source == "numeric") {
    const int n = static_cast<int>(ctx.params.integer("n", 512));
    const GeneratingGrid g = grid_from(ctx, n, n);
    phi = build_straightening(g);
  } else {
    throw UsageError("arnold-liouville source must be analytic or numeric");
  }
  double residual = 0.0;
  if (ctx.model.rho) {
    std::mt19937_64 rng(ctx.config.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<LiftPoint> samples;
    for (long k = 0; k < count; ++k) {
      const double x = unit(rng);
      samples.emplace_back(x, w.lo + w.width() * unit(rng));
    }
    residual = arnold_liouville_residual(ctx.model.map, *phi, ctx.model.rho, samples);
  } else {
    const long nodes = ctx.params.integer("nodes", 17);
    std::vector<double> cs;
    for (long k = 0; k < nodes; ++k) cs.push_back(w.lo + w.width() * static_cast<double>(k) / (nodes - 1));
    const RhoProfile prof = rho_profile(ctx.model.map, ctx.model.foliation, cs, ctx.params.integer("n_max", 100000),
                                        projection(ctx.params));
    residual = arnold_liouville_residual(ctx.model.map, *phi, prof, static_cast<int>(std::max(1L, count / nodes)),
                                         ctx.config.seed);
  }
  const double tol = ctx.params.num("tol", source == "analytic" ? 1e-8 : 1e-4);
  ctx.report.results = {{"source", source}, {"residual", residual}, {"window", interval_json(w)}};
  ctx.report.add("residual", residual, "<=", tol);
  auto f = ctx.open("arnold_liouville.csv");
  csv::write_header(f, {"analytic", "residual"});
  csv::write_row(f, {source == "analytic" ? 1.0 : 0.0, residual});
}

void op_mollify(const Context& ctx) {
  const int n = static_cast<int>(ctx.params.integer("n", 257));
  const Interval w = ctx.params.window("window", {-1.0, 1.0});
  const GeneratingGrid g = build_generating_function(ctx.model.foliation, n, n, w);
  const auto eps = ctx.params.list("epsilons", {0.2, 0.1, 0.05, 0.025});
  const MollifiedFamily fam = mollify(g, eps);
  bool decreasing = true;
  for (std::size_t k = 1; k < fam.c1_errors.size(); ++k) decreasing = decreasing && fam.c1_errors[k] < fam.c1_errors[k - 1];
  const double theta0 = ctx.params.num("theta", 0.3);
  const FoliationSpec fol = ctx.model.foliation;
  const MonotoneConvolution mc =
      monotone_convolution_check([&fol, theta0](double c) { return fol.leaf(theta0, c); }, eps.front(),
                                 {w.lo + eps.front(), w.hi - eps.front()},
                                 static_cast<int>(ctx.params.integer("monotone_samples", 10000)));
  ctx.report.results = {{"epsilons", fam.epsilon_values}, {"c1_errors", fam.c1_errors},
                        {"min_monotone_slope", fam.min_monotone_slope}, {"monotone_min_increment", mc.min_increment}};
  ctx.report.expect("c1_errors_strictly_decreasing", decreasing, true);
  ctx.report.expect("convolution_increasing", mc.increasing, true);
  auto f = ctx.open("mollified.csv");
  write_mollified_csv(fam, f);
}

void op_strange_demo(const Context& ctx) {
  const Params p(ctx.config.map.kind == "strange" ? ctx.config.map.params : json::object());
  const StrangeParams params = strange_from(p);
  const StrangeTwistMap s = strange_twist_map(params);
  const FoliationSpec fol = strange_foliation(params);
  auto& rep = ctx.report;

  const int leaves = static_cast<int>(ctx.params.integer("leaves", 20)), samples = 256;
  auto f = ctx.open("strange_leaves.csv");
  csv::write_header(f, {"c", "invariance_defect"});
  double worst = 0.0;
  for (int l = 0; l < leaves; ++l) {
    const double c = -1.0 + 2.0 * (l + 0.5) / leaves;
    double dev = 0.0;
    for (int i = 0; i < samples; ++i) {
      const double t = static_cast<double>(i) / samples;
      const LiftPoint q = s.map.forward(LiftPoint(t, fol.leaf(t, c)));
      dev = std::max(dev, std::abs(q.y() - fol.leaf(wrap_unit(q.x()), c)));
    }
    csv::write_row(f, {c, dev});
    worst = std::max(worst, dev);
  }
  rep.results["leaf_invariance"] = worst;
  rep.add("leaf_invariance", worst, "<=", 1e-8);

  auto df = ctx.open("strange_df.csv");
  csv::write_header(df, {"R", "max_df_minus_identity"});
  std::vector<double> norms;
  for (double R : {1e-2, 1e-3, 1e-4}) {
    double m = 0.0;
    for (int i = 0; i < 64; ++i)
      for (double r : {R, -R}) m = std::max(m, (map_jacobian(s.map, LiftPoint(i / 64.0, r)) - Jacobian2::Identity()).norm());
    norms.push_back(m);
    csv::write_row(df, {R, m});
  }
  rep.results["df_minus_identity"] = norms;
  // linear decay: each tenfold reduction of R divides the norm by about ten
  rep.add("df_decay_ratio_1", norms[0] / norms[1], ">=", 5.0);
  rep.add("df_decay_ratio_2", norms[1] / norms[2], ">=", 5.0);

  double gluing = 0.0;
  for (int i = 0; i < 64; ++i) {
    const double x = i / 64.0;
    gluing = std::max(gluing, (map_jacobian(s.map, LiftPoint(x, 1e-12)) - map_jacobian(s.map, LiftPoint(x, -1e-12))).norm());
  }
  rep.results["c1_gluing_jump"] = gluing;
  rep.add("c1_gluing_jump", gluing, "<=", 1e-6);

  const double margin = twist_margin(s.map, {0.0, 1.0, 1e-3, 1.0}, {256, 256});
  rep.results["twist_margin"] = margin;
  rep.add("twist_margin", margin, ">", 0.0);

  double flux = 0.0;
  for (double c : {-0.7, -0.2, 0.3, 0.6, 0.9})
    flux = std::max(flux, std::abs(exactness_flux(s.map, SampledCurve::from_function(
                                                                [&fol, c](double t) { return fol.leaf(t, c); }, 4096))));
  rep.results["exactness_flux"] = flux;
  rep.add("exactness_flux", flux, "<=", 1e-6);

  bool straddling_fails = false;
  double c_node = std::nan("");
  try {
    build_straightening(build_generating_function(fol, 129, 129, {-0.5, 0.5}));
  } catch (const NotStraightenableError& e) {
    straddling_fails = true;
    c_node = e.c_node();
  }
  rep.results["not_straightenable_c_node"] = c_node;
  rep.expect("straddling_window_not_straightenable", straddling_fails, true);
}

void op_appendix_a_demo(const Context& ctx) {
  const Params p(ctx.config.map.kind == "appendix_a" ? ctx.config.map.params : json::object());
  const AppendixAFamily fam = appendix_from(p);
  const FoliationSpec fol = fam.foliation(0);
  auto& rep = ctx.report;
  const Interval w{-0.5, 0.5};

  const GeneratingGrid g = build_generating_function(fol, 257, 129, w);
  double u_err = 0.0;
  for (Eigen::Index i = 0; i < g.n_theta(); ++i)
    for (Eigen::Index j = 0; j < g.n_c(); ++j) {
      const double t = g.theta_nodes(i), c = g.c_nodes(j);
      u_err = std::max(u_err, std::abs(g.u(i, j) - fam.zeta(c) * (fam.gamma(t) - fam.gamma(0.0))));
    }
  rep.results["generating_function_error"] = u_err;
  rep.add("generating_function_error", u_err, "<=", 1e-8);

  // h_0 is flat on the plateau at c = 0 and strictly increasing elsewhere
  const double wp = fam.params.plateau_halfwidth, step = 1e-6;
  double plateau = 0.0, outside = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 200; ++i) {
    const double t = static_cast<double>(i) / 200.0;
    const double slope = (fam.h(t + step, 0.0) - fam.h(t - step, 0.0)) / (2.0 * step);
    if (std::abs(t - 0.5) < wp - step) plateau = std::max(plateau, std::abs(slope));
    else if (std::abs(t - 0.5) > wp + 1e-3) outside = std::min(outside, slope);
  }
  rep.results["h0_slope_on_plateau"] = plateau;
  rep.results["h0_min_slope_off_plateau"] = outside;
  rep.add("h0_slope_on_plateau", plateau, "<=", 1e-8);
  rep.add("h0_min_slope_off_plateau", outside, ">", 0.0);

  bool fails = false;
  double c_node = std::nan("");
  try {
    build_straightening(g);
  } catch (const NotStraightenableError& e) {
    fails = true;
    c_node = e.c_node();
  }
  rep.results["not_straightenable_c_node"] = c_node;
  rep.expect("not_straightenable", fails, true);
  rep.add("not_straightenable_at_zero", std::abs(c_node), "<=", 2.0 * g.c_step());

  const LipschitzFit lip = bilipschitz_fit(fol, {-0.25, 0.25});
  rep.results["K_lower"] = lip.K_lower;
  rep.results["K_lower_at"] = {lip.theta_at_lower, lip.c_at_lower};
  rep.expect("bilipschitz", lip.bilipschitz, false);

  auto f = ctx.open("appendix_a.csv");
  csv::write_header(f, {"n", "cauchy_gap"});
  std::vector<double> gaps;
  for (int n : {4, 8, 16, 32}) {
    gaps.push_back(appendix_a_cauchy_gap(fam, n, w));
    csv::write_row(f, {static_cast<double>(n), gaps.back()});
  }
  bool decreasing = true;
  for (std::size_t k = 1; k < gaps.size(); ++k) decreasing = decreasing && gaps[k] < gaps[k - 1];
  rep.results["cauchy_gaps"] = gaps;
  rep.expect("cauchy_gaps_decreasing", decreasing, true);
}

struct Operation {
  const char* anchor;
  void (*body)(const Context&);
  bool needs_model;
};

const std::map<std::string, Operation>& registry() {
  static const std::map<std::string, Operation> ops{
      {"rotation-number", {"rotation number of the circle dynamics on an invariant leaf", op_rotation_number, true}},
      {"rho-profile", {"rotation number as a monotone function of the leaf label", op_rho_profile, true}},
      {"conjugacy", {"semi-conjugacy of each leaf to a rigid rotation", op_conjugacy, true}},
      {"rational-density", {"inverse square root torsion density on a leaf of periodic points", op_rational_density, true}},
      {"generating-function", {"generating function of a foliation by graphs", op_generating_function, true}},
      {"c1-report", {"C1 regularity of the generating function", op_c1_report, true}},
      {"holder-fit", {"one-half Hoelder regularity of invariant foliations", op_holder_fit, true}},
      {"bilipschitz", {"biLipschitz foliations and the mixed partial bound", op_bilipschitz, true}},
      {"mixed-partials", {"equality of mixed partials of the generating function", op_mixed_partials, true}},
      {"green", {"Green bundles along an orbit", op_green, true}},
      {"sandwich", {"invariant graphs lie between the Green bundles", op_sandwich, true}},
      {"straighten", {"straightening homeomorphism of a continuous foliation", op_straighten, true}},
      {"arnold-liouville", {"conjugacy to an integrable shear in straightened coordinates", op_arnold_liouville, true}},
      {"mollify", {"mollified generating functions and monotone convolution", op_mollify, true}},
      {"strange-demo", {"C1 twist map preserving a Lipschitz foliation that cannot be straightened", op_strange_demo, false}},
      {"appendix-a-demo",
       {"foliation straightened by symplectic maps but not by a symplectic homeomorphism", op_appendix_a_demo, false}},
  };
  return ops;
}

void check_positive_tolerances(const json& params, const std::string& where) {
  for (auto it = params.begin(); it != params.end(); ++it) {
    const std::string& key = it.key();
    const bool tolerance = key == "tol" || (key.size() > 4 && key.compare(key.size() - 4, 4, "_tol") == 0);
    if (tolerance && !(it->is_number() && it->get<double>() > 0.0))
      throw UsageError(where + " tolerance '" + key + "' must be a positive number");
  }
}

}  // namespace

const std::vector<std::string>& operations() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [name, op] : registry()) out.push_back(name);
    return out;
  }();
  return names;
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  if (!j.is_object()) throw UsageError("config must be a JSON object");
  ExperimentConfig c;
  try {
    c.operation = j.value("operation", std::string());
    auto descriptor = [](const json& d, Descriptor& out) {
      if (!d.is_object()) throw UsageError("map and foliation descriptors must be objects");
      out.params = json::object();
      for (auto it = d.begin(); it != d.end(); ++it) {
        if (it.key() == "kind")
          out.kind = it->get<std::string>();
        else
          out.params[it.key()] = *it;
      }
    };
    if (j.contains("map")) descriptor(j["map"], c.map);
    if (j.contains("foliation")) descriptor(j["foliation"], c.foliation);
    if (j.contains("parameters")) {
      if (!j["parameters"].is_object()) throw UsageError("parameters must be an object");
      c.parameters = j["parameters"];
    }
    c.output = j.value("output", c.output);
    c.seed = j.value("seed", 0ULL);
  } catch (const json::exception& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
  return c;
}

json ExperimentConfig::to_json() const {
  json m = map.params;
  m["kind"] = map.kind;
  json j{{"operation", operation}, {"map", m}, {"parameters", parameters}, {"output", output}, {"seed", seed}};
  if (!foliation.kind.empty()) {
    json f = foliation.params;
    f["kind"] = foliation.kind;
    j["foliation"] = f;
  }
  return j;
}

void ExperimentConfig::validate() const {
  if (!registry().count(operation)) throw UsageError("unknown operation '" + operation + "'");
  if (!known(kMapKinds, map.kind)) throw UsageError("unknown map kind '" + map.kind + "'");
  if (!foliation.kind.empty() && !known(kFoliationKinds, foliation.kind))
    throw UsageError("unknown foliation kind '" + foliation.kind + "'");
  if (output.empty()) throw UsageError("output directory must not be empty");
  check_positive_tolerances(parameters, "parameter");
  check_positive_tolerances(map.params, "map");
}

int run(const ExperimentConfig& config, std::ostream& log) {
  json summary{{"operation", config.operation}, {"inputs", config.to_json()}};
  Report report;
  fs::path out_dir;
  int code = kPass;
  try {
    config.validate();
    const Operation& op = registry().at(config.operation);
    summary["anchor"] = op.anchor;
    out_dir = config.output;
    fs::create_directories(out_dir);
    Model model;
    if (op.needs_model) model = build_model(config);
    const Context ctx{config, model, Params(config.parameters), out_dir, report, log};
    op.body(ctx);
    code = report.passed() ? kPass : kVerificationFailure;
  } catch (const UsageError& e) {
    log << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const ArgumentError& e) {
    log << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const ParameterError& e) {
    log << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const PreconditionError& e) {
    log << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const DomainError& e) {
    log << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const fs::filesystem_error& e) {
    log << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    // the computation itself refused: a verification failure
    summary["error"] = e.what();
    code = kVerificationFailure;
  }
  summary["results"] = report.results;
  summary["checks"] = report.checks;
  summary["files"] = report.files;
  summary["passed"] = code == kPass;
  summary["exit_code"] = code;
  std::ofstream f(out_dir / "summary.json", std::ios::binary);
  f << summary.dump(2) << '\n';
  for (const auto& c : report.checks)
    log << (c["passed"].get<bool>() ? "ok   " : "FAIL ") << c["name"].get<std::string>() << " = " << c["value"].dump()
        << ' ' << c["comparison"].get<std::string>() << ' ' << c["threshold"].dump() << '\n';
  if (summary.contains("error")) log << "error: " << summary["error"].get<std::string>() << '\n';
  log << config.operation << ": " << (code == kPass ? "pass" : "verification failure") << '\n';
  return code;
}

}  // namespace twistlab::cli
