#include "folia/runs.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <initializer_list>
#include <string>
#include <vector>

#include "folia/cocycle.hpp"
#include "folia/curvature.hpp"
#include "folia/harmonic.hpp"
#include "folia/measures.hpp"
#include "folia/parallel.hpp"

namespace folia {
namespace {

[[noreturn]] void fail_schema(const std::string& msg) {
  throw ConfigError("E_SCHEMA: " + msg);
}
[[noreturn]] void fail_pre(const std::string& msg) {
  throw ConfigError("E_PRECONDITION: " + msg);
}

void check_keys(const json& cfg, std::initializer_list<const char*> allowed,
                const char* where) {
  for (auto it = cfg.begin(); it != cfg.end(); ++it) {
    bool known = false;
    for (const char* k : allowed)
      if (it.key() == k) {
        known = true;
        break;
      }
    if (!known)
      fail_schema(std::string(where) + ": unknown field \"" + it.key() + "\"");
  }
}

double num_field(const json& cfg, const char* key, double dflt) {
  if (!cfg.contains(key)) return dflt;
  const json& v = cfg.at(key);
  if (!v.is_number()) fail_schema(std::string("\"") + key + "\" must be a number");
  return v.get<double>();
}

long int_field(const json& cfg, const char* key, long dflt) {
  if (!cfg.contains(key)) return dflt;
  const json& v = cfg.at(key);
  if (!v.is_number_integer())
    fail_schema(std::string("\"") + key + "\" must be an integer");
  return v.get<long>();
}

bool bool_field(const json& cfg, const char* key, bool dflt) {
  if (!cfg.contains(key)) return dflt;
  const json& v = cfg.at(key);
  if (!v.is_boolean()) fail_schema(std::string("\"") + key + "\" must be a boolean");
  return v.get<bool>();
}

std::uint64_t seed_field(const json& cfg) {
  if (!cfg.contains("seed")) return 1;
  const json& v = cfg.at("seed");
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<long long>() >= 0)
    return std::uint64_t(v.get<long long>());
  fail_schema("\"seed\" must be a non-negative integer");
}

// Declared pass/fail thresholds; every check lands in report.checks.
struct Checker {
  json t;
  json flags = json::object();
  bool pass = true;

  explicit Checker(const json& cfg, std::initializer_list<const char*> allowed) {
    t = cfg.contains("thresholds") ? cfg.at("thresholds") : json::object();
    if (!t.is_object()) fail_schema("\"thresholds\" must be an object");
    check_keys(t, allowed, "thresholds");
    for (auto it = t.begin(); it != t.end(); ++it)
      if (!it.value().is_number())
        fail_schema("threshold \"" + it.key() + "\" must be a number");
  }
  void at_most(const char* name, double value) {
    if (!t.contains(name)) return;
    const bool ok = value <= t.at(name).get<double>();
    flags[name] = ok;
    pass = pass && ok;
  }
  void at_least(const char* name, double value) {
    if (!t.contains(name)) return;
    const bool ok = value >= t.at(name).get<double>();
    flags[name] = ok;
    pass = pass && ok;
  }
  void equals(const char* name, long value) {
    if (!t.contains(name)) return;
    const bool ok = value == long(t.at(name).get<double>());
    flags[name] = ok;
    pass = pass && ok;
  }
  void near(const char* expect, const char* tol, double value, double dtol) {
    if (!t.contains(expect)) return;
    const double lim = t.contains(tol) ? t.at(tol).get<double>() : dtol;
    const bool ok = std::abs(value - t.at(expect).get<double>()) <= lim;
    flags[expect] = ok;
    pass = pass && ok;
  }
};

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json group_echo(const json& cfg) {
  return cfg.contains("group") ? cfg.at("group") : json("genus2");
}
json rep_echo(const json& cfg) {
  return cfg.contains("rep") ? cfg.at("rep") : json("fuchsian");
}

FuchsianGroup load_group(const json& cfg, bool require_pass = true) {
  return group_from_json(group_echo(cfg), require_pass);
}
Representation load_rep(const json& cfg, const FuchsianGroup& G) {
  return representation_from_json(rep_echo(cfg), G);
}

json estimate_json(const ExponentEstimate& e) {
  json out{{"mean", e.mean},   {"stderr", e.stderr_}, {"ci95", e.ci95()},
           {"N", e.N},         {"T", e.T},            {"dt", e.dt},
           {"per_orbit", e.per_orbit}};
  return out;
}

std::string per_orbit_csv(const ExponentEstimate& e) {
  std::string csv = "orbit,exponent\n";
  for (std::size_t i = 0; i < e.per_orbit.size(); ++i)
    csv += std::to_string(i) + "," + fmt17(e.per_orbit[i]) + "\n";
  return csv;
}

std::string kv_csv(const json& results) {
  std::string csv = "key,value\n";
  for (auto it = results.begin(); it != results.end(); ++it) {
    if (it.value().is_number())
      csv += it.key() + "," + fmt17(it.value().get<double>()) + "\n";
    else if (it.value().is_boolean())
      csv += it.key() + "," + (it.value().get<bool>() ? "1" : "0") + "\n";
  }
  return csv;
}

struct Ctx {
  const json& cfg;
  int workers = 1;
  std::uint64_t seed = 1;
  json echo = json::object();
  json results = json::object();
  bool pass = true;
  long steps = 0;
  RunOutcome* out = nullptr;
};

void finish_thresholds(Ctx& c, Checker& chk) {
  if (!chk.t.empty()) c.echo["thresholds"] = chk.t;
  if (!chk.flags.empty()) c.results["checks"] = chk.flags;
  c.pass = chk.pass;
}

void maybe_trajectory(Ctx& c, const FuchsianGroup& G, const Representation& rep,
                      bool brownian, double T, double dt) {
  if (!c.cfg.contains("trajectory_out")) return;
  const json& v = c.cfg.at("trajectory_out");
  if (!v.is_string()) fail_schema("\"trajectory_out\" must be a path string");
  const double Tcap = std::min(T, 50.0);  // keep sample paths plot-sized
  std::string csv;
  if (brownian) {
    csv = brownian_trajectory_csv(G, rep, c.seed, Tcap, dt);
  } else {
    Rng rng = Rng::stream(c.seed, 0);
    csv = trajectory_csv(G, rep, random_state(G, rng), Tcap, dt);
  }
  write_text_atomic(v.get<std::string>(), csv);
}

// ---------------------------------------------------------------- exponent

void cmd_exponent(Ctx& c, bool brownian) {
  check_keys(c.cfg,
             {"group", "rep", "seed", "threads", "T", "dt", "N",
              "trajectory_out", "thresholds"},
             "config");
  const double T = num_field(c.cfg, "T", brownian ? 1000.0 : 2000.0);
  const double dt = num_field(c.cfg, "dt", brownian ? 1e-3 : 0.05);
  const long N = int_field(c.cfg, "N", brownian ? 200 : 100);
  if (T < 100.0) fail_pre("\"T\" must be at least 100");
  if (brownian ? !(dt > 0 && dt <= 1e-2) : !(dt > 0 && dt <= 1.0))
    fail_pre(brownian ? "\"dt\" must lie in (0, 1e-2]" : "\"dt\" must lie in (0, 1]");
  if (N < 1) fail_pre("\"N\" must be at least 1");
  Checker chk(c.cfg, {"expect", "tol", "max_ci95"});

  const FuchsianGroup G = load_group(c.cfg);
  const Representation rep = load_rep(c.cfg, G);

  const ExponentEstimate e =
      brownian ? brownian_lyapunov(G, rep, c.seed, T, dt, int(N), c.workers)
               : transverse_lyapunov(G, rep, c.seed, T, dt, int(N), c.workers);

  c.echo = {{"group", group_echo(c.cfg)}, {"rep", rep_echo(c.cfg)},
            {"seed", c.seed},             {"T", T},
            {"dt", dt},                   {"N", N}};
  c.results = estimate_json(e);
  c.steps = N * long(T / dt + (brownian ? 0.5 : 1e-9));
  chk.near("expect", "tol", e.mean, 0.05);
  chk.at_most("max_ci95", e.ci95());
  finish_thresholds(c, chk);
  c.out->csv = per_orbit_csv(e);
  c.out->has_csv = true;
  maybe_trajectory(c, G, rep, brownian, T, dt);
}

// ------------------------------------------------------------------- gibbs

std::vector<EmpiricalMeasure> start_measures(const FuchsianGroup& G,
                                             const Representation& rep, long N,
                                             double T, double dt,
                                             std::uint64_t seed, int workers,
                                             std::uint64_t index_base) {
  std::vector<EmpiricalMeasure> ms;
  ms.reserve(std::size_t(N));
  ordered_map_fold<EmpiricalMeasure>(
      std::size_t(N), std::size_t(workers),
      [&](std::size_t i) {
        Rng rng = Rng::stream(seed, index_base + i);
        return birkhoff_empirical(G, rep, random_state(G, rng), T, dt);
      },
      [&](std::size_t, EmpiricalMeasure& m) { ms.push_back(std::move(m)); });
  return ms;
}

double pairwise_bl_median(const std::vector<EmpiricalMeasure>& ms, double& max_out) {
  std::vector<double> d;
  max_out = 0;
  for (std::size_t i = 0; i < ms.size(); ++i)
    for (std::size_t j = i + 1; j < ms.size(); ++j) {
      d.push_back(bl_distance(ms[i], ms[j]));
      max_out = std::max(max_out, d.back());
    }
  if (d.empty()) return 0.0;
  std::sort(d.begin(), d.end());
  const std::size_t n = d.size();
  return n % 2 ? d[n / 2] : 0.5 * (d[n / 2 - 1] + d[n / 2]);
}

void cmd_gibbs(Ctx& c) {
  check_keys(c.cfg,
             {"group", "rep", "seed", "threads", "T", "dt", "N", "cluster_eps",
              "invariance_shift", "embed_measure", "thresholds"},
             "config");
  const double T = num_field(c.cfg, "T", 5000.0);
  const double dt = num_field(c.cfg, "dt", 0.05);
  const long N = int_field(c.cfg, "N", 50);
  const double eps = num_field(c.cfg, "cluster_eps", 0.1);
  const double shift = num_field(c.cfg, "invariance_shift", 1.0);
  const bool embed = bool_field(c.cfg, "embed_measure", false);
  if (!(T > 0)) fail_pre("\"T\" must be positive");
  if (!(dt > 0 && dt <= 1.0)) fail_pre("\"dt\" must lie in (0, 1]");
  if (N < 1) fail_pre("\"N\" must be at least 1");
  if (!(eps > 0)) fail_pre("\"cluster_eps\" must be positive");
  if (shift < 0 || shift > T / 10)
    fail_pre("\"invariance_shift\" must lie in [0, T/10]");
  Checker chk(c.cfg, {"expect_attractors", "max_bl_median",
                      "max_invariance_defect", "max_empty_cells"});

  const FuchsianGroup G = load_group(c.cfg);
  const Representation rep = load_rep(c.cfg, G);

  const std::vector<EmpiricalMeasure> ms =
      start_measures(G, rep, N, T, dt, c.seed, c.workers, 0);
  const AttractorSet att = classify_attractors(ms, eps);
  double bl_max = 0;
  const double bl_med = pairwise_bl_median(ms, bl_max);

  EmpiricalMeasure pooled(ms[0].grid);
  for (const EmpiricalMeasure& m : ms) pooled.accumulate(m, 1.0);
  pooled.finish();

  const std::vector<std::uint8_t> mask = base32_domain_mask(G.domain);
  const int domain_cells =
      int(std::count(mask.begin(), mask.end(), std::uint8_t(1)));
  const int empty = empty_base32_cells(pooled, mask);

  const long n = long(T / dt + 1e-9);
  c.steps = N * n;
  double defect = -1;
  if (shift > 0) {
    defect = invariance_defect(G, rep, ms[0], shift);
    c.steps += n + long(shift / dt + 0.5);
  }

  c.echo = {{"group", group_echo(c.cfg)},
            {"rep", rep_echo(c.cfg)},
            {"seed", c.seed},
            {"T", T},
            {"dt", dt},
            {"N", N},
            {"cluster_eps", eps},
            {"invariance_shift", shift},
            {"embed_measure", embed}};
  c.results = {{"attractor_count", int(att.representatives.size())},
               {"bl_median", bl_med},
               {"bl_max", bl_max},
               {"min_rep_separation", att.min_rep_separation},
               {"empty_domain_cells", empty},
               {"domain_cells", domain_cells},
               {"endpoint_bwd", pooled.endpoint_concentration(true)},
               {"endpoint_fwd", pooled.endpoint_concentration(false)},
               {"N", N},
               {"T", T},
               {"dt", dt}};
  if (shift > 0) c.results["invariance_defect"] = defect;
  if (embed) c.results["measure"] = measure_to_json(pooled);

  chk.equals("expect_attractors", long(att.representatives.size()));
  chk.at_most("max_bl_median", bl_med);
  if (shift > 0) chk.at_most("max_invariance_defect", defect);
  chk.at_most("max_empty_cells", empty);
  finish_thresholds(c, chk);

  c.out->csv = measure_to_csv(pooled);
  c.out->has_csv = true;
  c.out->svg = measure_svg_fiber_heatmap(pooled);
  c.out->has_svg = true;
}

// -------------------------------------------------------------- visibility

void cmd_visibility(Ctx& c) {
  check_keys(c.cfg,
             {"group", "rep", "seed", "threads", "T", "dt", "n_dirs", "starts",
              "cluster_eps", "x", "thresholds"},
             "config");
  const double T = num_field(c.cfg, "T", 2000.0);
  const double dt = num_field(c.cfg, "dt", 0.05);
  const long n_dirs = int_field(c.cfg, "n_dirs", 256);
  const long starts = int_field(c.cfg, "starts", 12);
  // Labeling radius: must sit above the single-orbit sampling noise floor of
  // the BL estimator (~9.3/sqrt(T), so ~0.21 at the default T); an orbit is
  // labeled by the attractor it converges to, not by histogram noise.
  const double eps = num_field(c.cfg, "cluster_eps", 0.3);
  cplx x{0.0, 1.0};
  if (c.cfg.contains("x")) {
    const json& v = c.cfg.at("x");
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
      fail_schema("\"x\" must be [re, im]");
    x = cplx(v[0].get<double>(), v[1].get<double>());
  }
  if (!(T > 0)) fail_pre("\"T\" must be positive");
  if (!(dt > 0 && dt <= 1.0)) fail_pre("\"dt\" must lie in (0, 1]");
  if (n_dirs < 1) fail_pre("\"n_dirs\" must be at least 1");
  if (starts < 1) fail_pre("\"starts\" must be at least 1");
  if (!(eps > 0)) fail_pre("\"cluster_eps\" must be positive");
  if (!(x.imag() > 0)) fail_pre("\"x\" must have positive imaginary part");
  Checker chk(c.cfg, {"expect_attractors", "max_unlabeled"});

  const FuchsianGroup G = load_group(c.cfg);
  const Representation rep = load_rep(c.cfg, G);

  const std::vector<EmpiricalMeasure> ms =
      start_measures(G, rep, starts, T, dt, c.seed, c.workers, 1000000);
  const AttractorSet att = classify_attractors(ms, eps);
  const VisibilityEstimate vis =
      visibility(G, rep, att, x, int(n_dirs), T, dt, c.seed, c.workers);

  c.echo = {{"group", group_echo(c.cfg)},
            {"rep", rep_echo(c.cfg)},
            {"seed", c.seed},
            {"T", T},
            {"dt", dt},
            {"n_dirs", n_dirs},
            {"starts", starts},
            {"cluster_eps", eps},
            {"x", json::array({x.real(), x.imag()})}};
  c.results = {{"attractor_count", int(att.representatives.size())},
               {"counts", vis.counts},
               {"f", vis.f},
               {"half_width", vis.half_width},
               {"unlabeled_fraction", vis.unlabeled_fraction},
               {"min_rep_separation", att.min_rep_separation},
               {"n_dirs", n_dirs},
               {"T", T},
               {"dt", dt}};
  c.steps = (starts + n_dirs) * long(T / dt + 1e-9);
  chk.equals("expect_attractors", long(att.representatives.size()));
  chk.at_most("max_unlabeled", vis.unlabeled_fraction);
  finish_thresholds(c, chk);

  std::string csv = "attractor,count,f,half_width\n";
  for (std::size_t i = 0; i < vis.f.size(); ++i)
    csv += std::to_string(i) + "," + std::to_string(vis.counts[i]) + "," +
           fmt17(vis.f[i]) + "," + fmt17(vis.half_width[i]) + "\n";
  c.out->csv = csv;
  c.out->has_csv = true;
}

// -------------------------------------------------------------- compare-pm

void cmd_compare_pm(Ctx& c) {
  check_keys(c.cfg,
             {"group", "rep", "seed", "threads", "T", "dt", "N",
              "embed_measure", "thresholds"},
             "config");
  const double T = num_field(c.cfg, "T", 2000.0);
  const double dt = num_field(c.cfg, "dt", 0.05);
  const long N = int_field(c.cfg, "N", 100);
  const bool embed = bool_field(c.cfg, "embed_measure", false);
  if (!(T > 0)) fail_pre("\"T\" must be positive");
  if (!(dt > 0 && dt <= 1.0)) fail_pre("\"dt\" must lie in (0, 1]");
  if (N < 1) fail_pre("\"N\" must be at least 1");
  Checker chk(c.cfg,
              {"max_tv", "min_tv", "min_plus_near_bwd", "min_plus_near_fwd",
               "min_minus_near_bwd", "min_minus_near_fwd"});

  const FuchsianGroup G = load_group(c.cfg);
  const Representation rep = load_rep(c.cfg, G);
  const ReversalComparison r =
      compare_time_reversal(G, rep, T, dt, int(N), c.seed, c.workers);

  c.echo = {{"group", group_echo(c.cfg)}, {"rep", rep_echo(c.cfg)},
            {"seed", c.seed},             {"T", T},
            {"dt", dt},                   {"N", N},
            {"embed_measure", embed}};
  c.results = {{"tv", r.tv},
               {"plus_near_bwd", r.plus_near_bwd},
               {"plus_near_fwd", r.plus_near_fwd},
               {"minus_near_bwd", r.minus_near_bwd},
               {"minus_near_fwd", r.minus_near_fwd},
               {"N", N},
               {"T", T},
               {"dt", dt}};
  if (embed) {
    c.results["mu_plus"] = measure_to_json(r.mu_plus);
    c.results["mu_minus"] = measure_to_json(r.mu_minus);
  }
  c.steps = 2 * N * long(T / dt + 1e-9);
  chk.at_most("max_tv", r.tv);
  chk.at_least("min_tv", r.tv);
  chk.at_least("min_plus_near_bwd", r.plus_near_bwd);
  chk.at_least("min_plus_near_fwd", r.plus_near_fwd);
  chk.at_least("min_minus_near_bwd", r.minus_near_bwd);
  chk.at_least("min_minus_near_fwd", r.minus_near_fwd);
  finish_thresholds(c, chk);

  c.out->csv = measure_to_csv(r.mu_plus);
  c.out->has_csv = true;
  c.out->svg = measure_svg_fiber_heatmap(r.mu_plus);
  c.out->has_svg = true;
}

// ---------------------------------------------------------- harmonic-check

void cmd_harmonic_check(Ctx& c) {
  check_keys(c.cfg,
             {"seed", "threads", "h_kind", "xi0", "gx", "gy", "grid",
              "boundary_nodes", "margin", "refine", "thresholds"},
             "config");
  CandelParams p;
  std::string kind = "uniform";
  if (c.cfg.contains("h_kind")) {
    if (!c.cfg.at("h_kind").is_string()) fail_schema("\"h_kind\" must be a string");
    kind = c.cfg.at("h_kind").get<std::string>();
  }
  if (kind == "uniform")
    p.h_kind = CandelParams::uniform;
  else if (kind == "point_mass")
    p.h_kind = CandelParams::point_mass;
  else
    fail_schema("\"h_kind\" must be \"uniform\" or \"point_mass\"");
  p.xi0 = num_field(c.cfg, "xi0", 0.0);
  p.gx = num_field(c.cfg, "gx", 1.0);
  p.gy = num_field(c.cfg, "gy", 0.0);
  p.grid_n = int(int_field(c.cfg, "grid", 256));
  p.boundary_nodes = int(int_field(c.cfg, "boundary_nodes", 1024));
  p.margin = num_field(c.cfg, "margin", 0.02);
  p.workers = c.workers;
  const bool refine = bool_field(c.cfg, "refine", false);
  if (p.grid_n < 64) fail_pre("\"grid\" must be at least 64");
  if (p.boundary_nodes < 4) fail_pre("\"boundary_nodes\" must be at least 4");
  if (!(p.margin > 0 && p.margin <= 0.5))
    fail_pre("\"margin\" must lie in (0, 0.5]");
  Checker chk(c.cfg, {"max_residual", "max_refinement_ratio"});

  const CandelReport r = candel_identity_residual(p);

  c.echo = {{"h_kind", kind}, {"xi0", p.xi0},
            {"gx", p.gx},     {"gy", p.gy},
            {"grid", p.grid_n}, {"boundary_nodes", p.boundary_nodes},
            {"margin", p.margin}, {"refine", refine}};
  c.results = {{"lhs", r.lhs},
               {"rhs", r.rhs},
               {"residual", r.residual},
               {"grid", r.grid},
               {"boundary_nodes", r.boundary_nodes}};
  c.steps = long(p.grid_n) * p.grid_n;
  chk.at_most("max_residual", r.residual);
  if (refine) {
    CandelParams p2 = p;
    p2.grid_n *= 2;
    p2.boundary_nodes *= 2;
    const CandelReport r2 = candel_identity_residual(p2);
    c.results["residual_refined"] = r2.residual;
    c.results["refinement_ratio"] =
        r.residual > 0 ? r2.residual / r.residual : 0.0;
    c.steps += long(p2.grid_n) * p2.grid_n;
    chk.at_most("max_refinement_ratio",
                r.residual > 0 ? r2.residual / r.residual : 0.0);
  }
  finish_thresholds(c, chk);
  c.out->csv = kv_csv(c.results);
  c.out->has_csv = true;
}

// ------------------------------------------------------- distortion, psi-u

struct MetricSetup {
  ConformalMetric metric;
  double eps, word_radius, support_radius;
};

MetricSetup metric_from_cfg(Ctx& c) {
  const double eps = num_field(c.cfg, "epsilon", 0.05);
  const long k = int_field(c.cfg, "word_radius", 3);
  const double R = num_field(c.cfg, "support_radius", 2.0);
  if (!(eps >= 0 && eps <= 0.1)) fail_pre("\"epsilon\" must lie in [0, 0.1]");
  if (k < 2 || k > 5) fail_pre("\"word_radius\" must lie in [2, 5]");
  if (!(R > 0.1 && R <= 3.0)) fail_pre("\"support_radius\" must lie in (0.1, 3]");
  const FuchsianGroup G = load_group(c.cfg);
  return MetricSetup{build_invariant_bump(G, eps, int(k), R), eps, double(k), R};
}

void cmd_distortion(Ctx& c) {
  check_keys(c.cfg,
             {"group", "seed", "threads", "epsilon", "word_radius",
              "support_radius", "n_pairs", "d_target", "T", "thresholds"},
             "config");
  const long n_pairs = int_field(c.cfg, "n_pairs", 8);
  const double d_target = num_field(c.cfg, "d_target", 0.1);
  const double T = num_field(c.cfg, "T", 100.0);
  if (n_pairs < 1) fail_pre("\"n_pairs\" must be at least 1");
  if (!(d_target > 0 && d_target <= 0.5))
    fail_pre("\"d_target\" must lie in (0, 0.5]");
  if (T < 50.0) fail_pre("\"T\" must be at least 50");
  Checker chk(c.cfg, {"max_C", "max_stability"});

  const MetricSetup ms = metric_from_cfg(c);
  std::vector<UnstablePair> pairs;
  pairs.reserve(std::size_t(n_pairs));
  ordered_map_fold<UnstablePair>(
      std::size_t(n_pairs), std::size_t(c.workers),
      [&](std::size_t i) {
        Rng rng = Rng::stream(c.seed, i);
        const cplx z = ms.metric.group.domain.sample_point(rng);
        const double theta = rng.uniform(0.0, 2.0 * M_PI);
        return make_unstable_pair(ms.metric, z, theta, d_target);
      },
      [&](std::size_t, UnstablePair& p) { pairs.push_back(std::move(p)); });

  const DistortionReport r1 = distortion_constant(ms.metric, pairs, T);
  const DistortionReport r2 = distortion_constant(ms.metric, pairs, 2 * T);
  const double denom = std::max(std::abs(r1.C), std::abs(r2.C));
  const double stability = denom > 0 ? std::abs(r1.C - r2.C) / denom : 0.0;

  c.echo = {{"group", group_echo(c.cfg)},
            {"seed", c.seed},
            {"epsilon", ms.eps},
            {"word_radius", long(ms.word_radius)},
            {"support_radius", ms.support_radius},
            {"n_pairs", n_pairs},
            {"d_target", d_target},
            {"T", T}};
  c.results = {{"C", r1.C},
               {"C_2T", r2.C},
               {"stability", stability},
               {"kappa0", ms.metric.kappa0},
               {"kappa1", ms.metric.kappa1},
               {"invariance_residual", ms.metric.invariance_residual},
               {"distances", r1.distances},
               {"log_ratios", r1.log_ratios},
               {"n_pairs", n_pairs},
               {"T", T}};
  for (const UnstablePair& p : pairs)
    c.steps += long(p.profile_x.size()) + long(p.profile_y.size());
  chk.at_most("max_C", r1.C);
  chk.at_most("max_stability", stability);
  finish_thresholds(c, chk);

  std::string csv = "pair,distance,log_ratio\n";
  for (std::size_t i = 0; i < r1.distances.size(); ++i)
    csv += std::to_string(i) + "," + fmt17(r1.distances[i]) + "," +
           fmt17(r1.log_ratios[i]) + "\n";
  c.out->csv = csv;
  c.out->has_csv = true;
}

void cmd_psi_u(Ctx& c) {
  check_keys(c.cfg,
             {"group", "seed", "threads", "epsilon", "word_radius",
              "support_radius", "d_target", "T", "thresholds"},
             "config");
  const double d_target = num_field(c.cfg, "d_target", 0.1);
  const double T = num_field(c.cfg, "T", 100.0);
  if (!(d_target > 0 && d_target <= 0.5))
    fail_pre("\"d_target\" must lie in (0, 0.5]");
  if (T < 50.0) fail_pre("\"T\" must be at least 50");
  Checker chk(c.cfg, {"max_defect", "psi_tol"});

  const MetricSetup ms = metric_from_cfg(c);
  Rng rng = Rng::stream(c.seed, 0);
  const cplx z = ms.metric.group.domain.sample_point(rng);
  const double theta = rng.uniform(0.0, 2.0 * M_PI);
  const UnstablePair pair = make_unstable_pair(ms.metric, z, theta, d_target);
  const PsiUReport r = psi_u(ms.metric, pair, T);

  c.echo = {{"group", group_echo(c.cfg)},
            {"seed", c.seed},
            {"epsilon", ms.eps},
            {"word_radius", long(ms.word_radius)},
            {"support_radius", ms.support_radius},
            {"d_target", d_target},
            {"T", T}};
  c.results = {{"psi", r.psi},
               {"log_psi", r.log_psi},
               {"defect", r.defect},
               {"past_residual", r.past_residual},
               {"pair_distance", pair.d},
               {"branch_depth", pair.T_branch},
               {"kappa0", ms.metric.kappa0},
               {"kappa1", ms.metric.kappa1},
               {"invariance_residual", ms.metric.invariance_residual},
               {"T", T}};
  c.steps = long(pair.profile_x.size()) + long(pair.profile_y.size());
  chk.at_most("max_defect", r.defect);
  if (chk.t.contains("psi_tol")) {  // |psi - 1| bound for the flat case
    const bool ok = std::abs(r.psi - 1.0) <= chk.t.at("psi_tol").get<double>();
    chk.flags["psi_tol"] = ok;
    chk.pass = chk.pass && ok;
  }
  finish_thresholds(c, chk);
  c.out->csv = kv_csv(c.results);
  c.out->has_csv = true;
}

// ------------------------------------------------------------ verify-group

void cmd_verify_group(Ctx& c) {
  check_keys(c.cfg, {"group", "seed", "threads", "tol"}, "config");
  const double tol = num_field(c.cfg, "tol", 1e-9);
  if (!(tol > 0)) fail_pre("\"tol\" must be positive");

  const FuchsianGroup G = load_group(c.cfg, /*require_pass=*/false);
  const GroupVerification v = verify_group(G, tol);

  c.echo = {{"group", group_echo(c.cfg)}, {"tol", tol}};
  c.results = {{"preset", G.name},
               {"relator_residual", v.relator_residual},
               {"max_side_residual", v.max_side_residual},
               {"side_residuals", v.side_residuals},
               {"area", v.area},
               {"area_defect", v.area_defect},
               {"min_abs_trace", v.min_abs_trace},
               {"hyperbolic_generators", v.hyperbolic_generators},
               {"pass", v.pass}};
  c.steps = long(G.side_elems.size());
  c.pass = v.pass;
  c.out->csv = kv_csv(c.results);
  c.out->has_csv = true;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {
      "exponent",   "brownian-exponent", "gibbs",
      "visibility", "compare-pm",        "harmonic-check",
      "distortion", "psi-u",             "verify-group"};
  return names;
}

RunOutcome run_command(const std::string& command, json cfg) {
  if (!cfg.is_object()) fail_schema("config must be a JSON object");
  const auto t0 = std::chrono::steady_clock::now();

  RunOutcome out;
  Ctx c{cfg, int(resolve_workers(int(int_field(cfg, "threads", 0)))),
        seed_field(cfg)};
  c.out = &out;

  if (command == "exponent")
    cmd_exponent(c, false);
  else if (command == "brownian-exponent")
    cmd_exponent(c, true);
  else if (command == "gibbs")
    cmd_gibbs(c);
  else if (command == "visibility")
    cmd_visibility(c);
  else if (command == "compare-pm")
    cmd_compare_pm(c);
  else if (command == "harmonic-check")
    cmd_harmonic_check(c);
  else if (command == "distortion")
    cmd_distortion(c);
  else if (command == "psi-u")
    cmd_psi_u(c);
  else if (command == "verify-group")
    cmd_verify_group(c);
  else
    fail_schema("unknown command \"" + command + "\"");

  out.report = json{{"command", command},
                    {"config", c.echo},
                    {"digest", config_digest(json{{"command", command},
                                                  {"config", c.echo}})},
                    {"results", c.results},
                    {"pass", c.pass},
                    {"steps", c.steps}};
  const auto t1 = std::chrono::steady_clock::now();
  out.runinfo = json{
      {"command", command},
      {"wall_ms",
       std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count()},
      {"workers", c.workers}};
  out.exit_code = c.pass ? 0 : 1;
  return out;
}

}  // namespace folia
