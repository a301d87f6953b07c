#pragma once

// Command-line driver: config parsing, subcommand dispatch, artifact output.
// Exit codes: 0 ok, 1 failed check, 2 bad config/input, 3 completed with a flag.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "amp_sheet/campaigns.hpp"
#include "amp_sheet/commutators.hpp"
#include "amp_sheet/errors.hpp"
#include "amp_sheet/estimates.hpp"
#include "amp_sheet/io.hpp"
#include "amp_sheet/nash_moser.hpp"
#include "amp_sheet/solver.hpp"
#include "amp_sheet/version.hpp"

namespace amp_sheet::cli {

enum ExitCode : int { ok = 0, check_failed = 1, config_error = 2, flagged = 3 };

using nlohmann::json;

// ---------------------------------------------------------------------------
// Run configuration

struct GrowthSection {
  std::vector<int> modes{4, 8, 16};
  double eps = 1e-8;
};

struct LinearizedSection {
  std::vector<TrigMode> base;
  std::vector<TrigMode> forcing{{1, 1.0, 0.0}};
  std::string profile = "constant";  // constant | bump | sin
  std::string forcing_csv;           // overrides forcing/profile when set
};

struct IdentitiesSection {
  int samples = 100;
  int n = 128;
};

struct EstimatesSection {
  int samples = 20;
  std::vector<double> gammas{2.0, 4.0, 8.0, 16.0};
  std::vector<int> ms{1, 2, 3};
  int m = 2;  // phitt / der2
  int nu = 2;
  double gamma = 1.0;
  int grid_n = 32;
  double T = 2.0;
  int steps = 800;
  double base_scale = 0.05;
  std::vector<int> resolutions{128, 256};
};

struct CommutatorsSection {
  std::string lemma = "all";
  std::optional<double> param;
  int samples = 200;
  std::vector<int> resolutions{256, 512};
  int p = 1;
  double rho = 0.0;
  double drift_tolerance = 0.10;
};

struct RunConfig {
  SimConfig sim;
  std::vector<TrigMode> phi0, phi1;
  int snapshot_every = 1;
  IterationConfig nash_moser;  // its sim block is replaced by `sim`
  GrowthSection growth;
  LinearizedSection linearized;
  IdentitiesSection identities;
  EstimatesSection estimates;
  CommutatorsSection commutators;

  CauchyData data() const {
    TorusGrid g = sim.grid();
    return CauchyData(from_modes(g, phi0), from_modes(g, phi1));
  }
  IterationConfig iteration() const {
    IterationConfig c = nash_moser;
    c.sim = sim;
    return c;
  }

  void validate() const {
    sim.validate();
    iteration().validate();
    auto fail = [](const std::string& m) { throw ConfigError(m); };
    auto band = [&](const std::vector<TrigMode>& ms, const char* name) {
      for (const auto& m : ms)
        if (m.k < 0 || m.k > sim.grid().max_mode())
          fail(std::string(name) + ": mode " + std::to_string(m.k) + " outside 0..K");
    };
    band(phi0, "data.phi0");
    band(phi1, "data.phi1");
    band(linearized.base, "linearized.base");
    band(linearized.forcing, "linearized.forcing");
    if (snapshot_every < 1) fail("snapshot_every must be >= 1");
    if (growth.modes.empty()) fail("growth.modes must not be empty");
    if (!(growth.eps > 0.0)) fail("growth.eps must be positive");
    std::set<std::string> profiles{"constant", "bump", "sin"};
    if (!profiles.count(linearized.profile)) fail("linearized.profile must be constant, bump or sin");
    if (identities.samples < 1) fail("identities.samples must be >= 1");
    if (identities.n < 8 || identities.n % 2) fail("identities.n must be even and >= 8");
    if (estimates.samples < 1) fail("estimates.samples must be >= 1");
    if (estimates.gammas.empty()) fail("estimates.gammas must not be empty");
    for (double g : estimates.gammas)
      if (!(g >= 1.0)) fail("estimates.gammas entries must be >= 1");
    for (int m : estimates.ms)
      if (m < 1) fail("estimates.ms entries must be >= 1");
    if (estimates.m < 1) fail("estimates.m must be >= 1");
    if (estimates.nu < 1) fail("estimates.nu must be >= 1");
    if (estimates.grid_n < 8 || estimates.grid_n % 2) fail("estimates.grid_n must be even and >= 8");
    if (!(estimates.T > 0.0) || estimates.steps < 4) fail("estimates.T must be positive and steps >= 4");
    if (estimates.resolutions.empty() || commutators.resolutions.empty()) fail("resolutions must not be empty");
    for (int n : estimates.resolutions)
      if (n < 8 || n % 2) fail("estimates.resolutions entries must be even and >= 8");
    for (int n : commutators.resolutions)
      if (n < 16 || n % 2) fail("commutators.resolutions entries must be even and >= 16");
    if (commutators.lemma != "all") parse_lemma(commutators.lemma);
    if (commutators.samples < 1) fail("commutators.samples must be >= 1");
    if (commutators.p < 1) fail("commutators.p must be >= 1");
    if (commutators.rho < 0.0) fail("commutators.rho must be >= 0");
  }
};

namespace detail {

inline void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : keys) known = known || it.key() == k;
    if (!known) throw ConfigError("unknown config field '" + (where.empty() ? "" : where + ".") + it.key() + "'");
  }
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) return;
  const std::string name = where.empty() ? key : where + "." + key;
  try {
    if constexpr (std::is_same_v<T, int> || std::is_same_v<T, long long>) {
      if (!it->is_number_integer()) throw ConfigError(name + ": expected an integer");
    } else if constexpr (std::is_same_v<T, std::vector<int>>) {
      if (!it->is_array()) throw ConfigError(name + ": expected an array");
      for (const auto& e : *it)
        if (!e.is_number_integer()) throw ConfigError(name + ": expected integers");
    } else if constexpr (std::is_same_v<T, double>) {
      if (!it->is_number()) throw ConfigError(name + ": expected a number");
    }
    out = it->get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(name + ": " + e.what());
  }
}

inline std::vector<TrigMode> read_modes(const json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + ": expected an array of {k, a, b}");
  std::vector<TrigMode> out;
  for (const auto& e : j) {
    check_keys(e, where, {"k", "a", "b"});
    TrigMode m{0, 0.0, 0.0};
    read(e, "k", m.k, where);
    read(e, "a", m.a, where);
    read(e, "b", m.b, where);
    out.push_back(m);
  }
  return out;
}

inline json modes_json(const std::vector<TrigMode>& ms) {
  json a = json::array();
  for (const auto& m : ms) a.push_back({{"k", m.k}, {"a", m.a}, {"b", m.b}});
  return a;
}

}  // namespace detail

inline RunConfig parse_config(const json& j) {
  using detail::check_keys;
  using detail::read;
  RunConfig c;
  check_keys(j, "", {"sim", "data", "snapshot_every", "nash_moser", "growth", "linearized", "identities", "estimates",
                     "commutators"});
  if (j.contains("sim")) {
    const auto& s = j["sim"];
    check_keys(s, "sim", {"mu", "delta", "grid_n", "galerkin_N", "dt", "t_final", "gamma", "dealias", "cfl_safety",
                          "seed"});
    read(s, "mu", c.sim.mu, "sim");
    read(s, "delta", c.sim.delta, "sim");
    read(s, "grid_n", c.sim.grid_n, "sim");
    c.sim.galerkin_N = c.sim.grid_n / 2 - 1;
    read(s, "galerkin_N", c.sim.galerkin_N, "sim");
    read(s, "dt", c.sim.dt, "sim");
    read(s, "t_final", c.sim.t_final, "sim");
    read(s, "gamma", c.sim.gamma, "sim");
    read(s, "dealias", c.sim.dealias, "sim");
    read(s, "cfl_safety", c.sim.cfl_safety, "sim");
    read(s, "seed", c.sim.seed, "sim");
  }
  if (j.contains("data")) {
    const auto& d = j["data"];
    check_keys(d, "data", {"phi0", "phi1"});
    if (d.contains("phi0")) c.phi0 = detail::read_modes(d["phi0"], "data.phi0");
    if (d.contains("phi1")) c.phi1 = detail::read_modes(d["phi1"], "data.phi1");
  }
  read(j, "snapshot_every", c.snapshot_every, "");
  if (j.contains("nash_moser")) {
    const auto& s = j["nash_moser"];
    check_keys(s, "nash_moser", {"theta0", "theta_growth", "max_iters", "residual_tol", "auto_shrink", "max_shrinks"});
    read(s, "theta0", c.nash_moser.theta0, "nash_moser");
    read(s, "theta_growth", c.nash_moser.theta_growth, "nash_moser");
    read(s, "max_iters", c.nash_moser.max_iters, "nash_moser");
    read(s, "residual_tol", c.nash_moser.residual_tol, "nash_moser");
    read(s, "auto_shrink", c.nash_moser.auto_shrink, "nash_moser");
    read(s, "max_shrinks", c.nash_moser.max_shrinks, "nash_moser");
  }
  if (j.contains("growth")) {
    const auto& s = j["growth"];
    check_keys(s, "growth", {"modes", "eps"});
    read(s, "modes", c.growth.modes, "growth");
    read(s, "eps", c.growth.eps, "growth");
  }
  if (j.contains("linearized")) {
    const auto& s = j["linearized"];
    check_keys(s, "linearized", {"base", "forcing", "profile", "forcing_csv"});
    if (s.contains("base")) c.linearized.base = detail::read_modes(s["base"], "linearized.base");
    if (s.contains("forcing")) c.linearized.forcing = detail::read_modes(s["forcing"], "linearized.forcing");
    read(s, "profile", c.linearized.profile, "linearized");
    read(s, "forcing_csv", c.linearized.forcing_csv, "linearized");
  }
  if (j.contains("identities")) {
    const auto& s = j["identities"];
    check_keys(s, "identities", {"samples", "n"});
    read(s, "samples", c.identities.samples, "identities");
    read(s, "n", c.identities.n, "identities");
  }
  if (j.contains("estimates")) {
    const auto& s = j["estimates"];
    check_keys(s, "estimates", {"samples", "gammas", "ms", "m", "nu", "gamma", "grid_n", "T", "steps", "base_scale",
                                "resolutions"});
    auto& e = c.estimates;
    read(s, "samples", e.samples, "estimates");
    read(s, "gammas", e.gammas, "estimates");
    read(s, "ms", e.ms, "estimates");
    read(s, "m", e.m, "estimates");
    read(s, "nu", e.nu, "estimates");
    read(s, "gamma", e.gamma, "estimates");
    read(s, "grid_n", e.grid_n, "estimates");
    read(s, "T", e.T, "estimates");
    read(s, "steps", e.steps, "estimates");
    read(s, "base_scale", e.base_scale, "estimates");
    read(s, "resolutions", e.resolutions, "estimates");
  }
  if (j.contains("commutators")) {
    const auto& s = j["commutators"];
    check_keys(s, "commutators", {"lemma", "param", "samples", "resolutions", "p", "rho", "drift_tolerance"});
    auto& k = c.commutators;
    read(s, "lemma", k.lemma, "commutators");
    if (s.contains("param") && !s["param"].is_null()) {
      double p = 0.0;
      read(s, "param", p, "commutators");
      k.param = p;
    }
    read(s, "samples", k.samples, "commutators");
    read(s, "resolutions", k.resolutions, "commutators");
    read(s, "p", k.p, "commutators");
    read(s, "rho", k.rho, "commutators");
    read(s, "drift_tolerance", k.drift_tolerance, "commutators");
  }
  return c;
}

inline json to_json(const RunConfig& c) {
  json iter = c.nash_moser;
  iter.erase("sim");
  const auto& e = c.estimates;
  const auto& k = c.commutators;
  return json{{"sim", c.sim},
              {"data", {{"phi0", detail::modes_json(c.phi0)}, {"phi1", detail::modes_json(c.phi1)}}},
              {"snapshot_every", c.snapshot_every},
              {"nash_moser", iter},
              {"growth", {{"modes", c.growth.modes}, {"eps", c.growth.eps}}},
              {"linearized",
               {{"base", detail::modes_json(c.linearized.base)},
                {"forcing", detail::modes_json(c.linearized.forcing)},
                {"profile", c.linearized.profile},
                {"forcing_csv", c.linearized.forcing_csv}}},
              {"identities", {{"samples", c.identities.samples}, {"n", c.identities.n}}},
              {"estimates",
               {{"samples", e.samples},
                {"gammas", e.gammas},
                {"ms", e.ms},
                {"m", e.m},
                {"nu", e.nu},
                {"gamma", e.gamma},
                {"grid_n", e.grid_n},
                {"T", e.T},
                {"steps", e.steps},
                {"base_scale", e.base_scale},
                {"resolutions", e.resolutions}}},
              {"commutators",
               {{"lemma", k.lemma},
                {"param", k.param ? json(*k.param) : json(nullptr)},
                {"samples", k.samples},
                {"resolutions", k.resolutions},
                {"p", k.p},
                {"rho", k.rho},
                {"drift_tolerance", k.drift_tolerance}}}};
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config '" + path + "'");
  json j;
  try {
    j = json::parse(is);
  } catch (const json::parse_error& e) {
    throw ConfigError("malformed config '" + path + "': " + e.what());
  }
  return parse_config(j);
}

// ---------------------------------------------------------------------------
// Commands

struct Context {
  RunConfig cfg;
  std::string command;
  std::string selector;
  std::filesystem::path out_dir;
  int jobs = 1;
  bool quiet = false;
  std::ostream* out = &std::cout;

  json resolved() const {
    json j = to_json(cfg);
    j["command"] = command;
    if (!selector.empty()) j["selector"] = selector;
    return j;
  }
  std::string path(const std::string& name) const { return (out_dir / name).string(); }
  void say(const std::string& s) const {
    if (!quiet) *out << s << '\n';
  }
  void json_file(const std::string& name, const json& payload) const {
    auto os = io::open_output(path(name));
    io::write_json(os, payload, resolved());
  }
  void series_file(const std::string& name, const FieldSeries& s) const {
    auto os = io::open_output(path(name));
    io::write_series_csv(os, s, resolved(), cfg.snapshot_every);
  }
};

inline bool run_flagged(const MonitorReport& m) { return m.has_flag(flags::stability) || m.has_flag(flags::blow_up); }

inline int cmd_simulate(const Context& ctx) {
  auto res = solve_nonlinear(ctx.cfg.sim, ctx.cfg.data());
  ctx.series_file("trajectory.csv", res.trajectory.phi_series());
  ctx.series_file("trajectory_t.csv", res.trajectory.phit_series());
  {
    auto os = io::open_output(ctx.path("spectrum_final.csv"));
    io::write_spectrum_csv(os, res.trajectory.back().phi, ctx.resolved());
  }
  ctx.json_file("monitor.json", {{"monitor", res.monitor}, {"aborted", res.aborted},
                                 {"t_reached", res.trajectory.times().back()}});
  ctx.say("simulate: " + std::to_string(res.trajectory.size()) + " snapshots, min stability " +
          io::fmt(res.monitor.min_over_run()) + (res.aborted ? ", aborted on monitor flag" : ""));
  return run_flagged(res.monitor) ? flagged : ok;
}

inline FieldSeries linearized_forcing(const RunConfig& c) {
  if (!c.linearized.forcing_csv.empty()) return io::read_series_csv(c.linearized.forcing_csv);
  TorusGrid g = c.sim.grid();
  SpectralField q = from_modes(g, c.linearized.forcing);
  FieldSeries s;
  for (double t : c.sim.mesh()) {
    double w = 1.0;
    if (c.linearized.profile == "bump") w = time_bump(t, 0.0, c.sim.t_final);
    if (c.linearized.profile == "sin") w = std::sin(t);
    s.push_back(t, w * q);
  }
  return s;
}

inline int cmd_linearized(const Context& ctx) {
  const auto& c = ctx.cfg;
  SpectralField base = from_modes(c.sim.grid(), c.linearized.base);
  auto g = linearized_forcing(c);
  auto res = solve_linearized(c.sim, constant_base(base), g);
  ctx.series_file("trajectory.csv", res.trajectory.phi_series());
  ctx.series_file("trajectory_t.csv", res.trajectory.phit_series());
  ctx.json_file("monitor.json", {{"monitor", res.monitor}, {"aborted", res.aborted}});
  ctx.say("linearized: " + std::to_string(res.trajectory.size()) + " snapshots, |phi'(T)|_L2 = " +
          io::fmt(l2_norm(res.trajectory.back().phi)));
  return run_flagged(res.monitor) ? flagged : ok;
}

inline int cmd_growth(const Context& ctx) {
  const auto& c = ctx.cfg;
  auto rates = growth_study(c.sim, c.growth.modes, c.growth.eps);
  auto os = io::open_output(ctx.path("rates.csv"));
  io::write_header(os, ctx.resolved());
  os << "k,rate,expected,rel_error,defined\n";
  json arr = json::array();
  for (const auto& r : rates) {
    double expected = c.sim.mu < 0 ? r.k * std::sqrt(-c.sim.mu) : 0.0;
    double rel = expected != 0.0 ? std::abs(r.rate - expected) / expected : std::abs(r.rate);
    os << r.k << ',' << io::fmt(r.rate) << ',' << io::fmt(expected) << ',' << io::fmt(rel) << ','
       << (r.defined ? 1 : 0) << '\n';
    arr.push_back({{"k", r.k}, {"rate", r.rate}, {"expected", expected}, {"rel_error", rel}, {"defined", r.defined}});
    ctx.say("growth: k = " + std::to_string(r.k) + " rate " + io::fmt(r.rate) + " expected " + io::fmt(expected));
  }
  ctx.json_file("growth.json", {{"rates", arr}});
  return ok;
}

inline int cmd_identities(const Context& ctx) {
  const auto& c = ctx.cfg;
  auto r = verify_hilbert_identities(c.identities.samples, static_cast<std::uint64_t>(c.sim.seed), c.identities.n,
                                     ctx.jobs);
  ctx.json_file("identities.json", {{"identities", r}});
  for (const auto& [name, e] : r.max_error) ctx.say("identity " + name + ": max error " + io::fmt(e));
  ctx.say(std::string("verify-identities: ") + (r.pass ? "all pass" : "FAILED"));
  return r.pass ? ok : check_failed;
}

namespace detail {
inline std::string params_cell(const std::map<std::string, double>& p) {
  std::string s;
  for (const auto& [k, v] : p) s += (s.empty() ? "" : ";") + k + "=" + io::fmt(v);
  return s;
}
struct SummaryRow {
  std::string id;
  std::map<std::string, double> params;
  double sup_ratio;
  double drift;
  bool pass;
};
inline void write_campaign_outputs(const Context& ctx, const std::string& stem, const std::vector<EstimateReport>& reports,
                                   const std::vector<SummaryRow>& rows) {
  {
    auto os = io::open_output(ctx.path(stem + ".jsonl"));
    os << json{{"type", "header"}, {"version", version}, {"config", ctx.resolved()}}.dump() << '\n';
    for (const auto& r : reports) write_report_line(os, r);
  }
  auto os = io::open_output(ctx.path(stem + "_summary.csv"));
  io::write_header(os, ctx.resolved());
  os << "estimate_id,params,sup_ratio,resolution_drift,pass\n";
  for (const auto& r : rows)
    os << r.id << ',' << params_cell(r.params) << ',' << io::fmt(r.sup_ratio) << ',' << io::fmt(r.drift) << ','
       << (r.pass ? "true" : "false") << '\n';
}
}  // namespace detail

inline int cmd_estimates(const Context& ctx) {
  const auto& c = ctx.cfg;
  const auto& e = c.estimates;
  const auto seed = static_cast<std::uint64_t>(c.sim.seed);
  PairSpec ps{e.grid_n, e.T, e.steps, c.sim.mu, c.sim.delta, e.base_scale, 4, 8};
  std::vector<EstimateReport> reports;
  std::vector<detail::SummaryRow> rows;
  bool pass = true;
  const std::string& sel = ctx.selector;
  if (sel == "energy") {
    auto camp = energy_campaign(ps, e.samples, seed, e.gammas, ctx.jobs);
    for (size_t i = 0; i < camp.sweeps.size(); ++i) {
      const auto& sw = camp.sweeps[i];
      double worst = 0.0;
      for (const auto& r : sw.reports) {
        reports.push_back(r);
        if (r.params.at("gamma") >= sw.gamma_star) worst = std::max(worst, r.ratio);
      }
      rows.push_back({"energy", {{"sample", double(i)}, {"gamma_star", sw.gamma_star}}, worst, 0.0, sw.pass});
    }
    pass = camp.pass;
    ctx.say(std::string("energy: ") + std::to_string(camp.sweeps.size()) + " pairs, " + (pass ? "all pass" : "FAILED"));
  } else if (sel == "tame") {
    TameCampaignOptions opt;
    opt.ms = e.ms;
    opt.samples = e.samples;
    auto camp = tame_campaign(c.sim, seed, opt, ctx.jobs);
    for (const auto& r : camp.by_m) {
      reports.push_back(r);
      rows.push_back({r.estimate_id, r.params, r.extra.at("C"), 0.0, camp.bounded_in_m});
    }
    reports.push_back(camp.smooth);
    reports.push_back(camp.rough);
    rows.push_back({"tame_roughening", {{"factor", camp.rough_factor}}, camp.rough.extra.at("C"), 0.0, camp.rough_bounded});
    pass = camp.pass;
    ctx.say("tame: C spread over m " + io::fmt(camp.spread) + ", roughening factor " + io::fmt(camp.rough_factor));
  } else if (sel == "phitt" || sel == "der2") {
    auto camp = sel == "phitt" ? phitt_campaign(ps, e.m, e.gamma, e.samples, seed, e.resolutions, ctx.jobs)
                               : second_derivative_campaign(ps, e.m, e.gamma, e.samples, seed, e.resolutions, ctx.jobs);
    reports.push_back(camp.worst);
    rows.push_back({camp.worst.estimate_id, camp.worst.params, camp.sup_ratio.front(), camp.drift, camp.pass});
    pass = camp.pass;
    ctx.say(sel + ": sup ratio " + io::fmt(camp.sup_ratio.front()) + ", drift " + io::fmt(camp.drift));
  } else if (sel == "forcing") {
    auto r = verify_forcing_bound(c.data(), c.sim.mu, c.sim.delta, e.nu);
    reports.push_back(r);
    rows.push_back({r.estimate_id, r.params, r.extra.at("order"), 0.0, *r.pass});
    pass = *r.pass;
    ctx.say("forcing: order " + io::fmt(r.extra.at("order")) + (r.extra.at("monotone_in_T") > 0 ? ", monotone in T" : ""));
  } else {
    throw ConfigError("verify-estimates: unknown selector '" + sel + "'");
  }
  detail::write_campaign_outputs(ctx, "estimates_" + sel, reports, rows);
  return pass ? ok : check_failed;
}

inline int cmd_commutators(const Context& ctx) {
  const auto& k = ctx.cfg.commutators;
  std::vector<CommutatorLemma> lemmas = k.lemma == "all" ? all_lemmas() : std::vector{parse_lemma(k.lemma)};
  CommutatorCampaignOptions opt;
  opt.resolutions = k.resolutions;
  opt.rho = k.rho;
  opt.p = k.p;
  opt.jobs = ctx.jobs;
  opt.drift_tolerance = k.drift_tolerance;
  std::vector<EstimateReport> reports;
  std::vector<detail::SummaryRow> rows;
  bool pass = true;
  for (auto l : lemmas) {
    double param = k.param ? *k.param : default_lemma_parameter(l);
    auto r = estimate_commutator_constant(l, param, k.samples, static_cast<std::uint64_t>(ctx.cfg.sim.seed), opt);
    reports.push_back(r.report);
    rows.push_back({r.report.estimate_id, r.report.params, r.sup_ratio.front(), r.drift, *r.report.pass});
    pass = pass && *r.report.pass;
    ctx.say(std::string("commutator ") + lemma_name(l) + ": sup ratio " + io::fmt(r.sup_ratio.front()) + ", drift " +
            io::fmt(r.drift));
  }
  detail::write_campaign_outputs(ctx, "commutators", reports, rows);
  return pass ? ok : check_failed;
}

inline int cmd_nash_moser(const Context& ctx) {
  const auto& c = ctx.cfg;
  try {
    auto res = iterate(c.iteration(), c.data(), c.sim.mu, c.sim.delta);
    auto full = res.full_solution();
    ctx.series_file("solution.csv", full.phi_series());
    ctx.series_file("correction.csv", res.phi_prime.phi_series());
    ctx.json_file("iteration.json", {{"report", res.report}, {"status", res.report.converged ? "converged" : "not_converged"}});
    ctx.say("nash-moser: " + std::to_string(res.report.iterations) + " iterations, residual " +
            io::fmt(res.report.residual_Y2.back()) + (res.report.converged ? ", converged" : ", not converged"));
    return res.report.converged ? ok : flagged;
  } catch (const IterationAbort& e) {
    ctx.json_file("iteration.json", {{"status", "aborted"}, {"error", e.what()}});
    ctx.say(std::string("nash-moser: ") + e.what());
    return flagged;
  } catch (const DivergenceError& e) {
    ctx.json_file("iteration.json", {{"status", "diverged"}, {"error", e.what()}});
    ctx.say(std::string("nash-moser: ") + e.what());
    return flagged;
  }
}

// ---------------------------------------------------------------------------
// Entry point

inline int run(std::vector<std::string> args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Spectral solver and estimate verification for a nonlocal quadratic wave equation", "amp_sheet"};
  app.set_version_flag("--version", std::string(version));
  std::string config_path, output_dir, selector, lemma;
  int jobs = 1;
  std::optional<long long> seed;
  bool quiet = false;
  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--output", output_dir, "output directory (default: $AMP_SHEET_OUTPUT or ./amp_sheet_output)");
  app.add_option("--jobs", jobs, "worker threads for sample campaigns")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "override the config seed");
  app.add_flag("--quiet", quiet, "no summary on stdout");
  app.require_subcommand(1);
  app.fallthrough();

  app.add_subcommand("simulate", "nonlinear initial value problem");
  app.add_subcommand("linearized", "zero-data linearized solve with a supplied forcing");
  app.add_subcommand("growth", "mode growth rates of the linear problem");
  app.add_subcommand("verify-identities", "Hilbert transform identities on random fields");
  auto* est = app.add_subcommand("verify-estimates", "numerical witnesses for the a-priori estimates");
  est->add_option("selector", selector, "energy|tame|phitt|der2|forcing")
      ->required()
      ->check(CLI::IsMember({"energy", "tame", "phitt", "der2", "forcing"}));
  auto* com = app.add_subcommand("commutator-constants", "empirical commutator constants");
  com->add_option("--lemma", lemma, "lemma name or 'all'");
  app.add_subcommand("nash-moser", "smoothed Newton iteration");

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? ok : config_error;
  }

  Context ctx;
  ctx.out = &out;
  ctx.quiet = quiet;
  ctx.jobs = jobs;
  ctx.command = app.get_subcommands().front()->get_name();
  ctx.selector = selector;
  try {
    if (!config_path.empty()) ctx.cfg = load_config(config_path);
    if (seed) ctx.cfg.sim.seed = *seed;
    if (!lemma.empty()) ctx.cfg.commutators.lemma = lemma;
    ctx.cfg.validate();

    if (output_dir.empty()) {
      const char* env = std::getenv("AMP_SHEET_OUTPUT");
      output_dir = env && *env ? env : "amp_sheet_output";
    }
    ctx.out_dir = output_dir;
    std::error_code ec;
    std::filesystem::create_directories(ctx.out_dir, ec);
    auto probe = ctx.out_dir / ".amp_sheet_probe";
    {
      std::ofstream p(probe);
      if (ec || !p) throw ConfigError("output directory '" + output_dir + "' is not writable");
    }
    std::filesystem::remove(probe, ec);

    const std::string& c = ctx.command;
    if (c == "simulate") return cmd_simulate(ctx);
    if (c == "linearized") return cmd_linearized(ctx);
    if (c == "growth") return cmd_growth(ctx);
    if (c == "verify-identities") return cmd_identities(ctx);
    if (c == "verify-estimates") return cmd_estimates(ctx);
    if (c == "commutator-constants") return cmd_commutators(ctx);
    if (c == "nash-moser") return cmd_nash_moser(ctx);
    throw ConfigError("unknown command '" + c + "'");
  } catch (const Error& e) {
    err << "amp_sheet: " << e.what() << '\n';
    return config_error;
  } catch (const std::exception& e) {
    err << "amp_sheet: internal failure: " << e.what() << '\n';
    return check_failed;
  }
}

inline int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(std::move(args));
}

}  // namespace amp_sheet::cli
