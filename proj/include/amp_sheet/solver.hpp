#pragma once

// Galerkin semi-discretization and RK4 time stepping for the nonlinear Cauchy
// problem and for the linearized equation with forcing.

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "amp_sheet/errors.hpp"
#include "amp_sheet/operators.hpp"
#include "amp_sheet/spectral_core.hpp"
#include "amp_sheet/trajectory.hpp"

namespace amp_sheet {

struct SimConfig {
  double mu = 1.0;
  double delta = 0.5;
  int grid_n = 64;
  int galerkin_N = 31;
  double dt = 1e-3;
  double t_final = 1.0;
  double gamma = 1.0;
  bool dealias = true;
  double cfl_safety = 0.5;
  long long seed = 0;

  void validate() const {
    auto fail = [](const std::string& m) { throw ConfigError("SimConfig: " + m); };
    if (grid_n < 4 || grid_n % 2 != 0) fail("grid_n must be even and >= 4");
    if (galerkin_N < 1 || galerkin_N > grid_n / 2 - 1) fail("galerkin_N must lie in [1, grid_n/2 - 1]");
    if (!(dt > 0.0) || !std::isfinite(dt)) fail("dt must be positive");
    if (!(t_final > 0.0) || !std::isfinite(t_final)) fail("t_final must be positive");
    if (!(gamma >= 1.0)) fail("gamma must be >= 1");
    if (!(delta > 0.0)) fail("delta must be positive");
    if (!(cfl_safety > 0.0 && cfl_safety <= 1.0)) fail("cfl_safety must lie in (0, 1]");
    if (!std::isfinite(mu)) fail("mu must be finite");
  }

  TorusGrid grid() const { return TorusGrid(grid_n); }
  ProductRule rule() const { return dealias ? ProductRule::dealiased : ProductRule::aliased; }

  // The requested dt is rounded down so that a whole number of steps spans [0, T].
  int num_steps() const { return std::max(1, static_cast<int>(std::ceil(t_final / dt - 1e-9))); }
  double step() const { return t_final / num_steps(); }
  std::vector<double> mesh() const {
    int m = num_steps();
    std::vector<double> t(static_cast<size_t>(m) + 1);
    for (int i = 0; i <= m; ++i) t[static_cast<size_t>(i)] = t_final * i / m;
    return t;
  }

  /// Largest admissible step for a given sup of the wave-speed coefficient c^2.
  double cfl_limit(double sup_c2) const { return cfl_safety / (galerkin_N * std::sqrt(std::max(1.0, sup_c2))); }
};

inline void to_json(nlohmann::json& j, const SimConfig& c) {
  j = nlohmann::json{{"mu", c.mu},         {"delta", c.delta},   {"grid_n", c.grid_n},
                     {"galerkin_N", c.galerkin_N}, {"dt", c.dt}, {"t_final", c.t_final},
                     {"gamma", c.gamma},   {"dealias", c.dealias}, {"cfl_safety", c.cfl_safety},
                     {"seed", c.seed}};
}

struct MonitorFlag {
  std::string type;
  double time = 0.0;
};

struct MonitorReport {
  std::vector<double> t_grid;
  std::vector<double> min_stability_coeff;
  std::vector<MonitorFlag> flags;

  bool has_flag(const std::string& type) const {
    return std::any_of(flags.begin(), flags.end(), [&](const MonitorFlag& f) { return f.type == type; });
  }
  double min_over_run() const {
    double m = std::numeric_limits<double>::infinity();
    for (double v : min_stability_coeff) m = std::min(m, v);
    return m;
  }
  void flag(const std::string& type, double t) {
    if (!has_flag(type)) flags.push_back({type, t});
  }
};

inline void to_json(nlohmann::json& j, const MonitorReport& r) {
  nlohmann::json flags = nlohmann::json::array();
  for (const auto& f : r.flags) flags.push_back({{"type", f.type}, {"time", f.time}});
  j = nlohmann::json{{"t_grid", r.t_grid}, {"min_stability_coeff", r.min_stability_coeff}, {"flags", flags}};
}

namespace flags {
inline constexpr const char* stability = "stability_below_half_delta";
inline constexpr const char* blow_up = "blow_up";
inline constexpr const char* nonpositive_mu = "nonpositive_mu";
}  // namespace flags

inline constexpr double blow_up_threshold = 1e12;

using RhsEvaluator = std::function<StepState(double t, const StepState&)>;
using FieldProvider = std::function<SpectralField(double t)>;

// ---------------------------------------------------------------------------
// Right-hand sides

inline StepState semidiscrete_rhs_nonlinear(const StepState& s, const SimConfig& cfg) {
  const int N = cfg.galerkin_N;
  SpectralField acc = cfg.mu * derivative(s.phi, 2) + quadratic_rhs(s.phi, cfg.rule());
  acc.zero_mean();
  return StepState(project(s.phit, N), project(acc, N));
}

inline StepState semidiscrete_rhs_linearized(const StepState& s, const SpectralField& phi0_at_t,
                                             const SpectralField& g_at_t, const SimConfig& cfg) {
  check_same_grid(s.phi, phi0_at_t);
  check_same_grid(s.phi, g_at_t);
  const int N = cfg.galerkin_N;
  SpectralField acc = linearized_action(phi0_at_t, s.phi, cfg.mu, cfg.rule()) + g_at_t;
  acc.zero_mean();
  return StepState(project(s.phit, N), project(acc, N));
}

/// Classical RK4 step. Throws CflViolation if dt exceeds dt_max.
inline StepState rk4_step(const StepState& s, const RhsEvaluator& rhs, double t, double dt,
                          double dt_max = std::numeric_limits<double>::infinity()) {
  if (dt > dt_max * (1.0 + 1e-12))
    throw CflViolation("rk4_step: dt = " + std::to_string(dt) + " exceeds CFL bound " + std::to_string(dt_max));
  StepState k1 = rhs(t, s);
  StepState k2 = rhs(t + 0.5 * dt, s + (0.5 * dt) * k1);
  StepState k3 = rhs(t + 0.5 * dt, s + (0.5 * dt) * k2);
  StepState k4 = rhs(t + dt, s + dt * k3);
  StepState out = s;
  out += (dt / 6.0) * k1;
  out += (dt / 3.0) * k2;
  out += (dt / 3.0) * k3;
  out += (dt / 6.0) * k4;
  out.phi.zero_mean();
  out.phit.zero_mean();
  return out;
}

namespace detail {
inline bool blown_up(const StepState& s) {
  for (const auto* f : {&s.phi, &s.phit})
    for (auto c : f->coefficients())
      if (!std::isfinite(c.real()) || !std::isfinite(c.imag()) || std::abs(c) > blow_up_threshold) return true;
  return false;
}
inline double max_of(const std::vector<double>& v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::max(m, x);
  return m;
}
}  // namespace detail

struct SolveResult {
  Trajectory trajectory;
  MonitorReport monitor;
  bool aborted = false;  // stopped early on a monitor flag
};

/// Forward solve of the nonlinear Cauchy problem on [0, T].
inline SolveResult solve_nonlinear(const SimConfig& cfg, const CauchyData& data) {
  cfg.validate();
  data.validate();
  if (!(data.grid() == cfg.grid())) throw GridMismatchError("solve_nonlinear: data grid differs from config");
  auto st0 = stability_coefficient(data.phi0, cfg.mu);
  if (st0.min_value < cfg.delta)
    throw PreconditionError("solve_nonlinear: initial stability coefficient " + std::to_string(st0.min_value) +
                            " < delta");

  SolveResult out;
  const auto times = cfg.mesh();
  const double dt = cfg.step();
  const int N = cfg.galerkin_N;
  StepState s(project(data.phi0, N), project(data.phi1, N));
  RhsEvaluator rhs = [&cfg](double, const StepState& x) { return semidiscrete_rhs_nonlinear(x, cfg); };

  for (size_t i = 0; i < times.size(); ++i) {
    double t = times[i];
    auto st = stability_coefficient(s.phi, cfg.mu);
    out.trajectory.push_back(t, s);
    out.monitor.t_grid.push_back(t);
    out.monitor.min_stability_coeff.push_back(st.min_value);
    if (st.min_value < 0.5 * cfg.delta) {
      out.monitor.flag(flags::stability, t);
      out.aborted = true;
      break;
    }
    if (i + 1 == times.size()) break;
    s = rk4_step(s, rhs, t, dt, cfg.cfl_limit(detail::max_of(st.values)));
    if (detail::blown_up(s)) {
      out.monitor.flag(flags::blow_up, times[i + 1]);
      out.aborted = true;
      break;
    }
  }
  return out;
}

/// General linearized IVP: phi'_tt = P_N(c^2 phi'_xx + lower) + P_N forcing, from `initial` at t = 0.
/// The monitor records the stability coefficient of the base state; crossing delta/2 is flagged
/// but does not stop the run (the ill-posed regime is integrated on purpose).
inline SolveResult integrate_linear(const SimConfig& cfg, const FieldProvider& base, const FieldProvider& forcing,
                                    const StepState& initial) {
  cfg.validate();
  if (!(initial.grid() == cfg.grid())) throw GridMismatchError("integrate_linear: initial state grid differs");
  SolveResult out;
  if (cfg.mu <= 0.0) out.monitor.flag(flags::nonpositive_mu, 0.0);
  const auto times = cfg.mesh();
  const double dt = cfg.step();
  const int N = cfg.galerkin_N;
  StepState s(project(initial.phi, N), project(initial.phit, N));
  RhsEvaluator rhs = [&](double t, const StepState& x) {
    return semidiscrete_rhs_linearized(x, base(t), forcing(t), cfg);
  };
  for (size_t i = 0; i < times.size(); ++i) {
    double t = times[i];
    auto st = stability_coefficient(base(t), cfg.mu);
    out.trajectory.push_back(t, s);
    out.monitor.t_grid.push_back(t);
    out.monitor.min_stability_coeff.push_back(st.min_value);
    if (st.min_value < 0.5 * cfg.delta && cfg.mu > 0.0) out.monitor.flag(flags::stability, t);
    if (i + 1 == times.size()) break;
    s = rk4_step(s, rhs, t, dt, cfg.cfl_limit(detail::max_of(st.values)));
    if (detail::blown_up(s)) {
      out.monitor.flag(flags::blow_up, times[i + 1]);
      out.aborted = true;
      break;
    }
  }
  return out;
}

inline void check_mesh(const SimConfig& cfg, const FieldSeries& g) {
  auto mesh = cfg.mesh();
  if (g.size() != mesh.size())
    throw MeshMismatch("forcing has " + std::to_string(g.size()) + " times, solver mesh has " +
                       std::to_string(mesh.size()));
  const double tol = 1e-9 * cfg.step();
  for (size_t i = 0; i < mesh.size(); ++i)
    if (std::abs(g.time(i) - mesh[i]) > tol) throw MeshMismatch("forcing time mesh differs from solver mesh");
  if (!(g.grid() == cfg.grid())) throw MeshMismatch("forcing grid differs from solver grid");
}

/// Zero-data solve of the linearized equation about `base` with forcing g sampled on the solver mesh.
inline SolveResult solve_linearized(const SimConfig& cfg, const FieldProvider& base, const FieldSeries& g) {
  cfg.validate();
  check_mesh(cfg, g);
  FieldProvider forcing = [&g](double t) { return interpolate_cubic(g, t); };
  return integrate_linear(cfg, base, forcing, StepState(cfg.grid()));
}

// Base-state providers.
inline FieldProvider constant_base(SpectralField f) {
  return [f = std::move(f)](double) { return f; };
}
inline FieldProvider series_base(FieldSeries s) {
  return [s = std::move(s)](double t) { return interpolate_cubic(s, t); };
}
inline FieldProvider lifting_base(Lifting lift) {
  return [lift = std::move(lift)](double t) { return lift.phi(t); };
}

// ---------------------------------------------------------------------------
// Growth rates

struct GrowthRate {
  int k = 0;
  double rate = 0.0;
  bool defined = false;
};

inline std::vector<GrowthRate> measure_mode_growth(const Trajectory& traj, const std::vector<int>& modes) {
  if (traj.size() < 4) throw PreconditionError("measure_mode_growth: trajectory too short for a fit window");
  std::vector<GrowthRate> out;
  const size_t start = traj.size() / 2;
  for (int k : modes) {
    GrowthRate r;
    r.k = k;
    double peak = 0.0;
    for (size_t i = 0; i < traj.size(); ++i) peak = std::max(peak, std::abs(traj[i].phi[k]));
    if (peak < 1e-14) {
      out.push_back(r);
      continue;
    }
    double st = 0, sy = 0, stt = 0, sty = 0;
    int cnt = 0;
    for (size_t i = start; i < traj.size(); ++i) {
      double a = std::abs(traj[i].phi[k]);
      if (!(a > 0.0)) continue;
      double t = traj.time(i), y = std::log(a);
      st += t;
      sy += y;
      stt += t * t;
      sty += t * y;
      ++cnt;
    }
    if (cnt >= 2) {
      double den = cnt * stt - st * st;
      r.rate = (cnt * sty - st * sy) / den;
      r.defined = true;
    }
    out.push_back(r);
  }
  return out;
}

/// Initial state exciting one mode: eps cos kx with phi_t chosen so that the
/// constant-coefficient solution is a pure exponential (mu < 0) or a pure
/// travelling wave (mu > 0).
inline StepState single_mode_seed(const TorusGrid& grid, int k, double mu, double eps) {
  double w = k * std::sqrt(std::abs(mu));
  SpectralField phit = mu < 0 ? cos_mode(grid, k, eps * w) : sin_mode(grid, k, eps * w);
  return StepState(cos_mode(grid, k, eps), phit);
}

/// One linear run about phi0 = 0 per mode; rate expected k sqrt(|mu|) for mu < 0, 0 otherwise.
inline std::vector<GrowthRate> growth_study(const SimConfig& cfg, const std::vector<int>& modes, double eps = 1e-8) {
  cfg.validate();
  TorusGrid g = cfg.grid();
  std::vector<GrowthRate> out;
  for (int k : modes) {
    if (k < 1 || k > cfg.galerkin_N) throw RangeError("growth_study: mode " + std::to_string(k) + " outside 1..N");
    auto run = integrate_linear(cfg, constant_base(SpectralField(g)), constant_base(SpectralField(g)),
                                single_mode_seed(g, k, cfg.mu, eps));
    out.push_back(measure_mode_growth(run.trajectory, {k}).front());
  }
  return out;
}

}  // namespace amp_sheet
