#pragma once

// Smoothed Newton iteration for the zero-data problem
//   L[phi^a + u] = 0 on [0, T],  u = 0 for t <= 0,
// with corrections u_{n+1} = u_n + S_theta Psi(u_n) r_n, r_n = -L[phi^a + u_n].

#include <nlohmann/json.hpp>

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "amp_sheet/errors.hpp"
#include "amp_sheet/operators.hpp"
#include "amp_sheet/solver.hpp"
#include "amp_sheet/weighted_norms.hpp"

namespace amp_sheet {

struct IterationConfig {
  double theta0 = 4.0;
  double theta_growth = 1.5;
  int max_iters = 10;
  double residual_tol = 1e-8;
  bool auto_shrink = false;
  int max_shrinks = 6;
  SimConfig sim;

  void validate() const {
    if (!(theta0 >= 1.0)) throw ConfigError("IterationConfig: theta0 must be >= 1");
    if (!(theta_growth > 1.0 && theta_growth <= 4.0)) throw ConfigError("IterationConfig: theta_growth must lie in (1, 4]");
    if (max_iters < 0) throw ConfigError("IterationConfig: max_iters must be >= 0");
    if (!(residual_tol > 0.0)) throw ConfigError("IterationConfig: residual_tol must be positive");
    if (max_shrinks < 0) throw ConfigError("IterationConfig: max_shrinks must be >= 0");
    sim.validate();
  }
};

inline void to_json(nlohmann::json& j, const IterationConfig& c) {
  j = nlohmann::json{{"theta0", c.theta0},           {"theta_growth", c.theta_growth}, {"max_iters", c.max_iters},
                     {"residual_tol", c.residual_tol}, {"auto_shrink", c.auto_shrink}, {"max_shrinks", c.max_shrinks},
                     {"sim", c.sim}};
}

struct IterationReport {
  std::vector<double> residual_Y2;    // residual before each update, then the final one
  std::vector<double> correction_X2;  // per update
  std::vector<double> min_stability;  // of phi^a + u_n, per iterate
  std::vector<double> theta;          // cutoff used per update
  bool converged = false;
  int iterations = 0;
  double t_final = 0.0;
  int shrinks = 0;
  double ramp_width = 0.0;
  double smoothing_neutrality = 0.0;  // |res(u_final) - res(u_final without last smoothing)|
  int m_prime = 7;                    // regularity label, recorded only
};

inline void to_json(nlohmann::json& j, const IterationReport& r) {
  j = nlohmann::json{{"residual_Y2", r.residual_Y2},
                     {"correction_X2", r.correction_X2},
                     {"min_stability", r.min_stability},
                     {"theta", r.theta},
                     {"converged", r.converged},
                     {"iterations", r.iterations},
                     {"t_final", r.t_final},
                     {"shrinks", r.shrinks},
                     {"ramp_width", r.ramp_width},
                     {"smoothing_neutrality", r.smoothing_neutrality},
                     {"m_prime", r.m_prime}};
}

/// Sharp spectral cutoff |k| <= theta.
inline SpectralField smooth_cutoff(const SpectralField& f, double theta) {
  if (!(theta >= 1.0)) throw RangeError("smooth_cutoff: theta must be >= 1");
  int N = static_cast<int>(std::min<double>(std::floor(theta), f.max_mode()));
  return project(f, N);
}

inline Trajectory smooth_cutoff(const Trajectory& tr, double theta) {
  Trajectory out;
  for (size_t i = 0; i < tr.size(); ++i)
    out.push_back(tr.time(i), StepState(smooth_cutoff(tr[i].phi, theta), smooth_cutoff(tr[i].phit, theta)));
  return out;
}

struct NashMoserResult {
  Trajectory phi_prime;  // u on the solver mesh
  IterationReport report;
  Lifting lifting;

  /// phi^a + u on the mesh.
  Trajectory full_solution() const {
    Trajectory out;
    for (size_t i = 0; i < phi_prime.size(); ++i) {
      double t = phi_prime.time(i);
      out.push_back(t, StepState(lifting.phi(t) + phi_prime[i].phi, lifting.phi_t(t) + phi_prime[i].phit));
    }
    return out;
  }
};

namespace detail {

inline Trajectory zero_trajectory(const SimConfig& cfg) {
  Trajectory tr;
  for (double t : cfg.mesh()) tr.push_back(t, StepState(cfg.grid()));
  return tr;
}

inline Trajectory add(const Trajectory& a, const Trajectory& b) {
  Trajectory out;
  for (size_t i = 0; i < a.size(); ++i)
    out.push_back(a.time(i), StepState(a[i].phi + b[i].phi, a[i].phit + b[i].phit));
  return out;
}

/// r = -L[phi^a + u] on the mesh. phi^a_tt is analytic, u_tt by centered differences at interior
/// points; endpoint values are cubic extrapolations of the interior residual.
inline FieldSeries nm_residual(const Lifting& lift, const Trajectory& u, const SimConfig& cfg) {
  const size_t n = u.size();
  if (n < 6) throw PreconditionError("nash_moser: time mesh too coarse (need at least 6 levels)");
  const double dt = u.dt();
  std::vector<SpectralField> r(n, SpectralField(cfg.grid()));
  for (size_t i = 1; i + 1 < n; ++i) {
    double t = u.time(i);
    SpectralField utt = (1.0 / (dt * dt)) * (u[i + 1].phi - 2.0 * u[i].phi + u[i - 1].phi);
    SpectralField full = lift.phi(t) + u[i].phi;
    SpectralField res = lift.phi_tt(t) + utt + spatial_residual(full, cfg.mu, cfg.rule());
    res = -project(res, cfg.galerkin_N);
    res.zero_mean();
    r[i] = std::move(res);
  }
  r[0] = 4.0 * r[1] - 6.0 * r[2] + 4.0 * r[3] - r[4];
  r[n - 1] = 4.0 * r[n - 2] - 6.0 * r[n - 3] + 4.0 * r[n - 4] - r[n - 5];
  return FieldSeries(u.times(), std::move(r));
}

inline double nm_min_stability(const Lifting& lift, const Trajectory& u, double mu) {
  double m = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < u.size(); ++i)
    m = std::min(m, stability_coefficient(lift.phi(u.time(i)) + u[i].phi, mu).min_value);
  return m;
}

inline NashMoserResult iterate_fixed_horizon(const IterationConfig& cfg, const Lifting& lift) {
  const SimConfig& sim = cfg.sim;
  const WeightedNormSpec spec{sim.gamma};
  NashMoserResult res{zero_trajectory(sim), {}, lift};
  IterationReport& rep = res.report;
  rep.t_final = sim.t_final;
  rep.ramp_width = lift.ramp_width();

  Trajectory u = res.phi_prime;
  double theta = cfg.theta0;
  int growth_streak = 0;
  Trajectory last_unsmoothed;
  bool have_last = false;

  for (int it = 0;; ++it) {
    double stab = nm_min_stability(lift, u, sim.mu);
    rep.min_stability.push_back(stab);
    if (stab < 0.5 * sim.delta)
      throw IterationAbort("nash_moser: stability coefficient of phi^a + u fell to " + std::to_string(stab) +
                           " < delta/2 at iterate " + std::to_string(it));
    FieldSeries r = nm_residual(lift, u, sim);
    double rn = Ym_norm(r, spec, 2);
    if (!rep.residual_Y2.empty()) growth_streak = rn > rep.residual_Y2.back() ? growth_streak + 1 : 0;
    rep.residual_Y2.push_back(rn);
    if (!std::isfinite(rn) || growth_streak >= 3)
      throw DivergenceError("nash_moser: residual grew for 3 consecutive iterations (T = " +
                            std::to_string(sim.t_final) + ")");
    if (rn < cfg.residual_tol) {
      rep.converged = true;
      break;
    }
    if (it >= cfg.max_iters) break;

    // Psi(u): zero-data linearized solve about phi^a + u.
    FieldSeries useries = u.phi_series();
    FieldProvider base = [&lift, useries](double t) { return lift.phi(t) + interpolate_cubic(useries, t); };
    auto sol = solve_linearized(sim, base, r);
    if (sol.aborted) throw DivergenceError("nash_moser: linearized solve blew up");
    Trajectory corr = smooth_cutoff(sol.trajectory, theta);
    rep.theta.push_back(theta);
    rep.correction_X2.push_back(Xm_norm(corr, spec, 2).total);
    last_unsmoothed = add(u, sol.trajectory);
    have_last = true;
    u = add(u, corr);
    rep.iterations = it + 1;
    theta *= cfg.theta_growth;
  }
  if (have_last) {
    double with = rep.residual_Y2.back();
    double without = Ym_norm(nm_residual(lift, last_unsmoothed, sim), spec, 2);
    rep.smoothing_neutrality = std::abs(with - without);
  }
  res.phi_prime = std::move(u);
  return res;
}

}  // namespace detail

inline NashMoserResult iterate(const IterationConfig& cfg, const CauchyData& data, double mu, double delta) {
  cfg.validate();
  data.validate();
  IterationConfig c = cfg;
  c.sim.mu = mu;
  c.sim.delta = delta;
  if (!(data.grid() == c.sim.grid())) throw GridMismatchError("nash_moser: data grid differs from config");
  Lifting lift = build_lifting(CauchyData(project(data.phi0, c.sim.galerkin_N), project(data.phi1, c.sim.galerkin_N)),
                               mu, delta);
  // In auto-shrink mode running out of iterations also counts as failure to converge on this horizon.
  for (int shrink = 0;; ++shrink) {
    try {
      auto res = detail::iterate_fixed_horizon(c, lift);
      res.report.shrinks = shrink;
      if (res.report.converged || !c.auto_shrink || shrink >= c.max_shrinks) return res;
    } catch (const DivergenceError&) {
      if (!c.auto_shrink || shrink >= c.max_shrinks) throw;
    }
    c.sim.t_final *= 0.5;
  }
}

}  // namespace amp_sheet
