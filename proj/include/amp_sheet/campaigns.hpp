#pragma once

// Seeded sample campaigns over manufactured (phi0, phi') pairs, shared by the CLI
// and the acceptance harness. Draw i depends only on (seed, i).

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "amp_sheet/commutators.hpp"
#include "amp_sheet/estimates.hpp"
#include "amp_sheet/random_fields.hpp"

namespace amp_sheet {

struct ManufacturedPair {
  FieldSeries phi0;
  Trajectory phiP;
};

struct PairSpec {
  int grid_n = 32;
  double T = 2.0;
  int steps = 800;
  double mu = 1.0;
  double delta = 0.5;
  double base_scale = 0.05;  // amplitude of the random base before the stability rescale
  int base_bandwidth = 4;
  int pert_bandwidth = 8;
};

inline std::vector<double> uniform_times(double T, int steps) {
  std::vector<double> t(static_cast<size_t>(steps) + 1);
  for (int i = 0; i <= steps; ++i) t[static_cast<size_t>(i)] = T * i / steps;
  return t;
}

/// Base phi0(t) = (1 + 0.5 sin(t + c)) b, rescaled until mu - 2H[phi0]_x >= 3 delta/4 on the mesh;
/// phi'(t) = bump(t; a, b) q, compactly supported inside (0, T).
inline ManufacturedPair manufactured_pair(const PairSpec& s, std::uint64_t seed, std::uint64_t index) {
  TorusGrid g(s.grid_n);
  auto rng = draw_engine(seed, index);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SpectralField b = random_real_field(g, {s.base_bandwidth, 2.0, true, s.base_scale}, rng);
  SpectralField q = random_real_field(g, {s.pert_bandwidth, 2.0, true, 1.0}, rng);
  const double phase = 2.0 * std::numbers::pi * u(rng);
  const double a = s.T * 0.25 * u(rng), e = s.T * (0.6 + 0.35 * u(rng));
  auto times = uniform_times(s.T, s.steps);
  auto worst = [&] {
    double m = std::numeric_limits<double>::infinity();
    for (double t : times) m = std::min(m, stability_coefficient((1.0 + 0.5 * std::sin(t + phase)) * b, s.mu).min_value);
    return m;
  };
  for (int i = 0; i < 60 && worst() < 0.75 * s.delta; ++i) b *= 0.5;
  ManufacturedPair p;
  for (double t : times) p.phi0.push_back(t, (1.0 + 0.5 * std::sin(t + phase)) * b);
  p.phiP = bump_trajectory(q, times, a, e);
  return p;
}

// ---------------------------------------------------------------------------
// Energy estimate: gamma sweep per pair

struct EnergySweep {
  std::vector<EstimateReport> reports;  // one per gamma
  double gamma_star = 0.0;              // smallest gamma from which every larger one passes; 0 if none
  bool pass = false;
};

inline EnergySweep energy_gamma_sweep(const ManufacturedPair& p, double mu, double delta,
                                      const std::vector<double>& gammas, double tol = 0.05) {
  EnergySweep out;
  for (double g : gammas) out.reports.push_back(verify_energy_estimate(p.phi0, p.phiP, mu, delta, g, tol));
  for (size_t i = out.reports.size(); i-- > 0;) {
    if (!*out.reports[i].pass) break;
    out.gamma_star = gammas[i];
    out.pass = true;
  }
  return out;
}

struct EnergyCampaign {
  std::vector<EnergySweep> sweeps;
  bool pass = false;
};

inline EnergyCampaign energy_campaign(const PairSpec& spec, int samples, std::uint64_t seed,
                                      const std::vector<double>& gammas, int jobs = 1) {
  EnergyCampaign c;
  c.sweeps.resize(static_cast<size_t>(samples));
  parallel_for(samples, jobs, [&](int i) {
    auto p = manufactured_pair(spec, seed, static_cast<std::uint64_t>(i));
    auto& sw = c.sweeps[static_cast<size_t>(i)];
    sw = energy_gamma_sweep(p, spec.mu, spec.delta, gammas);
    for (auto& r : sw.reports) {
      r.seed = static_cast<long long>(seed);
      r.params["sample"] = i;
    }
  });
  c.pass = std::all_of(c.sweeps.begin(), c.sweeps.end(), [](const EnergySweep& s) { return s.pass; });
  return c;
}

// ---------------------------------------------------------------------------
// Tame estimate: m sweep and the roughening comparison

struct TameCampaignOptions {
  std::vector<int> ms{1, 2, 3};
  int samples = 4;
  double base_scale = 0.02;
  int rough_mode = 4;          // k = m + 2 at the default m = 2
  double rough_amplitude = 0.01;
  int rough_m = 2;
  double spread_limit = 10.0;  // max C / min C over m
  double rough_limit = 10.0;   // C(rough) / C(smooth)
};

struct TameCampaign {
  std::vector<EstimateReport> by_m;
  EstimateReport smooth, rough;
  double spread = 0.0;
  double rough_factor = 0.0;
  bool bounded_in_m = false;
  bool rough_bounded = false;
  bool pass = false;
};

inline TameCampaign tame_campaign(const SimConfig& cfg, std::uint64_t seed, const TameCampaignOptions& opt = {},
                                  int jobs = 1) {
  TorusGrid g = cfg.grid();
  auto mesh = cfg.mesh();
  auto rng = draw_engine(seed, 0);
  SpectralField b0 = random_real_field(g, {4, 2.0, true, opt.base_scale}, rng);
  while (stability_coefficient(b0, cfg.mu).min_value < 0.75 * cfg.delta) b0 *= 0.5;
  auto phi0 = constant_series(b0, mesh);
  std::vector<FieldSeries> gs;
  for (int i = 0; i < opt.samples; ++i) {
    auto r = draw_engine(seed, static_cast<std::uint64_t>(i) + 1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    SpectralField q = random_real_field(g, {std::min(8, cfg.galerkin_N), 2.0, true, 1.0}, r);
    double a = -0.1 * cfg.t_final, e = cfg.t_final * (0.5 + 0.4 * u(r));
    gs.push_back(bump_series(q, mesh, a, e));
  }
  TameCampaign out;
  out.by_m.resize(opt.ms.size());
  parallel_for(static_cast<int>(opt.ms.size()), jobs, [&](int i) {
    out.by_m[static_cast<size_t>(i)] = verify_tame_estimate(phi0, gs, cfg, opt.ms[static_cast<size_t>(i)]);
  });
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (auto& r : out.by_m) {
    lo = std::min(lo, r.extra.at("C"));
    hi = std::max(hi, r.extra.at("C"));
  }
  out.spread = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  out.bounded_in_m = std::isfinite(out.spread) && out.spread <= opt.spread_limit;

  SpectralField rough = b0 + cos_mode(g, opt.rough_mode, opt.rough_amplitude);
  if (stability_coefficient(rough, cfg.mu).min_value < 0.5 * cfg.delta)
    throw PreconditionError("tame_campaign: roughened base violates the stability condition");
  out.smooth = verify_tame_estimate(phi0, gs, cfg, opt.rough_m);
  out.rough = verify_tame_estimate(constant_series(rough, mesh), gs, cfg, opt.rough_m);
  double cs = out.smooth.extra.at("C"), cr = out.rough.extra.at("C");
  out.rough_factor = cs > 0.0 ? cr / cs : std::numeric_limits<double>::infinity();
  out.rough_bounded = std::isfinite(out.rough_factor) && out.rough_factor <= opt.rough_limit;
  out.pass = out.bounded_in_m && out.rough_bounded;
  return out;
}

// ---------------------------------------------------------------------------
// phi_tt and second-derivative campaigns: sup of the ratio over draws at two resolutions

struct SupCampaign {
  std::vector<double> sup_ratio;  // per resolution
  double drift = 0.0;
  EstimateReport worst;  // worst draw at the first resolution
  bool pass = false;
};

namespace detail {
inline void finish(SupCampaign& c, double tol) {
  const double s0 = c.sup_ratio.front();
  for (double s : c.sup_ratio) c.drift = std::max(c.drift, s0 > 0.0 ? std::abs(s - s0) / s0 : 0.0);
  bool finite = std::all_of(c.sup_ratio.begin(), c.sup_ratio.end(), [](double x) { return std::isfinite(x); });
  c.pass = finite && c.drift < tol;
  c.worst.extra["resolution_drift"] = c.drift;
  c.worst.pass = c.pass;
}
}  // namespace detail

inline SupCampaign phitt_campaign(PairSpec spec, int m, double gamma, int samples, std::uint64_t seed,
                                  const std::vector<int>& resolutions, int jobs = 1, double tol = 0.10) {
  SupCampaign c;
  for (int n : resolutions) {
    spec.grid_n = n;
    std::vector<EstimateReport> rs(static_cast<size_t>(samples));
    parallel_for(samples, jobs, [&](int i) {
      auto p = manufactured_pair(spec, seed, static_cast<std::uint64_t>(i));
      rs[static_cast<size_t>(i)] = verify_phitt_estimate(p.phi0, p.phiP, FieldSeries{}, spec.mu, gamma, m);
    });
    auto it = std::max_element(rs.begin(), rs.end(), [](auto& a, auto& b) { return a.ratio < b.ratio; });
    c.sup_ratio.push_back(it->ratio);
    if (c.sup_ratio.size() == 1) c.worst = *it;
  }
  c.worst.samples = samples;
  c.worst.seed = static_cast<long long>(seed);
  detail::finish(c, tol);
  return c;
}

inline SupCampaign second_derivative_campaign(PairSpec spec, int m, double gamma, int samples, std::uint64_t seed,
                                              const std::vector<int>& resolutions, int jobs = 1, double tol = 0.10) {
  SupCampaign c;
  for (int n : resolutions) {
    spec.grid_n = n;
    std::vector<EstimateReport> rs(static_cast<size_t>(samples));
    parallel_for(samples, jobs, [&](int i) {
      auto a = manufactured_pair(spec, seed, 2 * static_cast<std::uint64_t>(i));
      auto b = manufactured_pair(spec, seed, 2 * static_cast<std::uint64_t>(i) + 1);
      rs[static_cast<size_t>(i)] =
          verify_second_derivative_estimate(a.phiP.phi_series(), b.phiP.phi_series(), gamma, m);
    });
    auto it = std::max_element(rs.begin(), rs.end(), [](auto& a, auto& b) { return a.ratio < b.ratio; });
    c.sup_ratio.push_back(it->ratio);
    if (c.sup_ratio.size() == 1) c.worst = *it;
  }
  c.worst.samples = samples;
  c.worst.seed = static_cast<long long>(seed);
  detail::finish(c, tol);
  return c;
}

}  // namespace amp_sheet
