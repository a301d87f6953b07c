#pragma once

// Norms in time weighted by e^{-gamma t}, realized by trapezoid quadrature on a
// trajectory mesh. Samples at t < 0 are taken as the zero extension.

#include <algorithm>
#include <cmath>
#include <limits>

#include "amp_sheet/errors.hpp"
#include "amp_sheet/spectral_core.hpp"
#include "amp_sheet/trajectory.hpp"

namespace amp_sheet {

struct WeightedNormSpec {
  double gamma = 1.0;
  double t_min = -std::numeric_limits<double>::infinity();
  double t_max = std::numeric_limits<double>::infinity();

  void validate() const {
    if (!(gamma >= 1.0)) throw RangeError("WeightedNormSpec: gamma must be >= 1");
    if (!(t_min <= 0.0)) throw RangeError("WeightedNormSpec: t_min must be <= 0");
    if (!(t_max > t_min)) throw RangeError("WeightedNormSpec: empty horizon");
  }
};

/// Trapezoid rule for integral of e^{-2 gamma t} q(t) over the mesh points inside the horizon.
template <class Q>
double weighted_quadrature(const std::vector<double>& times, const WeightedNormSpec& spec, Q&& q) {
  spec.validate();
  if (times.empty()) throw InputShapeError("weighted norm: empty trajectory");
  double acc = 0.0;
  bool have_prev = false;
  double tp = 0.0, vp = 0.0;
  for (size_t i = 0; i < times.size(); ++i) {
    double t = times[i];
    if (t < spec.t_min || t > spec.t_max * (1.0 + 1e-14) + 1e-14) continue;
    double v = std::exp(-2.0 * spec.gamma * t) * q(i);
    if (have_prev) acc += 0.5 * (t - tp) * (v + vp);
    tp = t;
    vp = v;
    have_prev = true;
  }
  return acc;
}

/// ||f||_{L^2_gamma(H^m)}
inline double weighted_L2gamma_norm(const FieldSeries& f, const WeightedNormSpec& spec, double m) {
  return std::sqrt(weighted_quadrature(f.times(), spec, [&](size_t i) {
    double n = sobolev_norm(f[i], m);
    return n * n;
  }));
}

/// ||f||_{L^inf(H^m)} as a max over the mesh.
inline double sup_in_time_norm(const FieldSeries& f, double m) {
  if (f.empty()) throw InputShapeError("sup_in_time_norm: empty series");
  double s = 0.0;
  for (size_t i = 0; i < f.size(); ++i) s = std::max(s, sobolev_norm(f[i], m));
  return s;
}

/// Second time derivative of phi by centered differences (one-sided, second order at the ends).
inline FieldSeries second_time_derivative(const Trajectory& traj) {
  const size_t n = traj.size();
  if (n < 4) throw InputShapeError("second_time_derivative: need at least 4 time levels");
  const double dt = traj.dt();
  const double s = 1.0 / (dt * dt);
  std::vector<SpectralField> out;
  out.reserve(n);
  auto p = [&](size_t i) -> const SpectralField& { return traj[i].phi; };
  out.push_back(s * (2.0 * p(0) - 5.0 * p(1) + 4.0 * p(2) - p(3)));
  for (size_t i = 1; i + 1 < n; ++i) out.push_back(s * (p(i + 1) - 2.0 * p(i) + p(i - 1)));
  out.push_back(s * (2.0 * p(n - 1) - 5.0 * p(n - 2) + 4.0 * p(n - 3) - p(n - 4)));
  return FieldSeries(traj.times(), std::move(out));
}

inline FieldSeries spatial_derivative(const FieldSeries& f, int p = 1) {
  return map_series(f, [p](const SpectralField& x) { return derivative(x, p); });
}

inline void check_zero_trace(const Trajectory& traj, double tol = 1e-12) {
  for (size_t i = 0; i < traj.size(); ++i) {
    if (traj.time(i) >= 0.0) continue;
    if (l2_norm(traj[i].phi) > tol || l2_norm(traj[i].phit) > tol)
      throw DomainError("trajectory has nonzero trace at t = " + std::to_string(traj.time(i)) + " < 0");
  }
}

struct XmNorm {
  double phi_x = 0.0;   // ||phi_x||_{L^2_gamma H^{m+1}}
  double phi_t = 0.0;   // ||phi_t||_{L^2_gamma H^{m+1}}
  double phi_tt = 0.0;  // ||phi_tt||_{L^2_gamma H^m}
  double total = 0.0;
};

inline XmNorm Xm_norm(const Trajectory& traj, const WeightedNormSpec& spec, int m) {
  check_zero_trace(traj);
  XmNorm r;
  r.phi_x = weighted_L2gamma_norm(spatial_derivative(traj.phi_series()), spec, m + 1);
  r.phi_t = weighted_L2gamma_norm(traj.phit_series(), spec, m + 1);
  r.phi_tt = weighted_L2gamma_norm(second_time_derivative(traj), spec, m);
  r.total = std::sqrt(r.phi_x * r.phi_x + r.phi_t * r.phi_t + r.phi_tt * r.phi_tt);
  return r;
}

inline double Ym_norm(const FieldSeries& f, const WeightedNormSpec& spec, int m) {
  return weighted_L2gamma_norm(f, spec, m);
}

}  // namespace amp_sheet
