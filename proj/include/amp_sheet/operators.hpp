#pragma once

// The quadratic amplitude operator, its first and second derivatives, the
// stability coefficient, and the lifting of Cauchy data with its forcing.
//
// Throughout, varphi = H[phi] is the conjugate field.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "amp_sheet/errors.hpp"
#include "amp_sheet/spectral_core.hpp"
#include "amp_sheet/trajectory.hpp"

namespace amp_sheet {

namespace detail {
inline void require_real_zero_mean(const SpectralField& f, const char* who) {
  if (!f.is_real()) throw DomainError(std::string(who) + ": field must be real");
  if (!has_zero_mean(f)) throw DomainError(std::string(who) + ": field must have zero mean");
}
}  // namespace detail

/// N(phi) = (H[varphi_x^2] - [varphi;H] varphi_xx)_x
inline SpectralField quadratic_rhs(const SpectralField& phi, ProductRule rule = ProductRule::dealiased) {
  detail::require_real_zero_mean(phi, "quadratic_rhs");
  SpectralField vp = hilbert(phi);
  SpectralField vpx = derivative(vp, 1);
  SpectralField vpxx = derivative(vp, 2);
  SpectralField inner = hilbert(pointwise_product(vpx, vpx, rule)) - commutator_vh(vp, vpxx, rule);
  return derivative(inner, 1);
}

/// Same operator written as (1/2 H[varphi^2]_xx + varphi phi_xx)_x.
inline SpectralField quadratic_rhs_integro(const SpectralField& phi, ProductRule rule = ProductRule::dealiased) {
  detail::require_real_zero_mean(phi, "quadratic_rhs_integro");
  SpectralField vp = hilbert(phi);
  SpectralField inner =
      0.5 * derivative(hilbert(pointwise_product(vp, vp, rule)), 2) + pointwise_product(vp, derivative(phi, 2), rule);
  return derivative(inner, 1);
}

/// Spatial part of the nonlinear operator: -mu phi_xx - N(phi).
inline SpectralField spatial_residual(const SpectralField& phi, double mu, ProductRule rule = ProductRule::dealiased) {
  return -(mu * derivative(phi, 2) + quadratic_rhs(phi, rule));
}

/// phi_tt - mu phi_xx - N(phi) at an interior index, with phi_tt by centered differences.
inline SpectralField residual_L(const Trajectory& traj, double mu, size_t index,
                                ProductRule rule = ProductRule::dealiased) {
  if (index == 0 || index + 1 >= traj.size())
    throw BoundaryIndexError("residual_L: index " + std::to_string(index) + " has no two neighbours");
  const double dt = traj.dt();
  SpectralField phitt = (1.0 / (dt * dt)) * (traj[index + 1].phi - 2.0 * traj[index].phi + traj[index - 1].phi);
  return phitt + spatial_residual(traj[index].phi, mu, rule);
}

struct LinearizedSplit {
  SpectralField coefficient;  // c^2 = mu - 2 varphi0_x
  SpectralField lower_order;
};

/// Split of the linearized spatial operator, so that
/// phi'_tt = c^2 phi'_xx + lower_order + g.
inline LinearizedSplit linearized_rhs(const SpectralField& phi0, const SpectralField& phiP, double mu,
                                      ProductRule rule = ProductRule::dealiased) {
  check_same_grid(phi0, phiP);
  detail::require_real_zero_mean(phi0, "linearized_rhs");
  detail::require_real_zero_mean(phiP, "linearized_rhs");
  SpectralField v0 = hilbert(phi0);
  SpectralField v0x = derivative(v0, 1);
  SpectralField v0xx = derivative(v0, 2);
  SpectralField vp = hilbert(phiP);
  SpectralField vpx = derivative(vp, 1);
  SpectralField vpxx = derivative(vp, 2);

  SpectralField coef = -2.0 * v0x;
  coef.at(0) += two_pi * mu;

  SpectralField lower = 2.0 * commutator_hv(v0x, vpxx, rule) + 2.0 * hilbert(pointwise_product(v0xx, vpx, rule)) -
                        derivative(commutator_vh(vp, v0xx, rule) + commutator_vh(v0, vpxx, rule), 1);
  return {std::move(coef), std::move(lower)};
}

/// c^2 phi'_xx + lower_order, i.e. mu phi'_xx + dN[phi0] phi'.
inline SpectralField linearized_action(const SpectralField& phi0, const SpectralField& phiP, double mu,
                                       ProductRule rule = ProductRule::dealiased) {
  auto split = linearized_rhs(phi0, phiP, mu, rule);
  return pointwise_product(split.coefficient, derivative(phiP, 2), rule) + split.lower_order;
}

/// dN[phi0] phi' in the unsplit form (2H[varphi0_x varphi'_x] - [varphi';H]varphi0_xx - [varphi0;H]varphi'_xx)_x.
inline SpectralField quadratic_rhs_derivative(const SpectralField& phi0, const SpectralField& phiP,
                                              ProductRule rule = ProductRule::dealiased) {
  check_same_grid(phi0, phiP);
  detail::require_real_zero_mean(phi0, "quadratic_rhs_derivative");
  detail::require_real_zero_mean(phiP, "quadratic_rhs_derivative");
  SpectralField v0 = hilbert(phi0);
  SpectralField vp = hilbert(phiP);
  SpectralField inner = 2.0 * hilbert(pointwise_product(derivative(v0, 1), derivative(vp, 1), rule)) -
                        commutator_vh(vp, derivative(v0, 2), rule) - commutator_vh(v0, derivative(vp, 2), rule);
  return derivative(inner, 1);
}

/// L''(phi, psi) = (-2H[Psi_x varphi_x] + [varphi;H]Psi_xx + [Psi;H]varphi_xx)_x
inline SpectralField second_derivative(const SpectralField& phi, const SpectralField& psi,
                                       ProductRule rule = ProductRule::dealiased) {
  check_same_grid(phi, psi);
  detail::require_real_zero_mean(phi, "second_derivative");
  detail::require_real_zero_mean(psi, "second_derivative");
  SpectralField vp = hilbert(phi);
  SpectralField ps = hilbert(psi);
  SpectralField inner = -2.0 * hilbert(pointwise_product(derivative(ps, 1), derivative(vp, 1), rule)) +
                        commutator_vh(vp, derivative(ps, 2), rule) + commutator_vh(ps, derivative(vp, 2), rule);
  return derivative(inner, 1);
}

struct StabilityCoefficient {
  std::vector<double> values;  // mu - 2 H[phi]_x at the grid nodes
  double min_value = 0.0;
};

inline StabilityCoefficient stability_coefficient(const SpectralField& phi, double mu) {
  detail::require_real_zero_mean(phi, "stability_coefficient");
  auto d = synthesize_real(derivative(hilbert(phi), 1));
  StabilityCoefficient s;
  s.values.resize(d.size());
  s.min_value = std::numeric_limits<double>::infinity();
  for (size_t j = 0; j < d.size(); ++j) {
    s.values[j] = mu - 2.0 * d[j];
    s.min_value = std::min(s.min_value, s.values[j]);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Lifting

struct CauchyData {
  SpectralField phi0;
  SpectralField phi1;

  CauchyData() = default;
  CauchyData(SpectralField p0, SpectralField p1) : phi0(std::move(p0)), phi1(std::move(p1)) { validate(); }
  explicit CauchyData(const TorusGrid& g) : phi0(g), phi1(g) {}

  void validate() const {
    check_same_grid(phi0, phi1);
    detail::require_real_zero_mean(phi0, "CauchyData.phi0");
    detail::require_real_zero_mean(phi1, "CauchyData.phi1");
  }
  const TorusGrid& grid() const { return phi0.grid(); }
};

/// Cutoff in time: 1 on |t| <= w, 0 on |t| >= 2w, smooth step in between.
class TimeCutoff {
 public:
  explicit TimeCutoff(double w = 1.0) : w_(w) {
    if (!(w > 0.0)) throw RangeError("TimeCutoff: width must be positive");
  }
  double width() const { return w_; }

  double value(double t) const {
    double u = (std::abs(t) - w_) / w_;
    if (u <= 0.0) return 1.0;
    if (u >= 1.0) return 0.0;
    return 1.0 - step(u).s;
  }
  double first(double t) const {
    double u = (std::abs(t) - w_) / w_;
    if (u <= 0.0 || u >= 1.0) return 0.0;
    return -step(u).ds * (t > 0 ? 1.0 : -1.0) / w_;
  }
  double second(double t) const {
    double u = (std::abs(t) - w_) / w_;
    if (u <= 0.0 || u >= 1.0) return 0.0;
    return -step(u).d2s / (w_ * w_);
  }

 private:
  struct Step {
    double s, ds, d2s;
  };
  // psi(s) = exp(-1/s), S(u) = psi(u) / (psi(u) + psi(1-u)), for 0 < u < 1.
  static Step step(double u) {
    auto psi = [](double s, double& d1, double& d2) {
      if (s < 1e-3) {  // exp(-1000) underflows; avoid 0/0 in the derivatives
        d1 = d2 = 0.0;
        return 0.0;
      }
      double p = std::exp(-1.0 / s);
      d1 = p / (s * s);
      d2 = p * (1.0 - 2.0 * s) / (s * s * s * s);
      return p;
    };
    double a1, a2, b1, b2;
    double a = psi(u, a1, a2);
    double b = psi(1.0 - u, b1, b2);
    b1 = -b1;  // chain rule for 1-u
    double D = a + b;
    double num1 = a1 * b - a * b1;
    Step st;
    st.s = a / D;
    st.ds = num1 / (D * D);
    st.d2s = (a2 * b - a * b2) / (D * D) - 2.0 * num1 * (a1 + b1) / (D * D * D);
    return st;
  }

  double w_;
};

class Lifting {
 public:
  Lifting(CauchyData data, double mu, double delta, double ramp_width)
      : data_(std::move(data)), mu_(mu), delta_(delta), chi_(ramp_width) {}

  const CauchyData& data() const { return data_; }
  double mu() const { return mu_; }
  double delta() const { return delta_; }
  double ramp_width() const { return chi_.width(); }
  const TimeCutoff& cutoff() const { return chi_; }

  // chi(t) (phi0 + t phi1)
  SpectralField phi(double t) const { return chi_.value(t) * (data_.phi0 + t * data_.phi1); }
  SpectralField phi_t(double t) const {
    return chi_.first(t) * (data_.phi0 + t * data_.phi1) + chi_.value(t) * data_.phi1;
  }
  SpectralField phi_tt(double t) const {
    return chi_.second(t) * (data_.phi0 + t * data_.phi1) + (2.0 * chi_.first(t)) * data_.phi1;
  }

  /// Minimum of mu - 2 H[phi^a]_x over the grid and `samples` times in [-2w, 2w].
  double min_stability(int samples = 401) const {
    auto s0 = synthesize_real(derivative(hilbert(data_.phi0), 1));
    auto s1 = synthesize_real(derivative(hilbert(data_.phi1), 1));
    const double w = chi_.width();
    double m = std::numeric_limits<double>::infinity();
    for (int i = 0; i < samples; ++i) {
      double t = -2.0 * w + 4.0 * w * i / (samples - 1);
      double c = chi_.value(t);
      for (size_t j = 0; j < s0.size(); ++j) m = std::min(m, mu_ - 2.0 * c * (s0[j] + t * s1[j]));
    }
    return m;
  }

 private:
  CauchyData data_;
  double mu_;
  double delta_;
  TimeCutoff chi_;
};

struct LiftingOptions {
  double initial_ramp = 1.0;
  double ramp_floor = 1e-4;
  int time_samples = 401;
};

inline Lifting build_lifting(const CauchyData& data, double mu, double delta, const LiftingOptions& opt = {}) {
  data.validate();
  if (!(delta > 0.0)) throw RangeError("build_lifting: delta must be positive");
  double m0 = stability_coefficient(data.phi0, mu).min_value;
  if (m0 < delta)
    throw PreconditionError("build_lifting: stability coefficient of phi0 is " + std::to_string(m0) +
                            " < delta = " + std::to_string(delta));
  for (double w = opt.initial_ramp; w >= opt.ramp_floor; w *= 0.5) {
    Lifting lift(data, mu, delta, w);
    if (lift.min_stability(opt.time_samples) >= 0.75 * delta) return lift;
  }
  throw LiftingFailure("build_lifting: no ramp width down to " + std::to_string(opt.ramp_floor) +
                       " keeps the stability coefficient above 3 delta / 4");
}

/// F^a(t) = -(phi^a_tt - mu phi^a_xx - N(phi^a)) for t >= 0 and 0 for t < 0.
inline SpectralField forcing_at(const Lifting& lift, double mu, double t, ProductRule rule = ProductRule::dealiased) {
  const TorusGrid& g = lift.data().grid();
  if (t < 0.0) return SpectralField(g);
  SpectralField pa = lift.phi(t);
  SpectralField f = -(lift.phi_tt(t) + spatial_residual(pa, mu, rule));
  f.zero_mean();
  return f;
}

inline FieldSeries forcing_Fa(const Lifting& lift, double mu, const std::vector<double>& times,
                              ProductRule rule = ProductRule::dealiased) {
  FieldSeries out;
  for (double t : times) out.push_back(t, forcing_at(lift, mu, t, rule));
  return out;
}

}  // namespace amp_sheet
