#include <amp_sheet/operators.hpp>
#include <amp_sheet/random_fields.hpp>

#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "oracles.hpp"

using namespace amp_sheet;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
SpectralField rnd(const TorusGrid& g, std::uint64_t seed, int B = 8, double scale = 1.0) {
  auto rng = draw_engine(seed, 0);
  return random_real_field(g, {B, 2.0, true, scale}, rng);
}
}  // namespace

TEST_CASE("quadratic_rhs closed forms and oracle", "[N]") {
  TorusGrid g(32);
  CHECK(quadratic_rhs(SpectralField(g)).is_zero());
  auto n1 = quadratic_rhs(cos_mode(g, 1));
  CHECK(max_coeff_diff(n1, cos_mode(g, 2)) < 1e-13);
  auto ref = oracle::quadratic_rhs(cos_mode(g, 1), 32);
  CHECK(oracle::max_diff(ref, n1) < 1e-12);
  for (std::uint64_t s = 0; s < 5; ++s) {
    auto f = rnd(g, s, 7);
    auto n = quadratic_rhs(f);
    CHECK(oracle::max_diff(oracle::quadratic_rhs(f, 64), n) < 1e-11);
    CHECK(n.is_real());
    CHECK(n[0] == cplx(0.0));
    CHECK(max_coeff_diff(n, quadratic_rhs_integro(f)) < 1e-12);
  }
  // scaling
  auto f = rnd(g, 9, 7);
  CHECK(l2_norm(quadratic_rhs(3.0 * f) - 9.0 * quadratic_rhs(f)) < 1e-11 * l2_norm(quadratic_rhs(f)) * 9);
}

TEST_CASE("quadratic_rhs domain checks", "[N]") {
  TorusGrid g(16);
  auto f = cos_mode(g, 1);
  f.at(0) = 1.0;
  CHECK_THROWS_AS(quadratic_rhs(f), DomainError);
  CHECK_THROWS_AS(quadratic_rhs(exp_mode(g, 1)), DomainError);
}

TEST_CASE("residual_L", "[residual]") {
  TorusGrid g(32);
  const double dt = 1e-3;
  // static trajectory
  Trajectory st;
  for (int i = 0; i < 3; ++i) st.push_back(i * dt, StepState(cos_mode(g, 1), SpectralField(g)));
  auto r = residual_L(st, 2.0, 1);
  CHECK(max_coeff_diff(r, cos_mode(g, 1, 2.0) - cos_mode(g, 2)) < 1e-12);
  CHECK_THROWS_AS(residual_L(st, 1.0, 0), BoundaryIndexError);
  CHECK_THROWS_AS(residual_L(st, 1.0, 2), BoundaryIndexError);
  // zero trajectory
  Trajectory z;
  for (int i = 0; i < 3; ++i) z.push_back(i * dt, StepState(g));
  CHECK(residual_L(z, 1.0, 1).is_zero());
  // travelling wave of the linear part: residual of phi_tt - phi_xx is O(dt^2); the N part is exact.
  for (double h : {1e-2, 5e-3}) {
    Trajectory w;
    for (int i = 0; i < 3; ++i) {
      double t = 0.3 + i * h;
      w.push_back(t, StepState(from_modes(g, {TrigMode{1, std::cos(t), std::sin(t)}}), SpectralField(g)));
    }
    SpectralField lin = residual_L(w, 1.0, 1) + quadratic_rhs(w[1].phi);
    CHECK(sup_norm(lin) < 0.1 * h * h);
  }
}

TEST_CASE("linearized_rhs split", "[linearized]") {
  TorusGrid g(32);
  auto p = rnd(g, 3, 8);
  auto zero = linearized_rhs(SpectralField(g), p, 1.7);
  CHECK(zero.lower_order.is_zero());
  CHECK(zero.coefficient.bandwidth() == 0);
  CHECK_THAT(zero.coefficient.mean(), WithinAbs(1.7, 1e-15));

  // lin1 / lin2 agreement
  for (std::uint64_t s = 0; s < 10; ++s) {
    auto a = rnd(g, s, 7), b = rnd(g, s + 20, 7);
    auto assembled = linearized_action(a, b, 1.3);
    auto direct = 1.3 * derivative(b, 2) + quadratic_rhs_derivative(a, b);
    CHECK(l2_norm(assembled - direct) < 1e-11 * std::max(1.0, l2_norm(direct)));
    CHECK(assembled.is_real());
    CHECK(std::abs(assembled[0]) < 1e-13);
  }
  // homogeneity: dN[p]p = 2 N(p); for cos x the action is mu phi_xx + 2 cos 2x
  auto c = cos_mode(g, 1);
  CHECK(l2_norm(quadratic_rhs_derivative(p, p) - 2.0 * quadratic_rhs(p)) < 1e-11);
  CHECK(max_coeff_diff(linearized_action(c, c, 1.0), derivative(c, 2) + cos_mode(g, 2, 2.0)) < 1e-12);
  CHECK_THROWS_AS(linearized_rhs(c, cos_mode(TorusGrid(16), 1), 1.0), GridMismatchError);
}

TEST_CASE("linearized_rhs is the Gateaux derivative", "[linearized]") {
  TorusGrid g(32);
  auto a = rnd(g, 4, 6), b = rnd(g, 5, 6);
  const double mu = 1.0;
  auto S = [&](const SpectralField& f) { return spatial_residual(f, mu); };
  auto dS = -linearized_action(a, b, mu);
  std::vector<double> le, lerr;
  for (double eps : {1e-1, 5e-2, 2.5e-2, 1.25e-2}) {
    auto fd = (1.0 / eps) * (S(a + eps * b) - S(a));
    le.push_back(std::log(eps));
    lerr.push_back(std::log(l2_norm(fd - dS)));
  }
  double slope = (lerr.back() - lerr.front()) / (le.back() - le.front());
  CHECK(slope >= 0.9);
}

TEST_CASE("quadratic Taylor exactness", "[property]") {
  TorusGrid g(64);
  for (std::uint64_t s = 0; s < 20; ++s) {
    auto a = rnd(g, s, 15), b = rnd(g, s + 40, 15);
    auto dN = linearized_action(a, b, 0.7) - 0.7 * derivative(b, 2);
    auto rem = quadratic_rhs(a + b) - quadratic_rhs(a) - dN - quadratic_rhs(b);
    CHECK(l2_norm(rem) < 1e-11 * l2_norm(quadratic_rhs(a + b)));
  }
}

TEST_CASE("second_derivative", "[L2]") {
  TorusGrid g(32);
  auto a = rnd(g, 1, 7), b = rnd(g, 2, 7);
  CHECK(second_derivative(a, SpectralField(g)).is_zero());
  CHECK(l2_norm(second_derivative(a, b) - second_derivative(b, a)) < 1e-12);
  CHECK(l2_norm(0.5 * second_derivative(a, a) + quadratic_rhs(a)) < 1e-12);
  CHECK(max_coeff_diff(0.5 * second_derivative(cos_mode(g, 1), cos_mode(g, 1)), cos_mode(g, 2, -1.0)) < 1e-13);
  CHECK(l2_norm(second_derivative(2.0 * a, -3.0 * b) + 6.0 * second_derivative(a, b)) < 1e-11);
  auto l2 = second_derivative(a, b);
  CHECK(l2.is_real());
  CHECK(l2[0] == cplx(0.0));
}

TEST_CASE("stability_coefficient", "[stability]") {
  TorusGrid g(32);
  auto z = stability_coefficient(SpectralField(g), 1.5);
  CHECK(z.min_value == 1.5);
  for (double v : z.values) CHECK(v == 1.5);
  const double mu = 1.0, a = 0.3;
  auto s = stability_coefficient(sin_mode(g, 1, a), mu);
  CHECK_THAT(s.min_value, WithinAbs(mu - 2 * a, 1e-13));
  for (int j = 0; j < 32; ++j) CHECK_THAT(s.values[j], WithinAbs(mu - 2 * a * std::sin(g.node(j)), 1e-13));
  CHECK_THAT(stability_coefficient(sin_mode(g, 1, mu / 2), mu).min_value, WithinAbs(0.0, 1e-13));
}

TEST_CASE("time cutoff", "[lifting]") {
  TimeCutoff chi(0.5);
  CHECK(chi.value(0.0) == 1.0);
  CHECK(chi.first(0.0) == 0.0);
  CHECK(chi.value(0.5) == 1.0);
  CHECK(chi.value(1.0) == 0.0);
  CHECK(chi.value(-2.0) == 0.0);
  CHECK_THAT(chi.value(0.75), WithinAbs(0.5, 1e-15));
  // analytic derivatives against finite differences
  for (double t : {-0.9, -0.6, 0.55, 0.7, 0.8, 0.95}) {
    double h = 1e-5;
    CHECK_THAT(chi.first(t), WithinAbs((chi.value(t + h) - chi.value(t - h)) / (2 * h), 1e-7));
    CHECK_THAT(chi.second(t), WithinAbs((chi.first(t + h) - chi.first(t - h)) / (2 * h), 1e-5));
    CHECK(chi.value(t) >= 0.0);
    CHECK(chi.value(t) <= 1.0);
  }
}

TEST_CASE("build_lifting", "[lifting]") {
  TorusGrid g(32);
  CauchyData zero(g);
  auto l0 = build_lifting(zero, 1.0, 0.9);
  CHECK(l0.phi(0.3).is_zero());
  CHECK_THROWS_AS(build_lifting(zero, 0.5, 0.9), PreconditionError);

  CauchyData d(cos_mode(g, 1, 0.1), sin_mode(g, 2, 0.05));
  auto lift = build_lifting(d, 1.0, 0.5);
  CHECK(max_coeff_diff(lift.phi(0.0), d.phi0) == 0.0);
  CHECK(max_coeff_diff(lift.phi_t(0.0), d.phi1) == 0.0);
  double h = 1e-4;
  CHECK(max_coeff_diff((1.0 / (2 * h)) * (lift.phi(h) - lift.phi(-h)), d.phi1) < 1e-8);
  CHECK(lift.min_stability() >= 0.75 * 0.5);
  CHECK(lift.phi(2.5 * lift.ramp_width()).is_zero());
  for (double t : {-0.5, 0.2, 1.3}) {
    auto p = lift.phi(t);
    CHECK(p.is_real());
    CHECK(p[0] == cplx(0.0));
  }
  // phi1 = 0: minimum over time no lower than min(mu, stability at t = 0)
  CauchyData d2(sin_mode(g, 1, 0.2), SpectralField(g));
  auto l2 = build_lifting(d2, 1.0, 0.5);
  CHECK(l2.min_stability() >= std::min(1.0, stability_coefficient(d2.phi0, 1.0).min_value) - 1e-14);
  // large phi1 forces the ramp to shrink
  CauchyData d3(SpectralField(g), sin_mode(g, 1, 2.0));
  auto l3 = build_lifting(d3, 1.0, 0.5);
  CHECK(l3.ramp_width() < 1.0);
  CHECK(l3.min_stability() >= 0.375);
}

TEST_CASE("build_lifting failure", "[lifting]") {
  TorusGrid g(32);
  // stable at t = 0 but immediately violated with huge phi1: gives up at the floor
  CauchyData d(SpectralField(g), sin_mode(g, 1, 1e6));
  CHECK_THROWS_AS(build_lifting(d, 1.0, 0.5), LiftingFailure);
}

TEST_CASE("forcing_Fa", "[forcing]") {
  TorusGrid g(32);
  auto l0 = build_lifting(CauchyData(g), 1.0, 0.9);
  for (double t : {-1.0, 0.0, 0.5}) CHECK(forcing_at(l0, 1.0, t).is_zero());
  const double a = 0.1, mu = 1.0;
  auto lift = build_lifting(CauchyData(cos_mode(g, 1, a), SpectralField(g)), mu, 0.5);
  auto fa = forcing_Fa(lift, mu, {-0.5, -0.1, 0.0, 0.3, 0.5 * lift.ramp_width()});
  CHECK(fa[0].is_zero());
  CHECK(fa[1].is_zero());
  auto expect = cos_mode(g, 1, -mu * a) + cos_mode(g, 2, a * a);
  for (size_t i = 2; i < fa.size(); ++i) {
    CHECK(max_coeff_diff(fa[i], expect) < 1e-13);
    CHECK(fa[i].is_real());
  }
}
