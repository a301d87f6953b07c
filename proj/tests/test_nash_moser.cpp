#include <amp_sheet/nash_moser.hpp>

#include <catch_amalgamated.hpp>

#include <cmath>

using namespace amp_sheet;

namespace {
IterationConfig small_config(double T = 0.5) {
  IterationConfig c;
  c.sim.grid_n = 32;
  c.sim.galerkin_N = 15;
  c.sim.dt = 1e-2;
  c.sim.t_final = T;
  return c;
}
}  // namespace

TEST_CASE("iteration config", "[nm]") {
  IterationConfig c;
  CHECK_NOTHROW(c.validate());
  auto bad = c;
  bad.theta0 = 0.5;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = c;
  bad.theta_growth = 1.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = c;
  bad.sim.grid_n = 3;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  nlohmann::json j = c;
  CHECK(j["sim"]["grid_n"] == 64);
  CHECK(j["max_iters"] == 10);
}

TEST_CASE("smoothing operator", "[nm]") {
  TorusGrid g(32);
  auto f = from_modes(g, {TrigMode{1, 1, 0}, TrigMode{4, 0, 2}, TrigMode{9, 3, 1}});
  CHECK_THROWS_AS(smooth_cutoff(f, 0.5), RangeError);
  auto s = smooth_cutoff(f, 4.5);
  CHECK(s[9] == cplx(0.0));
  CHECK(s[4] == f[4]);
  CHECK(max_coeff_diff(smooth_cutoff(s, 4.5), s) == 0.0);
  CHECK(max_coeff_diff(smooth_cutoff(f, 1e6), f) == 0.0);
  CHECK(sobolev_norm(s, 2) <= sobolev_norm(f, 2));
}

TEST_CASE("zero data converges immediately", "[nm]") {
  auto c = small_config();
  auto r = iterate(c, CauchyData(c.sim.grid()), 1.0, 0.5);
  CHECK(r.report.converged);
  CHECK(r.report.iterations == 0);
  CHECK(r.report.residual_Y2.front() == 0.0);
  CHECK(r.full_solution().back().phi.is_zero());
}

TEST_CASE("small data: convergence and agreement with the forward solve", "[nm]") {
  auto c = small_config();
  TorusGrid g = c.sim.grid();
  CauchyData d(cos_mode(g, 1, 0.01), SpectralField(g));
  auto r = iterate(c, d, 1.0, 0.9);
  const auto& rep = r.report;
  CHECK(rep.converged);
  CHECK(rep.iterations <= 10);
  CHECK(rep.residual_Y2.back() < 1e-8);
  REQUIRE(rep.residual_Y2.size() >= 3);
  CHECK(rep.residual_Y2[1] < 1e-2 * rep.residual_Y2[0]);
  CHECK(rep.residual_Y2[2] < 1e-2 * rep.residual_Y2[1]);
  for (double s : rep.min_stability) CHECK(s >= 0.45);
  CHECK(rep.theta.size() == static_cast<size_t>(rep.iterations));
  CHECK(rep.theta[1] == rep.theta[0] * c.theta_growth);
  CHECK(rep.m_prime == 7);

  auto sim = c.sim;
  sim.mu = 1.0;
  sim.delta = 0.9;
  auto fwd = solve_nonlinear(sim, d).trajectory.back().phi;
  auto nm = r.full_solution();
  CHECK(l2_norm(nm.back().phi - fwd) < 1e-4 * l2_norm(fwd));
  // traces of the full solution equal the data
  CHECK(max_coeff_diff(nm[0].phi, d.phi0) < 1e-14);
  CHECK(max_coeff_diff(nm[0].phit, d.phi1) < 1e-14);
  // u vanishes at t = 0
  CHECK(r.phi_prime[0].phi.is_zero());

  nlohmann::json j = rep;
  CHECK(j["converged"] == true);
  CHECK(j["residual_Y2"].size() == rep.residual_Y2.size());
}

TEST_CASE("stability loss aborts the iteration", "[nm]") {
  auto c = small_config(1.0);
  TorusGrid g = c.sim.grid();
  CHECK_THROWS_AS(iterate(c, CauchyData(SpectralField(g), sin_mode(g, 1, 0.5)), 1.0, 0.9), IterationAbort);
  CHECK_THROWS_AS(iterate(c, CauchyData(sin_mode(g, 1, 0.4), SpectralField(g)), 1.0, 0.9), PreconditionError);
}

TEST_CASE("auto-shrink halves the horizon", "[nm]") {
  auto c = small_config(8.0);
  TorusGrid g = c.sim.grid();
  CauchyData d(cos_mode(g, 1, 0.05) + cos_mode(g, 3, 0.05 / 3), sin_mode(g, 1, 0.2));
  auto fixed = iterate(c, d, 1.0, 0.05);
  CHECK_FALSE(fixed.report.converged);
  CHECK(fixed.report.shrinks == 0);
  c.auto_shrink = true;
  auto r = iterate(c, d, 1.0, 0.05);
  CHECK(r.report.converged);
  CHECK(r.report.shrinks >= 1);
  CHECK(r.report.t_final == 8.0 / std::pow(2.0, r.report.shrinks));
  CHECK(r.phi_prime.times().back() == r.report.t_final);
}
