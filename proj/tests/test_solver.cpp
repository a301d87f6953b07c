#include <amp_sheet/random_fields.hpp>
#include <amp_sheet/solver.hpp>

#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

using namespace amp_sheet;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
SimConfig config(int n, double dt, double T, double mu = 1.0) {
  SimConfig c;
  c.grid_n = n;
  c.galerkin_N = n / 2 - 1;
  c.dt = dt;
  c.t_final = T;
  c.mu = mu;
  c.delta = 0.5;
  return c;
}
FieldSeries series_on_mesh(const SimConfig& cfg, const std::function<SpectralField(double)>& f) {
  FieldSeries s;
  for (double t : cfg.mesh()) s.push_back(t, f(t));
  return s;
}
}  // namespace

TEST_CASE("config validation", "[config]") {
  SimConfig c;
  CHECK_NOTHROW(c.validate());
  for (auto bad : std::vector<std::function<void(SimConfig&)>>{
           [](SimConfig& x) { x.grid_n = 7; }, [](SimConfig& x) { x.galerkin_N = 40; },
           [](SimConfig& x) { x.dt = 0; }, [](SimConfig& x) { x.gamma = 0.5; },
           [](SimConfig& x) { x.cfl_safety = 1.5; }, [](SimConfig& x) { x.delta = -1; },
           [](SimConfig& x) { x.t_final = 0; }}) {
    SimConfig y;
    bad(y);
    CHECK_THROWS_AS(y.validate(), ConfigError);
  }
  SimConfig m;
  m.t_final = 1.0;
  m.dt = 0.3;
  CHECK(m.num_steps() == 4);
  CHECK_THAT(m.step(), WithinAbs(0.25, 1e-15));
  CHECK(m.mesh().back() == 1.0);
}

TEST_CASE("nonlinear right-hand side", "[rhs]") {
  auto cfg = config(32, 1e-3, 1.0);
  TorusGrid g = cfg.grid();
  auto z = semidiscrete_rhs_nonlinear(StepState(g), cfg);
  CHECK(z.phi.is_zero());
  CHECK(z.phit.is_zero());
  auto r = semidiscrete_rhs_nonlinear(StepState(cos_mode(g, 1), SpectralField(g)), cfg);
  CHECK(r.phi.is_zero());
  CHECK(max_coeff_diff(r.phit, cos_mode(g, 2) - cos_mode(g, 1)) < 1e-13);
  cfg.galerkin_N = 1;
  auto r1 = semidiscrete_rhs_nonlinear(StepState(cos_mode(g, 1), SpectralField(g)), cfg);
  CHECK(max_coeff_diff(r1.phit, cos_mode(g, 1, -1.0)) < 1e-13);
}

TEST_CASE("linearized right-hand side", "[rhs]") {
  auto cfg = config(32, 1e-3, 1.0, 2.0);
  TorusGrid g = cfg.grid();
  SpectralField zero(g);
  auto p = cos_mode(g, 3), q = sin_mode(g, 2);
  auto w = semidiscrete_rhs_linearized(StepState(p, q), zero, zero, cfg);
  CHECK(max_coeff_diff(w.phi, q) == 0.0);
  CHECK(max_coeff_diff(w.phit, 2.0 * derivative(p, 2)) < 1e-13);
  auto gonly = semidiscrete_rhs_linearized(StepState(g), zero, cos_mode(g, 1), cfg);
  CHECK(max_coeff_diff(gonly.phit, cos_mode(g, 1)) < 1e-15);

  auto rng = draw_engine(1, 0);
  auto base = random_real_field(g, {5, 2.0, true, 0.1}, rng);
  auto s1 = StepState(random_real_field(g, {8, 2.0, true, 1.0}, rng), random_real_field(g, {8, 2.0, true, 1.0}, rng));
  auto s2 = StepState(random_real_field(g, {8, 2.0, true, 1.0}, rng), random_real_field(g, {8, 2.0, true, 1.0}, rng));
  auto lhs = semidiscrete_rhs_linearized((2.0 * s1) + (-3.0 * s2), base, zero, cfg);
  auto rhs = 2.0 * semidiscrete_rhs_linearized(s1, base, zero, cfg) + (-3.0) * semidiscrete_rhs_linearized(s2, base, zero, cfg);
  CHECK(l2_norm(lhs.phit - rhs.phit) < 1e-12);
  CHECK(l2_norm(lhs.phi - rhs.phi) < 1e-12);
}

TEST_CASE("rk4_step", "[rk4]") {
  TorusGrid g(16);
  SimConfig cfg = config(16, 1e-3, 1.0);
  RhsEvaluator lin = [&](double, const StepState& s) {
    return semidiscrete_rhs_linearized(s, SpectralField(g), SpectralField(g), cfg);
  };
  // harmonic oscillator mode k = 1, one period
  StepState s(cos_mode(g, 1), SpectralField(g));
  const int M = 1000;
  const double dt = 2 * std::numbers::pi / M;
  for (int i = 0; i < M; ++i) s = rk4_step(s, lin, i * dt, dt);
  CHECK(std::abs(s.phi[1] / std::numbers::pi - 1.0) < 1e-8);

  StepState z(g);
  CHECK(rk4_step(z, lin, 0.0, 0.1).phi.is_zero());
  CHECK_THROWS_AS(rk4_step(z, lin, 0.0, 0.1, 0.05), CflViolation);

  // order: halving dt reduces the error by ~16
  auto err = [&](double h) {
    StepState x(cos_mode(g, 4), SpectralField(g));
    int steps = static_cast<int>(std::lround(1.0 / h));
    for (int i = 0; i < steps; ++i) x = rk4_step(x, lin, i * h, h);
    return std::abs(x.phi[4] / std::numbers::pi - std::cos(4.0));
  };
  double e1 = err(0.04), e2 = err(0.02), e3 = err(0.01);
  CHECK(e1 / e2 > 12);
  CHECK(e1 / e2 < 20);
  CHECK(e2 / e3 > 12);
  CHECK(e2 / e3 < 20);
}

TEST_CASE("solve_nonlinear: zero and small data", "[nonlinear]") {
  auto cfg = config(32, 1e-2, 1.0);
  cfg.delta = 0.9;
  auto z = solve_nonlinear(cfg, CauchyData(cfg.grid()));
  CHECK(z.trajectory.size() == 101);
  for (size_t i = 0; i < z.trajectory.size(); ++i) CHECK(z.trajectory[i].phi.is_zero());
  CHECK(z.monitor.flags.empty());

  auto cfg2 = config(64, 1e-3, 1.0);
  cfg2.delta = 0.9;
  auto r = solve_nonlinear(cfg2, CauchyData(cos_mode(cfg2.grid(), 1, 0.01), SpectralField(cfg2.grid())));
  CHECK_FALSE(r.aborted);
  CHECK(r.monitor.min_over_run() >= cfg2.delta / 2);
  CHECK(r.monitor.t_grid.size() == r.trajectory.size());
  for (size_t i = 0; i < r.trajectory.size(); i += 100) {
    CHECK(r.trajectory[i].phi[0] == cplx(0.0));
    CHECK(r.trajectory[i].phit[0] == cplx(0.0));
    CHECK(r.trajectory[i].phi.hermitian_defect() < 1e-12);
  }
}

TEST_CASE("solve_nonlinear: preconditions and flags", "[nonlinear]") {
  auto cfg = config(32, 1e-3, 1.0);
  TorusGrid g = cfg.grid();
  CHECK_THROWS_AS(solve_nonlinear(cfg, CauchyData(sin_mode(g, 1, 0.4), SpectralField(g))), PreconditionError);
  auto r = solve_nonlinear(cfg, CauchyData(SpectralField(g), sin_mode(g, 1, 5.0)));
  CHECK(r.aborted);
  REQUIRE(r.monitor.has_flag(flags::stability));
  CHECK(r.monitor.flags[0].time < 0.2);
  CHECK(r.trajectory.back().phi.hermitian_defect() < 1e-12);
  auto bad = cfg;
  bad.dt = 0.1;
  CHECK_THROWS_AS(solve_nonlinear(bad, CauchyData(g)), CflViolation);
  nlohmann::json j = r.monitor;
  CHECK(j["flags"][0]["type"] == flags::stability);
  CHECK(j["t_grid"].size() == j["min_stability_coeff"].size());
}

TEST_CASE("solve_nonlinear: spectral self-convergence", "[nonlinear]") {
  auto run = [](int n) {
    auto cfg = config(n, 2e-3, 1.0);
    cfg.delta = 0.9;
    TorusGrid g = cfg.grid();
    auto d = CauchyData(from_modes(g, {TrigMode{1, 0.01, 0.0}, TrigMode{2, 0.0, 0.004}}), cos_mode(g, 1, 0.005));
    return solve_nonlinear(cfg, d).trajectory.back().phi;
  };
  auto a = run(64), b = run(128);
  CHECK(l2_norm(resample(b, a.grid()) - a) < 1e-8);
}

TEST_CASE("travelling waves of the linear problem", "[linear]") {
  for (double mu : {1.0, 2.0}) {
    auto cfg = config(64, 1e-3, 1.0, mu);
    TorusGrid g = cfg.grid();
    const int k = 3;
    auto run = integrate_linear(cfg, constant_base(SpectralField(g)), constant_base(SpectralField(g)),
                                single_mode_seed(g, k, mu, 1.0));
    double w = std::sqrt(mu) * k, T = 1.0;
    auto exact = from_modes(g, {TrigMode{k, std::cos(w * T), std::sin(w * T)}});
    CHECK(sup_norm(run.trajectory.back().phi - exact) < 1e-6);
  }
}

TEST_CASE("solve_linearized", "[linear]") {
  auto cfg = config(32, 1e-3, 1.0);
  TorusGrid g = cfg.grid();
  auto zero_base = constant_base(SpectralField(g));
  auto gz = series_on_mesh(cfg, [&](double) { return SpectralField(g); });
  auto z = solve_linearized(cfg, zero_base, gz);
  CHECK(z.trajectory.back().phi.is_zero());

  auto gc = series_on_mesh(cfg, [&](double) { return cos_mode(g, 1); });
  auto r = solve_linearized(cfg, zero_base, gc);
  CHECK(max_coeff_diff(r.trajectory.back().phi, cos_mode(g, 1, 1.0 - std::cos(1.0))) < 1e-6 * std::numbers::pi);
  CHECK(r.trajectory[0].phi.is_zero());
  CHECK(r.trajectory[0].phit.is_zero());

  auto wrong = cfg;
  wrong.dt = 2e-3;
  CHECK_THROWS_AS(solve_linearized(wrong, zero_base, gc), MeshMismatch);
}

TEST_CASE("solve_linearized: superposition and round trip", "[linear]") {
  auto cfg = config(32, 2e-3, 1.0);
  TorusGrid g = cfg.grid();
  auto rng = draw_engine(4, 0);
  auto b = random_real_field(g, {4, 2.0, true, 0.05}, rng);
  auto q1 = random_real_field(g, {6, 2.0, true, 1.0}, rng), q2 = random_real_field(g, {6, 2.0, true, 1.0}, rng);
  auto base = [b](double t) { return (1.0 + 0.5 * std::sin(t)) * b; };
  auto g1 = series_on_mesh(cfg, [&](double t) { return std::sin(3 * t) * q1; });
  auto g2 = series_on_mesh(cfg, [&](double t) { return t * t * q2; });
  auto g12 = series_on_mesh(cfg, [&](double t) { return std::sin(3 * t) * q1 + (-2.0 * t * t) * q2; });
  auto u1 = solve_linearized(cfg, base, g1).trajectory;
  auto u2 = solve_linearized(cfg, base, g2).trajectory;
  auto u12 = solve_linearized(cfg, base, g12).trajectory;
  CHECK(l2_norm(u12.back().phi - (u1.back().phi + (-2.0) * u2.back().phi)) < 1e-10);

  // feed back through the assembled operator: g recovered up to O(dt^2)
  auto resid = [&](double h) {
    auto c = cfg;
    c.dt = h;
    auto gs = series_on_mesh(c, [&](double t) { return std::sin(3 * t) * q1; });
    auto u = solve_linearized(c, base, gs).trajectory;
    double e = 0.0;
    for (size_t i = 1; i + 1 < u.size(); ++i) {
      double t = u.time(i);
      auto tt = (1.0 / (h * h)) * (u[i + 1].phi - 2.0 * u[i].phi + u[i - 1].phi);
      auto back = tt - linearized_action(base(t), u[i].phi, c.mu);
      e = std::max(e, l2_norm(back - gs[i]));
    }
    return e;
  };
  double e1 = resid(4e-3), e2 = resid(2e-3);
  CHECK(e1 < 1e-3);
  CHECK(e1 / e2 > 3.0);
}

TEST_CASE("mode growth", "[growth]") {
  for (int k : {4, 8}) {
    auto cfg = config(64, 1e-3, 2.0, -1.0);
    cfg.galerkin_N = k;
    TorusGrid g = cfg.grid();
    auto run = integrate_linear(cfg, constant_base(SpectralField(g)), constant_base(SpectralField(g)),
                                single_mode_seed(g, k, -1.0, 1e-8));
    CHECK(run.monitor.has_flag(flags::nonpositive_mu));
    auto rate = measure_mode_growth(run.trajectory, {k});
    REQUIRE(rate[0].defined);
    CHECK_THAT(rate[0].rate, WithinRel(static_cast<double>(k), 0.05));
  }
  auto cfg = config(64, 1e-3, 2.0, 1.0);
  TorusGrid g = cfg.grid();
  auto run = integrate_linear(cfg, constant_base(SpectralField(g)), constant_base(SpectralField(g)),
                              single_mode_seed(g, 8, 1.0, 1e-8));
  auto osc = measure_mode_growth(run.trajectory, {8});
  CHECK(std::abs(osc[0].rate) < 0.05);
  auto zero = integrate_linear(cfg, constant_base(SpectralField(g)), constant_base(SpectralField(g)), StepState(g));
  CHECK_FALSE(measure_mode_growth(zero.trajectory, {8})[0].defined);
}

TEST_CASE("Galerkin consistency", "[galerkin]") {
  auto cfg = config(32, 2e-3, 1.0);
  TorusGrid g = cfg.grid();
  auto rng = draw_engine(2, 0);
  auto data = random_real_field(g, {12, 3.0, true, 0.01}, rng);
  auto run = [&](int N) {
    auto c = cfg;
    c.galerkin_N = N;
    return solve_nonlinear(c, CauchyData(data, SpectralField(g))).trajectory.back().phi;
  };
  auto coarse = run(6), fine = run(15);
  double tail = l2_norm(data - project(data, 6));
  CHECK(l2_norm(fine - coarse) <= 1.5 * tail);
}
