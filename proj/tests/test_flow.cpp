#include <doctest.h>

#include <cmath>

#include "rbflow/error.hpp"
#include "rbflow/flow.hpp"

using namespace rbflow;

namespace {

MetricState einstein_state(int n, double s) {
  FamilySpec spec;
  spec.n = n;
  spec.initial.s0 = s;
  return init_state(spec);
}

MetricState su2_state(double a, double b, double c) {
  FamilySpec spec;
  spec.kind = FamilyKind::SU2Homogeneous;
  spec.initial.triple = {a, b, c};
  return init_state(spec);
}

MetricState torus_state(int n, Preset preset, double amplitude) {
  FamilySpec spec;
  spec.kind = FamilyKind::ConformalTorus2D;
  spec.n = 2;
  spec.resolution = n;
  spec.initial.preset = preset;
  spec.initial.amplitude = amplitude;
  return init_state(spec);
}

FlowParams params(int n, double rho, double t_max, double dt = 1e-3) {
  FlowParams p;
  p.n = n;
  p.rho = rho;
  p.t_max = t_max;
  p.dt_init = dt;
  return p;
}

}  // namespace

TEST_CASE("rb_rhs examples") {
  CHECK(std::get<EinsteinScale>(rb_rhs(einstein_state(3, 1.0), 0.0)).s == doctest::Approx(-4.0));
  CHECK(std::get<EinsteinScale>(rb_rhs(einstein_state(2, 1.0), 0.5)).s == 0.0);
  const auto su = std::get<Su2Triple>(rb_rhs(su2_state(1, 1, 1), 0.0));
  CHECK(su.a == doctest::Approx(-4.0));
  CHECK(su.b == doctest::Approx(-4.0));
  CHECK(su.c == doctest::Approx(-4.0));
  const auto du = std::get<ConformalFactor>(rb_rhs(torus_state(16, Preset::Constant, 0.4), 0.1)).u;
  CHECK(du.cwiseAbs().maxCoeff() <= 1e-12);
  // ds/dt = -2(n-1)(1 - n rho) for every n, rho.
  for (int n : {2, 3, 5}) {
    for (double rho : {-0.5, 0.0, 0.1}) {
      CHECK(std::get<EinsteinScale>(rb_rhs(einstein_state(n, 2.0), rho)).s ==
            doctest::Approx(-2.0 * (n - 1) * (1.0 - n * rho)));
    }
  }
}

TEST_CASE("SU(2) right-hand side matches the round Einstein flow for every rho") {
  for (double rho : {-0.3, 0.0, 0.2}) {
    const auto su = std::get<Su2Triple>(rb_rhs(su2_state(2, 2, 2), rho));
    const double ds = std::get<EinsteinScale>(rb_rhs(einstein_state(3, 2.0), rho)).s;
    CHECK(su.a == doctest::Approx(ds).epsilon(1e-12));
    CHECK(su.c == doctest::Approx(ds).epsilon(1e-12));
  }
}

TEST_CASE("Einstein blow-up times") {
  const auto t0 = integrate(einstein_state(3, 1.0), params(3, 0.0, 1.0));
  CHECK(t0.stop_reason == StopReason::Blowup);
  CHECK(t0.t_stop == doctest::Approx(0.25).epsilon(4e-3));
  CHECK(std::abs(t0.t_stop - 0.25) <= 1e-3);

  const auto t1 = integrate(einstein_state(3, 1.0), params(3, 0.25, 2.0));
  CHECK(t1.stop_reason == StopReason::Blowup);
  CHECK(std::abs(t1.t_stop - 1.0) <= 1e-3);
}

TEST_CASE("trajectory invariants") {
  auto p = params(3, 0.0, 0.2);
  p.sample_interval = 0.013;
  const auto traj = integrate(einstein_state(3, 1.0), p);
  CHECK(traj.stop_reason == StopReason::Horizon);
  CHECK(traj.samples.back().t == traj.t_stop);
  CHECK(traj.t_stop == doctest::Approx(0.2));
  for (std::size_t k = 1; k < traj.samples.size(); ++k) CHECK(traj.samples[k].t > traj.samples[k - 1].t);
  for (const auto& s : traj.samples) {
    CHECK(std::get<EinsteinScale>(s.state.dof).s == doctest::Approx(1.0 - 4.0 * s.t).epsilon(1e-12));
  }
}

TEST_CASE("immediate blow-up is reported at t = 0") {
  auto p = params(3, 0.0, 1.0);
  p.blowup_threshold = 1.0;
  const auto traj = integrate(einstein_state(3, 1.0), p);
  CHECK(traj.stop_reason == StopReason::Blowup);
  CHECK(traj.t_stop == 0.0);
  CHECK(traj.samples.size() == 1);
}

TEST_CASE("RK4 is fourth order on a nonlinear SU(2) trajectory") {
  const auto s0 = su2_state(1.0, 1.3, 0.7);
  const double t_end = 0.05;
  auto solve = [&](double dt) {
    auto p = params(3, 0.05, t_end, dt);
    return std::get<Su2Triple>(integrate(s0, p).samples.back().state.dof);
  };
  const auto ref = solve(1e-5);
  auto err = [&](double dt) {
    const auto m = solve(dt);
    return std::abs(m.a - ref.a) + std::abs(m.b - ref.b) + std::abs(m.c - ref.c);
  };
  const double e1 = err(5e-3), e2 = err(2.5e-3);
  CHECK(e1 / e2 >= 8.0);

  // The Einstein trajectory is linear in t, so RK4 reproduces it exactly.
  for (double dt : {1e-2, 5e-3}) {
    auto p = params(3, 0.0, 0.1, dt);
    const double s = std::get<EinsteinScale>(integrate(einstein_state(3, 1.0), p).samples.back().state.dof).s;
    CHECK(std::abs(s - 0.6) <= 1e-14);
  }
}

TEST_CASE("torus cos_x flow decays diffusively") {
  const auto s0 = torus_state(32, Preset::CosX, 0.1);
  FlowParams p;
  p.n = 2;
  p.dt_policy = DtPolicy::CflAdaptive;
  p.t_max = 0.5;
  p.sample_interval = 0.05;
  const auto traj = integrate(s0, p);
  CHECK(traj.stop_reason == StopReason::Horizon);
  double prev = 1e300;
  for (const auto& s : traj.samples) {
    const auto& u = std::get<ConformalFactor>(s.state.dof).u;
    const double osc = (u.array() - u.mean()).abs().maxCoeff();
    CHECK(osc < prev);
    prev = osc;
  }
}

TEST_CASE("CFL step size") {
  const auto s0 = torus_state(32, Preset::CosX, 0.1);
  FlowParams p;
  p.n = 2;
  p.rho = 0.1;
  p.dt_policy = DtPolicy::CflAdaptive;
  p.dt_init = 1.0;
  const double h = 1.0 / 32.0;
  const double limit = 0.5 * h * h * std::exp(-0.2) / (4.0 * (1.0 - 0.2));
  CHECK(step_size(s0, p) <= limit * (1.0 + 1e-12));
  CHECK(step_size(s0, p) >= 0.9 * limit);
  p.dt_policy = DtPolicy::Fixed;
  p.dt_init = 1e-3;
  CHECK(step_size(s0, p) == 1e-3);
}

TEST_CASE("flow parameter validation") {
  CHECK_THROWS_AS(validate(params(3, 0.25, 1.0), FamilyKind::ConformalTorus2D), ConfigError);
  CHECK_NOTHROW(validate(params(3, 0.25, 1.0), FamilyKind::EinsteinSphere));
  CHECK_THROWS_AS(validate(params(3, 0.3, 1.0), FamilyKind::EinsteinSphere), ConfigError);
  CHECK_THROWS_AS(validate(params(2, 0.5, 1.0), FamilyKind::ConformalSphere2D), ConfigError);
  auto p = params(3, 0.0, 1.0);
  p.dt_init = 0.0;
  CHECK_THROWS_AS(validate(p, FamilyKind::EinsteinSphere), ConfigError);
  p = params(3, 0.0, -1.0);
  CHECK_THROWS_AS(validate(p, FamilyKind::EinsteinSphere), ConfigError);
  p = params(3, 0.0, 1.0);
  p.blowup_threshold = 0.0;
  CHECK_THROWS_AS(validate(p, FamilyKind::EinsteinSphere), ConfigError);
  CHECK(rho_limit(3) == 0.25);
  CHECK(rho_limit(2) == 0.5);
}

TEST_CASE("sigma comparison solution") {
  CHECK(sigma_bound(6.0, 0.0, 0.0) == 6.0);
  CHECK(sigma_bound(6.0, 0.0, 1.0 / 24.0) == doctest::Approx(12.0));
  CHECK(sigma_horizon(6.0, 0.0) == doctest::Approx(1.0 / 12.0));
  CHECK_THROWS_AS(sigma_bound(6.0, 0.0, 1.0 / 12.0), DomainError);
  CHECK_THROWS_AS(sigma_bound(6.0, 0.0, 0.2), DomainError);
  // d sigma/dt = 2(1 - rho) sigma^2.
  const double t = 0.01, h = 1e-6, rho = 0.3;
  const double d = (sigma_bound(6.0, rho, t + h) - sigma_bound(6.0, rho, t - h)) / (2 * h);
  CHECK(d == doctest::Approx(2.0 * (1.0 - rho) * std::pow(sigma_bound(6.0, rho, t), 2)).epsilon(1e-7));
}

TEST_CASE("blow-up time bound") {
  CHECK(blowup_time_bound(3, 0.0, 6.0) == doctest::Approx(0.25));
  CHECK(blowup_time_bound(3, 0.1, 6.0) == doctest::Approx(3.0 / (2.0 * 0.7 * 6.0)));
  CHECK_THROWS_AS(blowup_time_bound(3, 0.0, 0.0), DomainError);
  CHECK_THROWS_AS(blowup_time_bound(3, 1.0 / 3.0, 6.0), DomainError);
}

TEST_CASE("evolution identity residuals") {
  auto p = params(3, 0.0, 0.2, 1e-4);
  p.sample_interval = 1e-4;
  const auto traj = integrate(einstein_state(3, 1.0), p);
  const auto mid = traj.samples.size() / 2;
  const auto res = evolution_identity_residuals(traj, mid);
  const double R = traj.samples[mid].curvature.R[0];
  CHECK(res.scalar <= 1e-6 * R * R);
  CHECK(res.volume <= 1e-6 * volume(traj.samples[mid].state));
  CHECK_THROWS_AS(evolution_identity_residuals(traj, 0), DomainError);
  CHECK_THROWS_AS(evolution_identity_residuals(traj, traj.samples.size() - 1), DomainError);

  FlowParams q;
  q.n = 2;
  q.dt_policy = DtPolicy::CflAdaptive;
  q.t_max = 0.01;
  q.sample_interval = 0.005;
  const auto flat = integrate(torus_state(16, Preset::Zero, 0.0), q);
  const auto r0 = evolution_identity_residuals(flat, 1);
  CHECK(r0.scalar == 0.0);
  CHECK(r0.volume == 0.0);
}

TEST_CASE("advance lands exactly and refuses to pass a singularity") {
  auto p = params(3, 0.0, 1.0, 1e-2);
  const auto s = advance(einstein_state(3, 1.0), p, 0.123);
  CHECK(s.t == 0.123);
  CHECK(std::get<EinsteinScale>(s.dof).s == doctest::Approx(1.0 - 4.0 * 0.123).epsilon(1e-13));
  CHECK_THROWS_AS(advance(einstein_state(3, 1.0), p, 0.3), NumericError);
}

TEST_CASE("blow-up in the scalar curvature proxy on SU(2)") {
  const auto traj = integrate(su2_state(1, 1, 0.8), params(3, 0.0, 2.0, 1e-3));
  CHECK(traj.stop_reason == StopReason::Blowup);
  CHECK(traj.samples.back().curvature.riem_mag > 1e6);
  CHECK(traj.t_stop <= blowup_time_bound(3, 0.0, traj.samples.front().curvature.R_min) * (1.0 + 1e-3));
}
