#include <doctest.h>

#include "helpers.hpp"
#include "mvf/coupling.hpp"
#include "mvf/presets.hpp"
#include "mvf/state.hpp"

using namespace mvf;
using testing::pi;

namespace {

State uniform_m(const Grid& g, std::array<double, 3> m) {
  PresetOptions o;
  o.m = m;
  return preset_state(g, "constant_m", o);
}

}  // namespace

TEST_CASE("parameters must be positive") {
  PhysParams p;
  CHECK_NOTHROW(p.validate());
  p.alpha = 0.0;
  CHECK_THROWS_AS(p.validate(), Error);
}

TEST_CASE("step count requires an integer number of steps") {
  CHECK(step_count(0.2, 1e-3) == 200);
  CHECK_THROWS_AS(step_count(0.2, 0.3), Error);
}

TEST_CASE("penalty force") {
  Grid g(8, 8, 1.0, 1.0);
  Vector3Field m(g, Bc::neumann_zero);
  m.comp(0).setConstant(2.0);
  auto f = penalty_force(m, 0.5);
  CHECK(f(0, 0) == doctest::Approx(4.0 * 3.0 * 2.0));
  CHECK(f(0, 1) == 0.0);
}

TEST_CASE("magnetic stress converges at second order") {
  auto err = [](int n) {
    Grid g(n, n, 1.0, 1.0);
    Vector3Field m(g, Bc::neumann_zero);
    m.comp(0) = sample(g, Bc::none, [](double x, double) { return std::cos(2 * pi * x); }).values();
    auto s = elastic_stress_div(m, Tensor22Field(g, Bc::dirichlet_zero));
    double e = 0.0;
    for (int j = 0; j <= n; ++j)
      for (int i = 0; i <= n; ++i) {
        const double x = g.x(i);
        const double exact = 8 * pi * pi * pi * std::sin(2 * pi * x) * std::cos(2 * pi * x);
        e = std::max(e, std::abs(s(g.index(i, j), 0) - exact));
        e = std::max(e, std::abs(s(g.index(i, j), 1)));
      }
    return e;
  };
  CHECK(testing::order(err(32), err(64)) == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("zero data is stationary") {
  Grid g(16, 16, 1.0, 1.0);
  auto s0 = uniform_m(g, {0.0, 0.6, 0.8});
  auto h = constant_control(g, 20, {0.0, 0.0, 0.0});
  auto traj = solve_state(s0, h, 0.02, 1e-3, PhysParams{});
  const auto& last = traj.states.back();
  CHECK(testing::max_abs(last.v) < 1e-13);
  CHECK(testing::max_abs(last.F) < 1e-13);
  CHECK(testing::max_abs(last.M - s0.M) < 1e-13);
  CHECK(last.t == doctest::Approx(0.02));
}

TEST_CASE("F = 0 stays exactly zero") {
  Grid g(16, 16, 1.0, 1.0);
  auto s0 = preset_state(g, "vortex");
  s0.F.values().setZero();
  SplitMix64 rng(2);
  auto h = random_smooth_control(g, 30, 1e-3, rng, 0.5);
  auto traj = solve_state(s0, h, 0.03, 1e-3, PhysParams{});
  for (const auto& s : traj.states) CHECK(testing::max_abs(s.F) == 0.0);
  CHECK(testing::max_abs(traj.states.back().v) > 0.0);
}

TEST_CASE("one homogeneous step is the split scalar update") {
  Grid g(8, 8, 1.0, 1.0);
  const std::array<double, 3> m{0.3, -0.2, 1.1};
  const double c = 0.7, dt = 1e-2, alpha = 0.8;
  auto s0 = uniform_m(g, m);
  auto h = constant_control(g, 1, {0.0, 0.0, c});
  PhysParams p{1.0, 1.0, alpha};
  auto s1 = step_state(s0, h[0], dt, p);
  const double k = (m[0] * m[0] + m[1] * m[1] + m[2] * m[2] - 1.0) / (alpha * alpha);
  const std::array<double, 3> expect{m[0] - dt * k * m[0], m[1] - dt * k * m[1],
                                     m[2] + dt * (c - k * m[2])};
  for (int node = 0; node < g.nodes(); ++node)
    for (int a = 0; a < 3; ++a) CHECK(s1.M(node, a) == doctest::Approx(expect[a]).epsilon(1e-13));
  CHECK(testing::max_abs(s1.v) < 1e-14);
}

TEST_CASE("homogeneous run converges to the ODE at first order") {
  Grid g(8, 8, 1.0, 1.0);
  const std::array<double, 3> m{0.5, 0.1, 0.4};
  const std::array<double, 3> hc{0.2, 0.0, 0.6};
  const auto exact = testing::rk4_magnetization(m, hc, 1.0, 1.0, 20000);
  std::vector<double> errs;
  for (double dt : {1e-2, 5e-3, 2.5e-3}) {
    const int n = step_count(1.0, dt);
    auto traj = solve_state(uniform_m(g, m), constant_control(g, n, hc), 1.0, dt, PhysParams{});
    double e = 0.0;
    for (int a = 0; a < 3; ++a)
      e = std::max(e, (traj.states.back().M.comp(a).array() - exact[a]).abs().maxCoeff());
    errs.push_back(e);
    CHECK(e <= 5 * dt);
  }
  CHECK(testing::order(errs[0], errs[1]) == doctest::Approx(1.0).epsilon(0.1));
  CHECK(testing::order(errs[1], errs[2]) == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("self convergence under dt halving") {
  Grid g(16, 16, 1.0, 1.0);
  auto s0 = preset_state(g, "vortex");
  // long enough that the stiff initial transient does not dominate
  const double T = 0.2;
  std::vector<State> finals;
  for (double dt : {2e-3, 1e-3, 5e-4, 2.5e-4}) {
    const int n = step_count(T, dt);
    auto h = constant_control(g, n, {0.1, 0.0, 0.3});
    finals.push_back(solve_state(s0, h, T, dt, PhysParams{}).states.back());
  }
  auto diff = [](const State& a, const State& b) {
    return norm_l2(a.v - b.v) + norm_l2(a.F - b.F) + norm_l2(a.M - b.M);
  };
  const double d1 = diff(finals[0], finals[1]);
  const double d2 = diff(finals[1], finals[2]);
  const double d3 = diff(finals[2], finals[3]);
  CHECK(testing::order(d1, d2) >= 0.9);
  CHECK(testing::order(d2, d3) >= 0.9);
}

TEST_CASE("velocity stays weakly divergence free") {
  Grid g(16, 16, 1.0, 1.0);
  auto s0 = preset_state(g, "vortex");
  SplitMix64 rng(6);
  auto h = random_smooth_control(g, 10, 1e-3, rng, 0.5);
  auto traj = solve_state(s0, h, 0.01, 1e-3, PhysParams{});
  for (double r : traj.residuals) CHECK(r < 1e-10);
  for (const auto& s : traj.states) CHECK(std::abs(mean(s.p)) < 1e-10);
}

TEST_CASE("energy does not increase without a field") {
  Grid g(16, 16, 1.0, 1.0);
  auto s0 = preset_state(g, "vortex");
  auto h = constant_control(g, 50, {0.0, 0.0, 0.0});
  auto traj = solve_state(s0, h, 0.05, 1e-3, PhysParams{});
  auto rep = energy_report(traj);
  CHECK(rep.dissipative);
  for (double d : rep.increments) CHECK(d <= rep.tolerance);
  CHECK(rep.internal.back() < rep.internal.front());
  CHECK(rep.tolerance == doctest::Approx(1e-8 * (1 + rep.internal.front())));
}

TEST_CASE("energy parts") {
  Grid g(16, 16, 1.0, 1.0);
  auto s = uniform_m(g, {0.0, 0.0, 2.0});
  Vector3Field h(g, Bc::neumann_zero);
  h.comp(2).setConstant(0.5);
  auto e = total_energy(s, h, PhysParams{});
  CHECK(e.kinetic == 0.0);
  CHECK(e.elastic == 0.0);
  CHECK(e.exchange == doctest::Approx(0.0));
  CHECK(e.penalty == doctest::Approx(9.0 / 4.0));
  CHECK(e.zeeman == doctest::Approx(-1.0));
}

TEST_CASE("strong norm monitor reports a finite envelope") {
  Grid g(16, 16, 1.0, 1.0);
  auto traj = solve_state(preset_state(g, "vortex"), constant_control(g, 20, {0, 0, 0}), 0.02,
                          1e-3, PhysParams{});
  auto ns = strong_norm_monitor(traj);
  REQUIRE(ns.A.size() == 21);
  for (double a : ns.A) CHECK(std::isfinite(a));
  CHECK(std::isfinite(ns.growth_rate));
}

TEST_CASE("CFL violations are step errors") {
  Grid g(8, 8, 1.0, 1.0);
  PresetOptions o;
  o.amplitude = 1e4;
  auto s = preset_state(g, "vortex", o);
  StateStepper st(g, PhysParams{}, 1e-2);
  try {
    st.check_cfl(s, 7);
    FAIL("expected a step error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::step);
    CHECK(std::string(e.what()).find('7') != std::string::npos);
  }
}

TEST_CASE("save stride keeps every stride-th state") {
  Grid g(8, 8, 1.0, 1.0);
  auto traj = solve_state(preset_state(g, "vortex"), constant_control(g, 10, {0, 0, 0}), 0.01,
                          1e-3, PhysParams{}, {}, 5);
  CHECK(traj.states.size() == 3);
  CHECK(traj.has_step(5));
  CHECK_FALSE(traj.has_step(3));
  CHECK_THROWS_AS(traj.at_step(3), Error);
  CHECK_THROWS_AS(traj.require_full_checkpoints("test"), Error);
  CHECK(traj.at_step(10).t == doctest::Approx(0.01));
}

TEST_CASE("control sample count is checked") {
  Grid g(8, 8, 1.0, 1.0);
  CHECK_THROWS_AS(solve_state(preset_state(g, "zero"), constant_control(g, 5, {0, 0, 0}), 0.01,
                              1e-3, PhysParams{}),
                  Error);
}
