#include <doctest.h>

#include <Eigen/Dense>

#include "helpers.hpp"
#include "mvf/grid.hpp"
#include "mvf/presets.hpp"
#include "mvf/stencils.hpp"

using namespace mvf;
using testing::pi;

namespace {

double gradient_error(int n) {
  Grid g(n, n, 1.0, 1.0);
  auto f = sample(g, Bc::none, [](double x, double) { return std::sin(2 * pi * x); });
  auto gf = gradient_scalar(f);
  double e = 0.0;
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) {
      const int k = g.index(i, j);
      e = std::max(e, std::abs(gf(k, 0) - 2 * pi * std::cos(2 * pi * g.x(i))));
      e = std::max(e, std::abs(gf(k, 1)));
    }
  return e;
}

// Composing two first differences is first order within two nodes of the
// boundary, so the error is measured from the third node inward.
double div_grad_error(int n, bool near_boundary = false) {
  Grid g(n, n, 1.0, 1.0);
  auto f = sample(g, Bc::none, [](double x, double) { return std::sin(2 * pi * x); });
  auto d = divergence(gradient_scalar(f));
  double e = 0.0;
  const int skip = near_boundary ? 0 : 2;
  for (int j = 0; j <= n; ++j)
    for (int i = skip; i <= n - skip; ++i) {
      e = std::max(e, std::abs(d(g.index(i, j)) + 4 * pi * pi * std::sin(2 * pi * g.x(i))));
    }
  return e;
}

double neumann_lap_error(int n, double lx) {
  Grid g(n, n, lx, 1.0);
  auto f = sample(g, Bc::neumann_zero, [&](double x, double) { return std::cos(pi * x / lx); });
  auto exact = sample(g, Bc::none, [&](double x, double) {
    return -(pi / lx) * (pi / lx) * std::cos(pi * x / lx);
  });
  auto l = laplacian(f);
  l.set_bc(Bc::none);
  return testing::max_abs(l - exact);
}

double divergence_error(int n) {
  Grid g(n, n, 1.0, 2.0);
  auto u = testing::vector_field(
      g, Bc::none, [](double x, double y) { return std::sin(pi * x) * std::cos(y); },
      [](double x, double y) { return x * x * std::sin(y); });
  auto exact = sample(g, Bc::none, [](double x, double y) {
    return pi * std::cos(pi * x) * std::cos(y) + x * x * std::cos(y);
  });
  return testing::max_abs(divergence(u) - exact);
}

}  // namespace

TEST_CASE("grid indexing and validation") {
  Grid g(8, 9, 2.0, 1.5);
  CHECK(g.nodes() == 90);
  CHECK(g.index(2, 1) == 11);
  CHECK(g.hx() == doctest::Approx(0.25));
  CHECK(g.on_boundary(0, 1));
  CHECK_FALSE(g.on_boundary(1, 1));
  CHECK_THROWS_AS(Grid(4, 8, 1.0, 1.0), Error);
  CHECK_THROWS_AS(Grid(8, 8, -1.0, 1.0), Error);
}

TEST_CASE("gradient error constant is grid stable") {
  // error / h^2 on 32 and 64 agree, so the 64 bound uses the 32 constant
  const double c32 = gradient_error(32) * 32 * 32;
  const double c64 = gradient_error(64) * 64 * 64;
  CHECK(c64 <= 1.1 * c32);
  CHECK(c64 >= 0.9 * c32);
  CHECK(testing::order(gradient_error(32), gradient_error(64)) == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("divergence and Laplacians converge at second order") {
  CHECK(testing::order(divergence_error(32), divergence_error(64)) >= 1.8);
  CHECK(testing::order(divergence_error(64), divergence_error(128)) <= 2.2);
  CHECK(testing::order(div_grad_error(32), div_grad_error(64)) == doctest::Approx(2.0).epsilon(0.1));
  CHECK(testing::order(div_grad_error(32, true), div_grad_error(64, true)) >= 0.9);
  CHECK(testing::order(neumann_lap_error(32, 1.0), neumann_lap_error(64, 1.0)) ==
        doctest::Approx(2.0).epsilon(0.1));
  CHECK(testing::order(neumann_lap_error(32, 2.0), neumann_lap_error(64, 2.0)) ==
        doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("discrete integration by parts") {
  Grid g(20, 14, 1.0, 0.7);
  SplitMix64 rng(3);
  auto f = random_smooth_field<1>(g, Bc::dirichlet_zero, rng, 1.0, 5);
  auto u = random_smooth_field<2>(g, Bc::dirichlet_zero, rng, 1.0, 5);
  const double lhs = inner_l2(gradient_scalar(f), u);
  const double rhs = -inner_l2(f, divergence(u));
  CHECK(std::abs(lhs - rhs) <= 1e-10 * std::abs(lhs));

  // the weak divergence needs no boundary condition
  auto a = random_smooth_field<1>(g, Bc::neumann_zero, rng, 1.0, 5);
  auto b = random_smooth_field<2>(g, Bc::neumann_zero, rng, 1.0, 5);
  const double l2 = inner_l2(gradient_scalar(a), b);
  CHECK(std::abs(l2 + inner_l2(a, weak_divergence(b))) <= 1e-12 * std::abs(l2));
}

TEST_CASE("matched curls are divergence free") {
  Grid g(32, 32, 1.0, 1.0);
  auto psi = sample(g, Bc::none, [](double x, double y) {
    return std::sin(2 * pi * x) * std::sin(2 * pi * y);
  });
  CHECK(norm_l2(divergence(curl(psi))) < 1e-10);
  CHECK(norm_l2(weak_divergence(weak_curl(psi))) < 1e-10);
}

TEST_CASE("Dirichlet Laplacian vanishes on the boundary") {
  Grid g(16, 16, 1.0, 1.0);
  auto f = sample(g, Bc::dirichlet_zero, [](double x, double y) {
    return std::sin(pi * x) * std::sin(pi * y);
  });
  auto l = laplacian(f);
  for (int i = 0; i <= 16; ++i) CHECK(l(g.index(i, 0)) == 0.0);
  const int mid = g.index(8, 8);
  CHECK(l(mid) == doctest::Approx(-2 * pi * pi).epsilon(0.01));
}

TEST_CASE("trapezoid norms") {
  Grid g(64, 64, 1.0, 1.0);
  auto f = sample(g, Bc::none, [](double x, double) { return std::sin(2 * pi * x); });
  CHECK(std::abs(norm_l2(f) - std::sqrt(0.5)) <= 1e-3);
  auto one = sample(g, Bc::none, [](double, double) { return 1.0; });
  CHECK(mean(one) == doctest::Approx(1.0));
  CHECK(norm_h1(one) == doctest::Approx(1.0));
  CHECK(norm_h2(f) > norm_h1(f));
  CHECK(norm_h3(f) > norm_h2(f));
}

TEST_CASE("Neumann Poisson recovers a manufactured potential") {
  Grid g(48, 48, 1.0, 1.0);
  auto p = sample(g, Bc::neumann_zero, [](double x, double) { return std::cos(pi * x); });
  auto rhs = laplacian(p);
  CgOptions opts;
  opts.tolerance = 1e-11;
  auto sol = poisson_neumann_solve(rhs, opts);
  auto diff = sol - p;
  const double m = mean(diff);
  diff.values().array() -= m;
  CHECK(norm_l2(diff) <= 10 * opts.tolerance * norm_l2(p));
  CHECK(std::abs(mean(sol)) < 1e-12);
}

TEST_CASE("Neumann Poisson matches a dense solve on 8x8") {
  Grid g(8, 8, 1.0, 1.0);
  const auto& s = stencils(g);
  SplitMix64 rng(11);
  ScalarField rhs(g, Bc::neumann_zero);
  for (int k = 0; k < g.nodes(); ++k) rhs(k) = rng.normal();
  rhs.values().array() -= mean(rhs);

  Eigen::MatrixXd a = Eigen::MatrixXd(s.lap_n);
  Eigen::VectorXd b = rhs.values().col(0);
  // pin node 0, then restore the zero-mean gauge
  a.row(0).setZero();
  a(0, 0) = 1.0;
  b(0) = 0.0;
  Eigen::VectorXd x = a.fullPivLu().solve(b);
  ScalarField dense(g, Bc::neumann_zero);
  dense.values().col(0) = x;
  dense.values().array() -= mean(dense);

  auto sol = poisson_neumann_solve(rhs, CgOptions{1e-13, 20000});
  CHECK(testing::max_abs(sol - dense) <= 1e-8 * testing::max_abs(dense));
}

TEST_CASE("Neumann Poisson rejects incompatible data") {
  Grid g(8, 8, 1.0, 1.0);
  auto rhs = sample(g, Bc::neumann_zero, [](double, double) { return 1.0; });
  CHECK_THROWS_AS(poisson_neumann_solve(rhs), Error);
}

TEST_CASE("Leray projection properties") {
  Grid g(32, 32, 1.0, 1.0);
  SplitMix64 rng(5);
  const double tol = 1e-10;
  CgOptions opts{tol, 20000};
  auto f = random_smooth_field<2>(g, Bc::none, rng, 1.0, 4);
  auto h = random_smooth_field<2>(g, Bc::none, rng, 1.0, 4);
  auto pf = leray_project(f, opts).u;
  auto ph = leray_project(h, opts).u;

  SUBCASE("idempotent") {
    auto ppf = leray_project(pf, opts).u;
    CHECK(norm_l2(ppf - pf) <= 10 * tol * norm_l2(f));
  }
  SUBCASE("symmetric") {
    const double a = inner_l2(pf, h), b = inner_l2(f, ph);
    CHECK(std::abs(a - b) <= 10 * tol * norm_l2(f) * norm_l2(h));
  }
  SUBCASE("norm does not grow") { CHECK(norm_l2(pf) <= norm_l2(f) * (1 + 10 * tol)); }
  SUBCASE("weakly divergence free") {
    CHECK(norm_l2(weak_divergence(pf)) <= 1e-6 * norm_l2(f));
  }
  SUBCASE("gradients are removed") {
    auto phi = random_smooth_field<1>(g, Bc::none, rng, 1.0, 4);
    auto grad = gradient_scalar(phi);
    auto u = leray_project(grad, opts).u;
    CHECK(norm_l2(u) <= 100 * tol * norm_l2(grad));
  }
  SUBCASE("divergence-free fields are kept") {
    auto psi = sample(g, Bc::none, [](double x, double y) {
      return std::sin(2 * pi * x) * std::sin(2 * pi * y);
    });
    auto w = weak_curl(psi);
    auto u = leray_project(w, opts).u;
    CHECK(norm_l2(u - w) <= 100 * tol * norm_l2(w));
  }
}

TEST_CASE("velocity projector is a symmetric projection onto weakly solenoidal fields") {
  Grid g(12, 10, 1.0, 0.8);
  VelocityProjector proj(g, SolverOptions{});
  SplitMix64 rng(9);
  auto a = random_smooth_field<2>(g, Bc::dirichlet_zero, rng, 1.0, 4);
  auto b = random_smooth_field<2>(g, Bc::dirichlet_zero, rng, 1.0, 4);
  auto pa = a, pb = b;
  auto run = [&](Vector2Field& u) {
    Vec ux = u.comp(0), uy = u.comp(1);
    proj.project(ux, uy);
    u.comp(0) = ux;
    u.comp(1) = uy;
  };
  run(pa);
  run(pb);
  CHECK(std::abs(a.values().cwiseProduct(pb.values()).sum() -
                 pa.values().cwiseProduct(b.values()).sum()) < 1e-12);
  auto ppa = pa;
  run(ppa);
  CHECK(testing::max_abs(ppa - pa) < 1e-12);
  CHECK(norm_l2(weak_divergence(pa)) < 1e-10);
}
