#include "mvf/adjoint.hpp"

#include <atomic>
#include <cmath>

#include "mvf/coupling.hpp"
#include "mvf/linearized.hpp"
#include "mvf/stencils.hpp"

namespace mvf {
namespace {

std::atomic<double> g_corruption{1.0};

template <int C>
const Field<C>* target_at(const std::vector<Field<C>>& seq, int k) {
  if (seq.empty()) return nullptr;
  if (seq.size() == 1) return &seq.front();
  if (k < 0 || k >= static_cast<int>(seq.size())) {
    throw Error(ErrorKind::structural, "tracking target has " + std::to_string(seq.size()) +
                                           " samples, step " + std::to_string(k) + " requested");
  }
  return &seq[static_cast<std::size_t>(k)];
}

template <int C>
Field<C> residual(const Field<C>& x, const std::vector<Field<C>>& seq, int k) {
  Field<C> r = x;
  if (const auto* t = target_at(seq, k)) r -= *t;
  return r;
}

template <int C>
void scale_by_weights(const Stencils& s, Field<C>& f, double a) {
  f.values() = (f.values().array().colwise() * s.w.array()) * a;
}

template <int C>
void unweight(const Stencils& s, Field<C>& f) {
  f.values() = f.values().array().colwise() * s.w_inv.array();
}

double grad_sq(const Stencils& s, const Vec& f) {
  const Vec gx = s.dx * f;
  const Vec gy = s.dy * f;
  return wdot(s, gx, gx) + wdot(s, gy, gy);
}

}  // namespace

void set_adjoint_corruption(double factor) { g_corruption.store(factor); }
double adjoint_corruption() { return g_corruption.load(); }

void CostSpec::validate() const {
  if (!(a1 >= 0.0) || !(a2 >= 0.0) || !(a3 >= 0.0)) {
    throw Error(ErrorKind::config, "tracking weights a1, a2, a3 must be nonnegative");
  }
  if (!(lambda > 0.0)) throw Error(ErrorKind::config, "lambda must be positive");
}

double tracking_density(const CostSpec& cost, const State& x, int k) {
  double acc = 0.0;
  if (cost.a1 != 0.0) {
    const auto r = residual(x.v, cost.v_d, k);
    acc += 0.5 * cost.a1 * inner_l2(r, r);
  }
  if (cost.a2 != 0.0) {
    const auto r = residual(x.F, cost.F_d, k);
    acc += 0.5 * cost.a2 * inner_l2(r, r);
  }
  if (cost.a3 != 0.0) {
    const auto r = residual(x.M, cost.M_d, k);
    acc += 0.5 * cost.a3 * inner_l2(r, r);
  }
  return acc;
}

double tracking_cost(const CostSpec& cost, const Trajectory& traj) {
  traj.require_full_checkpoints("tracking_cost");
  const auto tau = time_weights(traj.steps, traj.dt);
  double acc = 0.0;
  for (int k = 0; k <= traj.steps; ++k) acc += tau[k] * tracking_density(cost, traj.states[k], k);
  return acc;
}

FlowVector tracking_gradient(const CostSpec& cost, const State& x, int k) {
  const auto& s = stencils(x.grid());
  FlowVector g(x.grid());
  if (cost.a1 != 0.0) {
    g.v = residual(x.v, cost.v_d, k);
    scale_by_weights(s, g.v, cost.a1);
  }
  if (cost.a2 != 0.0) {
    g.F = residual(x.F, cost.F_d, k);
    scale_by_weights(s, g.F, cost.a2);
  }
  if (cost.a3 != 0.0) {
    g.M = residual(x.M, cost.M_d, k);
    scale_by_weights(s, g.M, cost.a3);
  }
  return g;
}

ReverseStep step_adjoint_backward(const StateStepper& stepper, const FlowVector& mu_next,
                                  const State& base, const Vector3Field& base_h,
                                  const CostSpec& cost, int k, double tau_k) {
  const Grid& g = stepper.grid();
  ScalarField q(g, Bc::neumann_zero);
  FlowVector ebar = stepper.implicit_part_transpose(mu_next, &q);
  FlowVector rho = ebar;
  rho.v *= stepper.dt();
  rho.F *= stepper.dt();
  rho.M *= stepper.dt();
  FlowVector xbar = ebar;
  Vector3Field hbar(g, Bc::neumann_zero);
  explicit_rhs_adjoint(base, base_h, stepper.params().alpha, rho, xbar, &hbar);
  xbar.axpy(tau_k, tracking_gradient(cost, base, k));
  const double corrupt = g_corruption.load();
  if (corrupt != 1.0) hbar *= corrupt;
  return ReverseStep{std::move(ebar), std::move(q), std::move(xbar), std::move(hbar)};
}

AdjointSolution solve_adjoint(const StateStepper& stepper, const Trajectory& traj,
                              const CostSpec& cost) {
  traj.require_full_checkpoints("solve_adjoint");
  cost.validate();
  const int n = traj.steps;
  const Grid& g = stepper.grid();
  const auto& s = stencils(g);
  const auto tau = time_weights(n, traj.dt);

  AdjointSolution sol;
  sol.states.assign(n + 1, AdjointState(g));
  sol.hbar.assign(n + 1, Vector3Field(g, Bc::neumann_zero));
  for (int k = 0; k <= n; ++k) sol.states[k].t = traj.time(k);

  FlowVector mu = tracking_gradient(cost, traj.states[n], n);
  mu.v *= tau[n];
  mu.F *= tau[n];
  mu.M *= tau[n];
  for (int k = n - 1; k >= 0; --k) {
    ReverseStep r = step_adjoint_backward(stepper, mu, traj.states[k], traj.h_samples[k], cost,
                                          k, tau[k]);
    AdjointState& a = sol.states[k];
    a.w = std::move(r.ebar.v);
    a.G = std::move(r.ebar.F);
    a.N = std::move(r.ebar.M);
    unweight(s, a.w);
    unweight(s, a.G);
    unweight(s, a.N);
    a.q = std::move(r.q);
    sol.hbar[k] = std::move(r.hbar);
    mu = std::move(r.mu);
  }

  for (int k = 0; k <= n; ++k) {
    const AdjointState& a = sol.states[k];
    double y = inner_l2(a.N, a.N);
    for (int c = 0; c < 2; ++c) y += grad_sq(s, a.w.comp(c));
    for (int c = 0; c < 4; ++c) y += grad_sq(s, a.G.comp(c));
    sol.t.push_back(a.t);
    sol.y_a.push_back(y);
  }
  if (n >= 2 && sol.y_a[n - 1] > 0.0) {
    const double ref = sol.y_a[n - 1];
    for (int k = 0; k < n - 1; ++k) {
      if (sol.y_a[k] > 0.0) {
        const double span = sol.t[n - 1] - sol.t[k];
        sol.growth_rate = std::max(sol.growth_rate, std::log(sol.y_a[k] / ref) / span);
      }
    }
  }
  return sol;
}

}  // namespace mvf
