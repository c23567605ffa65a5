#include "mvf/linearized.hpp"

#include <cmath>

#include "mvf/coupling.hpp"

namespace mvf {

SourceTriple SourceTriple::zeros(const Grid& g, int steps) {
  SourceTriple s;
  s.s1.assign(steps + 1, Vector2Field(g, Bc::dirichlet_zero));
  s.s2.assign(steps + 1, Tensor22Field(g, Bc::dirichlet_zero));
  s.s3.assign(steps + 1, Vector3Field(g, Bc::neumann_zero));
  return s;
}

SourceTriple& SourceTriple::operator*=(double a) {
  for (auto& f : s1) f *= a;
  for (auto& f : s2) f *= a;
  for (auto& f : s3) f *= a;
  return *this;
}

SourceTriple& SourceTriple::operator+=(const SourceTriple& o) {
  if (o.s1.size() != s1.size() || o.s2.size() != s2.size() || o.s3.size() != s3.size()) {
    throw Error(ErrorKind::structural, "source sample counts differ");
  }
  for (std::size_t k = 0; k < s1.size(); ++k) {
    s1[k] += o.s1[k];
    s2[k] += o.s2[k];
    s3[k] += o.s3[k];
  }
  return *this;
}

std::vector<double> time_weights(int steps, double dt) {
  std::vector<double> tau(steps + 1, dt);
  tau.front() = 0.5 * dt;
  tau.back() = steps == 0 ? 0.0 : 0.5 * dt;
  return tau;
}

LinearizedState step_linearized(const StateStepper& stepper, const LinearizedState& ls,
                                const State& base, const Vector3Field& base_h,
                                const Vector2Field& s1, const Tensor22Field& s2,
                                const Vector3Field& s3) {
  if (std::abs(ls.t - base.t) > 1e-12 * std::max(1.0, std::abs(base.t))) {
    throw Error(ErrorKind::structural, "linearized step: base state at t=" +
                                           std::to_string(base.t) + " but increment at t=" +
                                           std::to_string(ls.t));
  }
  const double dt = stepper.dt();
  FlowVector dx(stepper.grid());
  dx.v = ls.dv;
  dx.F = ls.dF;
  dx.M = ls.dM;
  FlowVector e = explicit_rhs_tangent(base, base_h, stepper.params().alpha, dx, nullptr);
  e.v += s1;
  e.F += s2;
  e.M += s3;
  e.v *= dt;
  e.F *= dt;
  e.M *= dt;
  e.axpy(1.0, dx);
  LinearizedState out(stepper.grid());
  FlowVector x = stepper.implicit_part(std::move(e), &out.dp);
  out.dv = std::move(x.v);
  out.dF = std::move(x.F);
  out.dM = std::move(x.M);
  out.t = ls.t + dt;
  return out;
}

namespace {

template <int C>
double spacetime_norm_sq(const std::vector<Field<C>>& seq, const std::vector<double>& tau) {
  double acc = 0.0;
  for (std::size_t k = 0; k < seq.size(); ++k) acc += tau[k] * inner_l2(seq[k], seq[k]);
  return acc;
}

}  // namespace

double s_norm(const std::vector<LinearizedState>& seq, double dt) {
  if (seq.empty()) return 0.0;
  const auto tau = time_weights(static_cast<int>(seq.size()) - 1, dt);
  double acc = 0.0;
  for (std::size_t k = 0; k < seq.size(); ++k) {
    const auto& s = seq[k];
    acc += tau[k] * (inner_l2(s.dv, s.dv) + inner_l2(s.dp, s.dp) + inner_l2(s.dF, s.dF) +
                     inner_l2(s.dM, s.dM));
  }
  return std::sqrt(acc);
}

double s_norm_difference(const Trajectory& a, const Trajectory& b,
                         const std::vector<LinearizedState>* d, double eps) {
  a.require_full_checkpoints("s_norm_difference");
  b.require_full_checkpoints("s_norm_difference");
  if (a.steps != b.steps) throw Error(ErrorKind::structural, "trajectories differ in length");
  if (d && static_cast<int>(d->size()) != a.steps + 1) {
    throw Error(ErrorKind::structural, "derivative sequence length mismatch");
  }
  const auto tau = time_weights(a.steps, a.dt);
  double acc = 0.0;
  for (int k = 0; k <= a.steps; ++k) {
    const State& x = a.states[k];
    const State& y = b.states[k];
    Vector2Field v = x.v - y.v;
    ScalarField p = x.p - y.p;
    Tensor22Field F = x.F - y.F;
    Vector3Field M = x.M - y.M;
    if (d) {
      const auto& s = (*d)[k];
      v.axpy(-eps, s.dv);
      p.axpy(-eps, s.dp);
      F.axpy(-eps, s.dF);
      M.axpy(-eps, s.dM);
    }
    acc += tau[k] * (inner_l2(v, v) + inner_l2(p, p) + inner_l2(F, F) + inner_l2(M, M));
  }
  return std::sqrt(acc);
}

LinearizedSolution solve_linearized(const StateStepper& stepper, const Trajectory& traj,
                                    const SourceTriple& sources) {
  traj.require_full_checkpoints("solve_linearized");
  const int n = traj.steps;
  if (static_cast<int>(sources.s1.size()) != n + 1 ||
      static_cast<int>(sources.s2.size()) != n + 1 ||
      static_cast<int>(sources.s3.size()) != n + 1) {
    throw Error(ErrorKind::structural, "solve_linearized: source sample count must be " +
                                           std::to_string(n + 1));
  }
  if (std::abs(traj.dt - stepper.dt()) > 1e-15 * traj.dt) {
    throw Error(ErrorKind::structural, "solve_linearized: stepper dt differs from trajectory dt");
  }
  LinearizedSolution sol;
  sol.states.reserve(n + 1);
  sol.states.emplace_back(stepper.grid());
  for (int k = 0; k < n; ++k) {
    sol.states.push_back(step_linearized(stepper, sol.states.back(), traj.states[k],
                                         traj.h_samples[k], sources.s1[k], sources.s2[k],
                                         sources.s3[k]));
  }
  const auto tau = time_weights(n, traj.dt);
  sol.s_norm = s_norm(sol.states, traj.dt);
  sol.source_norm = std::sqrt(spacetime_norm_sq(sources.s1, tau)) +
                    std::sqrt(spacetime_norm_sq(sources.s2, tau)) +
                    std::sqrt(spacetime_norm_sq(sources.s3, tau));
  sol.ratio = sol.source_norm > 0.0 ? sol.s_norm / sol.source_norm : 0.0;
  return sol;
}

SourceTriple control_sources(const Trajectory& traj, const ControlSamples& dh) {
  traj.require_full_checkpoints("control_sources");
  if (static_cast<int>(dh.size()) != traj.steps + 1) {
    throw Error(ErrorKind::structural, "control direction sample count mismatch");
  }
  const Grid& g = traj.states.front().grid();
  SourceTriple s = SourceTriple::zeros(g, traj.steps);
  for (int k = 0; k <= traj.steps; ++k) {
    s.s1[k] = control_momentum_source(traj.states[k].M, dh[k]);
    s.s3[k] = dh[k];
  }
  return s;
}

LinearizedSolution directional_state_derivative(const StateStepper& stepper,
                                                const Trajectory& traj, const ControlSamples& dh) {
  return solve_linearized(stepper, traj, control_sources(traj, dh));
}

}  // namespace mvf
