#include "mvf/state.hpp"

#include <algorithm>
#include <cmath>

#include "mvf/coupling.hpp"
#include "mvf/stencils.hpp"

namespace mvf {

void PhysParams::validate() const {
  if (!(nu > 0.0) || !(kappa > 0.0) || !(alpha > 0.0)) {
    throw Error(ErrorKind::config, "nu, kappa and alpha must be strictly positive");
  }
}

bool Trajectory::has_step(int k) const {
  return k >= 0 && k <= steps && k % save_stride == 0 &&
         static_cast<std::size_t>(k / save_stride) < states.size();
}

const State& Trajectory::at_step(int k) const {
  if (!has_step(k)) {
    throw Error(ErrorKind::structural, "trajectory has no checkpoint for step " + std::to_string(k));
  }
  return states[k / save_stride];
}

void Trajectory::require_full_checkpoints(const char* who) const {
  int missing = -1;
  if (save_stride != 1 && steps >= 1) {
    missing = 1;
  } else if (static_cast<int>(states.size()) < steps + 1) {
    missing = static_cast<int>(states.size());
  }
  if (missing >= 0) {
    throw Error(ErrorKind::structural, std::string(who) +
                                           ": trajectory is missing the checkpoint for step " +
                                           std::to_string(missing));
  }
  if (static_cast<int>(h_samples.size()) != steps + 1) {
    throw Error(ErrorKind::structural, std::string(who) + ": control sample count mismatch");
  }
}

int step_count(double T, double dt) {
  if (!(dt > 0.0) || !(T > 0.0)) throw Error(ErrorKind::structural, "T and dt must be positive");
  const double r = T / dt;
  const double n = std::round(r);
  if (std::abs(r - n) > 1e-9 * std::max(1.0, r)) {
    throw Error(ErrorKind::structural, "T is not an integer multiple of dt");
  }
  return static_cast<int>(n);
}

// ---------------------------------------------------------------------------

StateStepper::StateStepper(const Grid& g, const PhysParams& params, double dt,
                           const SolverOptions& opts)
    : grid_(g), params_(params), dt_(dt), opts_(opts) {
  params_.validate();
  if (!(dt > 0.0)) throw Error(ErrorKind::structural, "dt must be positive");
  vel_ = std::make_shared<ShiftedLaplaceSolver>(g, Bc::dirichlet_zero, dt * params.nu, opts);
  ten_ = std::make_shared<ShiftedLaplaceSolver>(g, Bc::dirichlet_zero, dt * params.kappa, opts);
  mag_ = std::make_shared<ShiftedLaplaceSolver>(g, Bc::neumann_zero, dt, opts);
  projector_ = std::make_shared<VelocityProjector>(g, opts);
}

void StateStepper::check_cfl(const State& s, long step_index) const {
  const double vmax = s.v.values().rowwise().norm().maxCoeff();
  const double courant = dt_ * vmax / std::min(grid_.hx(), grid_.hy());
  if (courant > 0.5) {
    throw StepError(ErrorKind::step,
                    "state step " + std::to_string(step_index) + ": CFL number " +
                        std::to_string(courant) + " exceeds 0.5",
                    step_index);
  }
}

FlowVector StateStepper::implicit_part(FlowVector e, ScalarField* p) const {
  const auto& s = stencils(grid_);
  for (int c = 0; c < 2; ++c) {
    Vec x = e.v.comp(c).cwiseProduct(s.interior);
    vel_->solve(x);
    e.v.comp(c) = x;
  }
  Vec ux = e.v.comp(0);
  Vec uy = e.v.comp(1);
  Vec phi = projector_->project(ux, uy);
  e.v.comp(0) = ux;
  e.v.comp(1) = uy;
  if (p) {
    *p = ScalarField(grid_, Bc::neumann_zero);
    p->comp(0) = phi / dt_;
  }
  for (int c = 0; c < 4; ++c) {
    Vec x = e.F.comp(c).cwiseProduct(s.interior);
    ten_->solve(x);
    e.F.comp(c) = x;
  }
  for (int c = 0; c < 3; ++c) {
    Vec x = e.M.comp(c);
    mag_->solve(x);
    e.M.comp(c) = x;
  }
  return e;
}

FlowVector StateStepper::implicit_part_transpose(FlowVector mu, ScalarField* q) const {
  const auto& s = stencils(grid_);
  Vec ux = mu.v.comp(0).cwiseProduct(s.interior);
  Vec uy = mu.v.comp(1).cwiseProduct(s.interior);
  Vec phi = projector_->project(ux, uy);
  if (q) {
    *q = ScalarField(grid_, Bc::neumann_zero);
    q->comp(0) = phi / dt_;
  }
  vel_->solve(ux);
  vel_->solve(uy);
  mu.v.comp(0) = ux;
  mu.v.comp(1) = uy;
  for (int c = 0; c < 4; ++c) {
    Vec x = mu.F.comp(c).cwiseProduct(s.interior);
    ten_->solve_transpose(x);
    mu.F.comp(c) = x;
  }
  for (int c = 0; c < 3; ++c) {
    Vec x = mu.M.comp(c);
    mag_->solve_transpose(x);
    mu.M.comp(c) = x;
  }
  return mu;
}

State StateStepper::step(const State& s, const Vector3Field& h_now, long step_index) const {
  if (!(s.grid() == grid_) || !(h_now.grid() == grid_)) {
    throw Error(ErrorKind::structural, "step_state: grid mismatch");
  }
  check_cfl(s, step_index);
  FlowVector e = explicit_rhs(s, h_now, params_.alpha);
  e.v *= dt_;
  e.F *= dt_;
  e.M *= dt_;
  e.v += s.v;
  e.F += s.F;
  e.M += s.M;
  State out(grid_);
  FlowVector x = implicit_part(std::move(e), &out.p);
  out.v = std::move(x.v);
  out.F = std::move(x.F);
  out.M = std::move(x.M);
  out.t = s.t + dt_;
  if (!out.v.all_finite() || !out.F.all_finite() || !out.M.all_finite()) {
    throw StepError(ErrorKind::convergence,
                    "state step " + std::to_string(step_index) + " produced non-finite values",
                    step_index);
  }
  return out;
}

// ---------------------------------------------------------------------------

Vector3Field penalty_force(const Vector3Field& M, double alpha) {
  Vector3Field out(M.grid(), M.bc());
  const Eigen::ArrayXd g = (M.values().rowwise().squaredNorm().array() - 1.0) / (alpha * alpha);
  for (int c = 0; c < 3; ++c) out.comp(c) = (g * M.comp(c).array()).matrix();
  return out;
}

Vector2Field elastic_stress_div(const Vector3Field& M, const Tensor22Field& F) {
  // explicit_rhs with v = 0 and H = 0 leaves exactly minus this term in R_v.
  State x(M.grid());
  x.M = M;
  x.F = F;
  Vector3Field zero(M.grid(), Bc::neumann_zero);
  FlowVector r = explicit_rhs(x, zero, 1.0);
  Vector2Field out(M.grid(), Bc::none);
  out.values() = -r.v.values();
  return out;
}

State step_state(const State& s, const Vector3Field& h_now, double dt, const PhysParams& params,
                 const SolverOptions& opts) {
  StateStepper stepper(s.grid(), params, dt, opts);
  return stepper.step(s, h_now);
}

Trajectory solve_state(const StateStepper& stepper, const State& init, const ControlSamples& h,
                       int steps, int save_stride) {
  if (static_cast<int>(h.size()) != steps + 1) {
    throw Error(ErrorKind::structural, "control has " + std::to_string(h.size()) +
                                           " samples, expected " + std::to_string(steps + 1));
  }
  if (save_stride < 1) throw Error(ErrorKind::structural, "save_stride must be >= 1");
  Trajectory traj;
  traj.params = stepper.params();
  traj.dt = stepper.dt();
  traj.steps = steps;
  traj.save_stride = save_stride;
  traj.h_samples = h;
  State cur = init;
  cur.t = 0.0;
  traj.states.push_back(cur);
  traj.residuals.reserve(steps);
  for (int k = 0; k < steps; ++k) {
    State next = stepper.step(cur, h[k], k);
    next.t = (k + 1) * stepper.dt();
    traj.residuals.push_back(norm_l2(weak_divergence(next.v)));
    cur = std::move(next);
    if ((k + 1) % save_stride == 0) traj.states.push_back(cur);
  }
  return traj;
}

Trajectory solve_state(const State& init, const ControlSamples& h, double T, double dt,
                       const PhysParams& params, const SolverOptions& opts, int save_stride) {
  const int steps = step_count(T, dt);
  StateStepper stepper(init.grid(), params, dt, opts);
  return solve_state(stepper, init, h, steps, save_stride);
}

// ---------------------------------------------------------------------------

EnergyBreakdown total_energy(const State& s, const Vector3Field& h_now, const PhysParams& params) {
  const auto& st = stencils(s.grid());
  EnergyBreakdown e;
  e.kinetic = 0.5 * inner_l2(s.v, s.v);
  double ex = 0.0;
  for (int j = 0; j < 3; ++j) ex -= wdot(st, s.M.comp(j), st.lap_n * s.M.comp(j));
  e.exchange = 0.5 * ex;
  const Vec g = (s.M.values().rowwise().squaredNorm().array() - 1.0).matrix();
  e.penalty = wdot(st, g, g) / (4.0 * params.alpha * params.alpha);
  e.zeeman = -inner_l2(s.M, h_now);
  e.elastic = 0.5 * inner_l2(s.F, s.F);
  e.total = e.kinetic + e.exchange + e.penalty + e.zeeman + e.elastic;
  return e;
}

EnergyReport energy_report(const Trajectory& traj) {
  EnergyReport rep;
  const int stride = traj.save_stride;
  for (std::size_t n = 0; n < traj.states.size(); ++n) {
    const int k = static_cast<int>(n) * stride;
    const State& s = traj.states[n];
    const auto parts = total_energy(s, traj.h_samples.at(k), traj.params);
    rep.t.push_back(traj.time(k));
    rep.parts.push_back(parts);
    rep.internal.push_back(parts.internal());
    double work = n == 0 ? 0.0 : rep.zeeman_work.back();
    if (n > 0) {
      const int kp = k - stride;
      const State& prev = traj.states[n - 1];
      Vector3Field dh = traj.h_samples.at(k) - traj.h_samples.at(kp);
      work += inner_l2(prev.M, dh);
    }
    rep.zeeman_work.push_back(work);
  }
  rep.tolerance = 1e-8 * (1.0 + (rep.internal.empty() ? 0.0 : rep.internal.front()));
  double worst = -1.0;
  for (std::size_t n = 1; n < rep.internal.size(); ++n) {
    const double d = rep.internal[n] - rep.internal[n - 1];
    rep.increments.push_back(d);
    if (d > rep.tolerance) rep.dissipative = false;
    if (d > worst || rep.worst_step < 0) {
      worst = d;
      rep.worst_step = static_cast<int>(n);
    }
  }
  return rep;
}

NormSeries strong_norm_monitor(const Trajectory& traj, const SolverOptions& opts) {
  NormSeries out;
  if (traj.states.empty()) return out;
  const Grid& g = traj.states.front().grid();
  const auto& s = stencils(g);
  VelocityProjector proj(g, opts);
  auto grad_sq = [&](const Vec& f) {
    Vec gx = s.dx * f;
    Vec gy = s.dy * f;
    return wdot(s, gx, gx) + wdot(s, gy, gy);
  };
  for (std::size_t n = 0; n < traj.states.size(); ++n) {
    const State& st = traj.states[n];
    const Vector3Field fm = penalty_force(st.M, traj.params.alpha);
    double a = 0.0;
    double b = 0.0;
    for (int c = 0; c < 2; ++c) a += grad_sq(st.v.comp(c));
    for (int c = 0; c < 4; ++c) a += grad_sq(st.F.comp(c));
    for (int j = 0; j < 3; ++j) {
      Vec mu = s.lap_n * st.M.comp(j) - fm.comp(j);
      a += wdot(s, mu, mu);
      b += grad_sq(mu);
    }
    Vec lx = s.lap_d * st.v.comp(0);
    Vec ly = s.lap_d * st.v.comp(1);
    proj.project(lx, ly);
    b += wdot(s, lx, lx) + wdot(s, ly, ly);
    for (int c = 0; c < 4; ++c) {
      Vec lf = s.lap_d * st.F.comp(c);
      b += wdot(s, lf, lf);
    }
    out.t.push_back(st.t);
    out.A.push_back(a);
    out.B.push_back(b);
  }
  const double a0 = out.A.front();
  if (a0 > 0.0) {
    for (std::size_t n = 1; n < out.A.size(); ++n) {
      if (out.t[n] > 0.0 && out.A[n] > 0.0) {
        out.growth_rate = std::max(out.growth_rate, std::log(out.A[n] / a0) / out.t[n]);
      }
    }
  }
  return out;
}

}  // namespace mvf
