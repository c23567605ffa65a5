#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "mvf/grid.hpp"
#include "mvf/solvers.hpp"

namespace mvf {

struct PhysParams {
  double nu = 1.0;
  double kappa = 1.0;
  double alpha = 1.0;

  void validate() const;
  friend bool operator==(const PhysParams&, const PhysParams&) = default;
};

/// (v, p, F, M) at one instant. v and F vanish on the boundary, M satisfies
/// the homogeneous Neumann condition, p has zero mean.
struct State {
  explicit State(const Grid& g)
      : v(g, Bc::dirichlet_zero),
        p(g, Bc::neumann_zero),
        F(g, Bc::dirichlet_zero),
        M(g, Bc::neumann_zero) {}

  const Grid& grid() const { return v.grid(); }

  Vector2Field v;
  ScalarField p;
  Tensor22Field F;
  Vector3Field M;
  double t = 0.0;
};

/// Control field samples H(., t_k), k = 0..steps.
using ControlSamples = std::vector<Vector3Field>;

/// Evolved unknowns (v, F, M) without the pressure; also used for explicit
/// right-hand sides, increments and their adjoints.
struct FlowVector {
  explicit FlowVector(const Grid& g)
      : v(g, Bc::dirichlet_zero), F(g, Bc::dirichlet_zero), M(g, Bc::neumann_zero) {}

  Vector2Field v;
  Tensor22Field F;
  Vector3Field M;

  FlowVector& axpy(double s, const FlowVector& o) {
    v.axpy(s, o.v);
    F.axpy(s, o.F);
    M.axpy(s, o.M);
    return *this;
  }
};

struct Trajectory {
  PhysParams params;
  double dt = 0.0;
  int steps = 0;
  int save_stride = 1;
  std::vector<State> states;       // states at k = 0, stride, 2*stride, ...
  ControlSamples h_samples;        // all k = 0..steps
  std::vector<double> residuals;   // weak-divergence residual per step

  double time(int k) const { return k * dt; }
  bool has_step(int k) const;
  /// State at step k; structural error naming the step if not stored.
  const State& at_step(int k) const;
  /// Errors unless every step is stored (adjoint and linearized sweeps).
  void require_full_checkpoints(const char* who) const;
};

/// Builds and owns the implicit solvers for a (grid, params, dt) triple and
/// advances states with one IMEX Euler step plus velocity projection.
class StateStepper {
 public:
  StateStepper(const Grid& g, const PhysParams& params, double dt,
               const SolverOptions& opts = {});

  const Grid& grid() const { return grid_; }
  const PhysParams& params() const { return params_; }
  double dt() const { return dt_; }
  const SolverOptions& options() const { return opts_; }

  /// Raises a step error if dt * max|v| / min(hx, hy) > 0.5.
  void check_cfl(const State& s, long step_index = -1) const;

  State step(const State& s, const Vector3Field& h_now, long step_index = -1) const;

  /// The linear part of a step: e -> (A_nu^{-1} e_v projected, A_kappa^{-1} e_F,
  /// A_M^{-1} e_M). Writes the pressure (projection potential / dt) to p.
  FlowVector implicit_part(FlowVector e, ScalarField* p) const;

  /// Euclidean transpose of implicit_part. Writes the adjoint pressure to q.
  FlowVector implicit_part_transpose(FlowVector mu, ScalarField* q) const;

  /// Projection used after each step (Dirichlet-zero velocities).
  const VelocityProjector& projector() const { return *projector_; }

 private:
  Grid grid_;
  PhysParams params_;
  double dt_;
  SolverOptions opts_;
  std::shared_ptr<ShiftedLaplaceSolver> vel_;
  std::shared_ptr<ShiftedLaplaceSolver> ten_;
  std::shared_ptr<ShiftedLaplaceSolver> mag_;
  std::shared_ptr<VelocityProjector> projector_;
};

/// f(M) = alpha^{-2} (|M|^2 - 1) M, nodewise.
Vector3Field penalty_force(const Vector3Field& M, double alpha);

/// (grad M)^T Delta M - div(F F^T): the magnetic and elastic stress terms of
/// the momentum equation with the gradient part of div(gradM (.) gradM)
/// absorbed into the pressure.
Vector2Field elastic_stress_div(const Vector3Field& M, const Tensor22Field& F);

/// One step; builds the solvers for this call.
State step_state(const State& s, const Vector3Field& h_now, double dt, const PhysParams& params,
                 const SolverOptions& opts = {});

/// n = T/dt steps. h must hold n+1 samples.
Trajectory solve_state(const State& init, const ControlSamples& h, double T, double dt,
                       const PhysParams& params, const SolverOptions& opts = {},
                       int save_stride = 1);

/// Same, reusing an existing stepper.
Trajectory solve_state(const StateStepper& stepper, const State& init, const ControlSamples& h,
                       int steps, int save_stride = 1);

int step_count(double T, double dt);

// ---------------------------------------------------------------------------
// Energy and norm diagnostics
// ---------------------------------------------------------------------------

struct EnergyBreakdown {
  double kinetic = 0.0;
  double exchange = 0.0;
  double penalty = 0.0;
  double zeeman = 0.0;
  double elastic = 0.0;
  double total = 0.0;

  /// Part of the total that does not depend on H.
  double internal() const { return kinetic + exchange + penalty + elastic; }
};

EnergyBreakdown total_energy(const State& s, const Vector3Field& h_now, const PhysParams& params);

struct EnergyReport {
  std::vector<double> t;
  std::vector<EnergyBreakdown> parts;
  std::vector<double> internal;      // E_k
  std::vector<double> increments;    // E_{k+1} - E_k
  std::vector<double> zeeman_work;   // cumulative integral of M . dH/dt
  double tolerance = 0.0;            // per-step slack 1e-8 (1 + E_0)
  bool dissipative = true;           // E_{k+1} <= E_k + tolerance for all k
  int worst_step = -1;
};

EnergyReport energy_report(const Trajectory& traj);

struct NormSeries {
  std::vector<double> t;
  std::vector<double> A;
  std::vector<double> B;
  double growth_rate = 0.0;  // fitted exponential envelope A_0 exp(rate t)
};

NormSeries strong_norm_monitor(const Trajectory& traj, const SolverOptions& opts = {});

}  // namespace mvf
