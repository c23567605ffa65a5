#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "mvf/adjoint.hpp"
#include "mvf/linearized.hpp"
#include "mvf/state.hpp"

namespace mvf {

using FieldControl = ControlSamples;

/// Everything except the control: initial state, horizon, physics, solver and
/// cost. Owns one StateStepper that all solves share.
class ControlProblem {
 public:
  ControlProblem(State init, double T, double dt, PhysParams params, CostSpec cost,
                 SolverOptions solver = {});

  const Grid& grid() const { return init_.grid(); }
  const State& init() const { return init_; }
  double T() const { return steps_ * dt_; }
  double dt() const { return dt_; }
  int steps() const { return steps_; }
  const PhysParams& params() const { return params_; }
  const CostSpec& cost() const { return cost_; }
  CostSpec& cost() { return cost_; }
  const StateStepper& stepper() const { return *stepper_; }
  const std::vector<double>& tau() const { return tau_; }
  /// Factorized (I - Delta_N) for Riesz representatives.
  const ShiftedLaplaceSolver& riesz_solver() const { return *riesz_; }

  Trajectory solve(const FieldControl& h) const;
  void check_control(const FieldControl& h) const;

 private:
  State init_;
  double dt_;
  int steps_;
  PhysParams params_;
  CostSpec cost_;
  std::shared_ptr<StateStepper> stepper_;
  std::shared_ptr<ShiftedLaplaceSolver> riesz_;
  std::vector<double> tau_;
};

// ---------------------------------------------------------------------------
// Field control
// ---------------------------------------------------------------------------

/// sum_k tau_k <(I - Delta_N) a_k, b_k>: the control-space inner product.
double h_inner(const ControlProblem& pb, const FieldControl& a, const FieldControl& b);
double h_norm(const ControlProblem& pb, const FieldControl& a);
/// sum_k tau_k <a_k, b_k>: the space-time L2 pairing.
double l2_inner(const ControlProblem& pb, const FieldControl& a, const FieldControl& b);

struct CostValue {
  double J = 0.0;
  double tracking = 0.0;
  double regularization = 0.0;  // lambda/2 |H|^2
};

CostValue reduced_cost(const ControlProblem& pb, const FieldControl& h,
                       Trajectory* traj_out = nullptr);

struct GradientReport {
  CostValue cost;
  FieldControl dual;      // L2(Q_T) density of J'(H)
  FieldControl tracking;  // its tracking part, W^{-1} hbar_k / tau_k
  FieldControl riesz;     // H-Riesz representative
  double norm_dual = 0.0;
  double norm_riesz = 0.0;
  std::vector<Vector3Field> hbar;  // Euclidean dJ_track/dH_k
};

/// Forward solve (or reuse of traj when given), backward sweep, dual density and
/// Riesz representative.
GradientReport reduced_gradient(const ControlProblem& pb, const FieldControl& h,
                                const Trajectory* traj = nullptr);

/// J'(H)[dh] from a gradient report.
double directional_derivative(const ControlProblem& pb, const GradientReport& g,
                              const FieldControl& dh);

/// |(I - Delta_N) H - (1/lambda) (-tracking)|_{L2(Q_T)} = |dual| / lambda.
double kkt_residual(const ControlProblem& pb, const GradientReport& g);
/// The same quantity assembled from the Riesz representative.
double kkt_residual_from_riesz(const ControlProblem& pb, const GradientReport& g);

struct OptimizerOptions {
  int max_iter = 50;
  double grad_tol = 1e-6;
  double armijo_c = 1e-4;
  double armijo_shrink = 0.5;
  int max_halvings = 40;
  double initial_step = 0.0;  // 0: use 1/lambda
};

struct IterationRecord {
  int iter = 0;
  double J = 0.0;
  double grad_norm = 0.0;
  double step = 0.0;
  double fixedpoint_residual = 0.0;  // coils only
};

struct FieldOptResult {
  FieldControl h;
  std::vector<IterationRecord> history;
  bool converged = false;
  double kkt = 0.0;
};

/// Steepest descent in the control-space metric with Armijo backtracking and
/// Barzilai-Borwein initial steps. Stagnation error when 40 halvings fail.
FieldOptResult optimize_field(const ControlProblem& pb, FieldControl h0,
                              const OptimizerOptions& opts = {});

// ---------------------------------------------------------------------------
// Coil control
// ---------------------------------------------------------------------------

struct CoilBasis {
  std::vector<Vector3Field> h;
  int n() const { return static_cast<int>(h.size()); }
  void validate() const;
};

/// Intensities u(i, k) with bounds a <= u <= b of the same shape.
struct CoilControl {
  Eigen::MatrixXd u;
  Eigen::MatrixXd a;
  Eigen::MatrixXd b;

  bool feasible() const;
  void validate() const;
};

FieldControl coil_field(const Eigen::MatrixXd& u, const CoilBasis& basis);

/// Tracking cost of coil_field(u) plus lambda/2 sum_k tau_k |u_k|^2.
CostValue coil_cost(const ControlProblem& pb, const CoilBasis& basis, const Eigen::MatrixXd& u,
                    Trajectory* traj_out = nullptr);

struct CoilGradient {
  CostValue cost;
  Eigen::MatrixXd grad;  // lambda u_i(t_k) + D_i(u)(t_k)
  Eigen::MatrixXd d;     // D_i(u)(t_k)
  GradientReport field;  // underlying field gradient (its lambda part is unused)
};

CoilGradient coil_gradient(const ControlProblem& pb, const CoilBasis& basis,
                           const Eigen::MatrixXd& u, const Trajectory* traj = nullptr);

/// sum_k tau_k sum_i a(i,k) b(i,k)
double coil_inner(const ControlProblem& pb, const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

Eigen::MatrixXd project_box(const Eigen::MatrixXd& u, const Eigen::MatrixXd& a,
                            const Eigen::MatrixXd& b);

struct FixedPointResidual {
  double l2 = 0.0;   // time-weighted
  double max = 0.0;  // pointwise
};

/// u - P_[a,b](-D(u)/lambda).
FixedPointResidual coil_fixed_point_residual(const ControlProblem& pb, const CoilControl& c,
                                             const Eigen::MatrixXd& d);

struct CoilOptOptions {
  int max_iter = 200;
  double tol = 1e-8;
  double armijo_c = 1e-4;
  double armijo_shrink = 0.5;
  int max_halvings = 40;
  double initial_step = 0.0;  // 0: use 1/lambda
  int vi_samples = 100;
  std::uint64_t seed = 42;
};

struct CoilOptResult {
  CoilControl control;
  std::vector<IterationRecord> history;
  FixedPointResidual residual;
  double vi_residual = 0.0;  // min over sampled feasible u of <grad, u - u*>
  bool converged = false;
  Eigen::MatrixXd grad;
  Eigen::MatrixXd d;
};

CoilOptResult optimize_coils(const ControlProblem& pb, const CoilBasis& basis, CoilControl c0,
                             const CoilOptOptions& opts = {});

// ---------------------------------------------------------------------------
// Stability
// ---------------------------------------------------------------------------

struct StabilityReport {
  double weak_lhs = 0.0;
  double strong_lhs = 0.0;
  double rhs = 0.0;             // |H1 - H2| in the control space
  double weak_ratio = 0.0;      // weak_lhs / rhs
  double strong_ratio = 0.0;    // strong_lhs / rhs
  double weak_lipschitz = 0.0;  // sqrt(weak_lhs) / rhs
  double strong_lipschitz = 0.0;
};

StabilityReport stability_probe(const ControlProblem& pb, const FieldControl& h1,
                                const FieldControl& h2);

}  // namespace mvf
