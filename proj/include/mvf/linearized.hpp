#pragma once

#include <vector>

#include "mvf/state.hpp"

namespace mvf {

/// Increment (dv, dp, dF, dM) of the state along a control direction.
struct LinearizedState {
  explicit LinearizedState(const Grid& g)
      : dv(g, Bc::dirichlet_zero),
        dp(g, Bc::neumann_zero),
        dF(g, Bc::dirichlet_zero),
        dM(g, Bc::neumann_zero) {}

  Vector2Field dv;
  ScalarField dp;
  Tensor22Field dF;
  Vector3Field dM;
  double t = 0.0;
};

/// Source samples S1, S2, S3 at t_k, k = 0..steps. The value at step k drives
/// the update from t_k to t_{k+1}; the last sample only enters norms.
struct SourceTriple {
  std::vector<Vector2Field> s1;
  std::vector<Tensor22Field> s2;
  std::vector<Vector3Field> s3;

  static SourceTriple zeros(const Grid& g, int steps);
  std::size_t size() const { return s1.size(); }
  SourceTriple& operator*=(double a);
  SourceTriple& operator+=(const SourceTriple& o);
};

/// One step of the linearized system around base state x_k with control h_k.
/// Uses the same implicit operators and projection as the state stepper, so
/// the result is the exact derivative of StateStepper::step.
LinearizedState step_linearized(const StateStepper& stepper, const LinearizedState& ls,
                                const State& base, const Vector3Field& base_h,
                                const Vector2Field& s1, const Tensor22Field& s2,
                                const Vector3Field& s3);

struct LinearizedSolution {
  std::vector<LinearizedState> states;  // k = 0..steps, states[0] = 0
  double s_norm = 0.0;                  // root-sum-square of space-time L2 norms
  double source_norm = 0.0;             // |S1| + |S2| + |S3|, space-time L2
  double ratio = 0.0;                   // s_norm / source_norm (0 when no source)
};

LinearizedSolution solve_linearized(const StateStepper& stepper, const Trajectory& traj,
                                    const SourceTriple& sources);

/// Sources S1 = (grad dH)^T M, S2 = 0, S3 = dH for the control derivative.
SourceTriple control_sources(const Trajectory& traj, const ControlSamples& dh);

/// Derivative of the control-to-state map at the control of traj along dh.
LinearizedSolution directional_state_derivative(const StateStepper& stepper,
                                                const Trajectory& traj, const ControlSamples& dh);

/// Space-time norm of the four components (time trapezoid).
double s_norm(const std::vector<LinearizedState>& seq, double dt);

/// The same norm of the difference of two trajectories, minus eps * d when
/// d is given: |x(H+eps dH) - x(H) - eps d|.
double s_norm_difference(const Trajectory& a, const Trajectory& b,
                         const std::vector<LinearizedState>* d = nullptr, double eps = 0.0);

/// Time trapezoid weights for steps+1 samples.
std::vector<double> time_weights(int steps, double dt);

}  // namespace mvf
