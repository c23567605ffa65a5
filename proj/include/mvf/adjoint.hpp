#pragma once

#include <vector>

#include "mvf/state.hpp"

namespace mvf {

/// Costate (w, q, G, N) at one instant.
struct AdjointState {
  explicit AdjointState(const Grid& g)
      : w(g, Bc::dirichlet_zero),
        q(g, Bc::neumann_zero),
        G(g, Bc::dirichlet_zero),
        N(g, Bc::neumann_zero) {}

  Vector2Field w;
  ScalarField q;
  Tensor22Field G;
  Vector3Field N;
  double t = 0.0;
};

/// Tracking weights, regularization and targets. A target sequence holds either
/// one field (constant in time) or one field per time sample; an empty
/// sequence means the zero target.
struct CostSpec {
  double a1 = 0.0;
  double a2 = 0.0;
  double a3 = 0.0;
  double lambda = 1.0;
  std::vector<Vector2Field> v_d;
  std::vector<Tensor22Field> F_d;
  std::vector<Vector3Field> M_d;

  void validate() const;
};

/// Tracking part of the cost at one sample,
/// a1/2 |v - v_d|^2 + a2/2 |F - F_d|^2 + a3/2 |M - M_d|^2.
double tracking_density(const CostSpec& cost, const State& x, int k);

/// Time-trapezoid tracking cost over a fully stored trajectory.
double tracking_cost(const CostSpec& cost, const Trajectory& traj);

/// Residuals (x_k - target_k) scaled by the weights, as trapezoid-weighted
/// node arrays (the Euclidean gradient of tracking_density).
FlowVector tracking_gradient(const CostSpec& cost, const State& x, int k);

/// Reverse-mode multiplier: mu_k is the Euclidean derivative of the tracking
/// cost with respect to (v, F, M) at step k.
struct ReverseStep {
  FlowVector ebar;   // I^T mu_{k+1}; the costate is W^{-1} ebar
  ScalarField q;     // adjoint pressure
  FlowVector mu;     // mu_k
  Vector3Field hbar; // Euclidean derivative with respect to H_k
};

/// One backward step from mu_{k+1} using base state x_k and control h_k. tau_k
/// weights the tracking gradient at step k.
ReverseStep step_adjoint_backward(const StateStepper& stepper, const FlowVector& mu_next,
                                  const State& base, const Vector3Field& base_h,
                                  const CostSpec& cost, int k, double tau_k);

struct AdjointSolution {
  std::vector<AdjointState> states;  // k = 0..steps, terminal slice zero
  std::vector<Vector3Field> hbar;    // Euclidean dJ_track/dH_k, k = 0..steps
  std::vector<double> t;
  std::vector<double> y_a;           // |grad w|^2 + |grad G|^2 + |N|^2
  double growth_rate = 0.0;          // envelope Y(t) <= Y_max exp(rate (T - t))
};

AdjointSolution solve_adjoint(const StateStepper& stepper, const Trajectory& traj,
                              const CostSpec& cost);

/// Hook for the negative-control run of gradient-check: scales hbar in every
/// reverse step so the gradient becomes inconsistent.
void set_adjoint_corruption(double factor);
double adjoint_corruption();

}  // namespace mvf
