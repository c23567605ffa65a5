#pragma once

#include "mvf/state.hpp"

namespace mvf {

/// Explicit part of the state equations at (x, H):
///   R_v = -(v.grad)v - (grad M)^T Delta M + div(F F^T) + (grad H)^T M
///   R_F = -(v.grad)F + (grad v) F
///   R_M = -(v.grad)M - f(M) + H
/// The step adds dt * R before the implicit solves.
FlowVector explicit_rhs(const State& x, const Vector3Field& h, double alpha);

/// Directional derivative of explicit_rhs at (x, h) along (dx, dh).
/// dh may be null (zero direction).
FlowVector explicit_rhs_tangent(const State& x, const Vector3Field& h, double alpha,
                                const FlowVector& dx, const Vector3Field* dh);

/// Euclidean transpose of explicit_rhs_tangent: accumulates
/// (dR/dx)^T rho into xbar and (dR/dH)^T rho into hbar (if non-null).
void explicit_rhs_adjoint(const State& x, const Vector3Field& h, double alpha,
                          const FlowVector& rho, FlowVector& xbar, Vector3Field* hbar);

/// S1 source of the control derivative: (grad dH)^T M.
Vector2Field control_momentum_source(const Vector3Field& M, const Vector3Field& dh);

}  // namespace mvf
