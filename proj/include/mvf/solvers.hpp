#pragma once

#include <Eigen/SparseCholesky>

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "mvf/grid.hpp"
#include "mvf/stencils.hpp"

namespace mvf {

/// Orthonormal-in-trapezoid-weights basis of a (small) null space.
class NullSpace {
 public:
  NullSpace() = default;
  void add(const Stencils& s, Vec v);
  /// Removes the trapezoid-orthogonal projection onto the null space.
  void remove(const Stencils& s, Vec& v) const;
  std::size_t size() const { return basis_.size(); }

 private:
  std::vector<Vec> basis_;
};

/// Constants.
NullSpace constant_nullspace(const Stencils& s);

/// Kernel of grad restricted to interior nodes: the four parity classes
/// (i mod 2, j mod 2) without corners, plus the four corner nodes.
NullSpace masked_gradient_nullspace(const Stencils& s);

/// Conjugate gradients in the trapezoid inner product for an operator that is
/// self-adjoint and non-negative in that inner product. `project` removes null
/// space components from the residual.
template <class Apply, class Project>
CgReport cg_weighted(const Stencils& s, Apply&& apply, const Vec& b, Vec& x,
                     const CgOptions& opts, Project&& project, const char* what) {
  CgReport rep;
  const double bnorm = std::sqrt(wdot(s, b, b));
  x.setZero(b.size());
  if (bnorm == 0.0) return rep;
  Vec r = b;
  project(r);
  Vec p = r;
  Vec ap(b.size());
  double rr = wdot(s, r, r);
  for (int it = 1; it <= opts.max_iterations; ++it) {
    apply(p, ap);
    const double pap = wdot(s, p, ap);
    if (!(pap > 0.0)) break;
    const double alpha = rr / pap;
    x.noalias() += alpha * p;
    r.noalias() -= alpha * ap;
    project(r);
    const double rr_new = wdot(s, r, r);
    rep.iterations = it;
    rep.relative_residual = std::sqrt(rr_new) / bnorm;
    if (rep.relative_residual <= opts.tolerance) return rep;
    p = r + (rr_new / rr) * p;
    rr = rr_new;
  }
  throw ConvergenceError(std::string(what) + ": conjugate gradients stopped at relative residual " +
                             std::to_string(rep.relative_residual) + " after " +
                             std::to_string(rep.iterations) + " iterations",
                         rep.relative_residual);
}

struct SolverOptions {
  enum class Method { direct, cg };
  Method method = Method::direct;
  CgOptions cg{};
};

/// Solves (I - c * Laplacian) x = b for one boundary rule. Dirichlet solves
/// act on interior nodes only and return zero boundary values.
class ShiftedLaplaceSolver {
 public:
  ShiftedLaplaceSolver(const Grid& g, Bc bc, double c, const SolverOptions& opts);

  void solve(Vec& x) const;
  /// Euclidean transpose of solve(): identical for Dirichlet, W A^{-1} W^{-1}
  /// for Neumann.
  void solve_transpose(Vec& x) const;
  /// Applies (I - c * Laplacian).
  Vec apply(const Vec& x) const;

 private:
  const Stencils* s_;
  Bc bc_;
  double c_;
  SolverOptions opts_;
  std::vector<int> interior_;
  std::shared_ptr<Eigen::SimplicialLLT<Eigen::SparseMatrix<double>>> llt_;
};

/// Projection of Dirichlet-zero velocities onto fields with
/// <u, grad phi> = 0 for every grid function phi. Self-adjoint on the
/// Dirichlet-zero subspace in both the trapezoid and Euclidean products.
class VelocityProjector {
 public:
  VelocityProjector(const Grid& g, const SolverOptions& opts);

  /// In place: u <- u - B_D grad(phi). Returns phi in the minimum-norm gauge
  /// (zero mean, no parity or corner modes).
  Vec project(Vec& ux, Vec& uy) const;

 private:
  Vec rhs(const Vec& ux, const Vec& uy) const;

  const Stencils* s_;
  SolverOptions opts_;
  NullSpace null_;
  SpMat k_;  // Euclidean normal operator sum_d D_d^T W B_D D_d
  std::vector<char> pinned_;
  std::shared_ptr<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>> ldlt_;
};

}  // namespace mvf
