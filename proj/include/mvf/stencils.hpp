#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "mvf/grid.hpp"

namespace mvf {

using SpMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Vec = Eigen::VectorXd;

/// Assembled sparse stencils for one grid. Transposes are stored explicitly
/// since the reverse sweep applies them as often as the forward operators.
struct Stencils {
  explicit Stencils(const Grid& g);

  Grid grid;
  SpMat dx, dy;    // first derivatives, second order everywhere
  SpMat dxt, dyt;  // Euclidean transposes
  SpMat lap_n;     // five-point Neumann Laplacian (reflection ghosts)
  SpMat lap_n_t;
  SpMat lap_d;     // five-point Dirichlet-zero Laplacian on interior nodes
  Vec w;           // trapezoid quadrature weights
  Vec w_inv;
  Vec interior;    // 1 on interior nodes, 0 on boundary nodes

  const SpMat& d(int dir) const { return dir == 0 ? dx : dy; }
  const SpMat& dt(int dir) const { return dir == 0 ? dxt : dyt; }
};

/// Shared, cached stencils for a grid. Thread safe.
const Stencils& stencils(const Grid& g);

/// Trapezoid-weighted dot product of two node arrays.
inline double wdot(const Stencils& s, const Vec& a, const Vec& b) {
  return (s.w.array() * a.array() * b.array()).sum();
}

}  // namespace mvf
