#pragma once

#include <Eigen/Core>

#include <string>
#include <string_view>

#include "mvf/error.hpp"

namespace mvf {

/// Node-centred tensor-product mesh on the rectangle [0,lx] x [0,ly].
///
/// Nodes are (i, j) with 0 <= i <= nx, 0 <= j <= ny, stored row-major with
/// y outermost: index = j * (nx + 1) + i.
class Grid {
 public:
  Grid(int nx, int ny, double lx, double ly);

  int nx() const noexcept { return nx_; }
  int ny() const noexcept { return ny_; }
  double lx() const noexcept { return lx_; }
  double ly() const noexcept { return ly_; }
  double hx() const noexcept { return lx_ / nx_; }
  double hy() const noexcept { return ly_ / ny_; }
  double area() const noexcept { return lx_ * ly_; }

  int nodes() const noexcept { return (nx_ + 1) * (ny_ + 1); }
  int index(int i, int j) const noexcept { return j * (nx_ + 1) + i; }
  double x(int i) const noexcept { return i * hx(); }
  double y(int j) const noexcept { return j * hy(); }
  bool on_boundary(int i, int j) const noexcept {
    return i == 0 || j == 0 || i == nx_ || j == ny_;
  }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  int nx_;
  int ny_;
  double lx_;
  double ly_;
};

enum class Bc { dirichlet_zero, neumann_zero, none };

std::string_view to_string(Bc bc);
Bc parse_bc(std::string_view text);

/// Grid function with C components per node. Components are stored as
/// contiguous columns; tensors use row-major component order
/// (F_xx, F_xy, F_yx, F_yy).
template <int C>
class Field {
 public:
  using Values = Eigen::Matrix<double, Eigen::Dynamic, C>;
  static constexpr int components = C;

  Field(const Grid& grid, Bc bc)
      : grid_(grid), bc_(bc), values_(Values::Zero(grid.nodes(), C)) {}

  const Grid& grid() const noexcept { return grid_; }
  Bc bc() const noexcept { return bc_; }
  void set_bc(Bc bc) noexcept { bc_ = bc; }

  Values& values() noexcept { return values_; }
  const Values& values() const noexcept { return values_; }

  auto comp(int c) { return values_.col(c); }
  auto comp(int c) const { return values_.col(c); }

  double& operator()(int node, int c = 0) { return values_(node, c); }
  double operator()(int node, int c = 0) const { return values_(node, c); }

  bool all_finite() const { return values_.allFinite(); }

  Field& operator+=(const Field& o) {
    check_same(o);
    values_ += o.values_;
    return *this;
  }
  Field& operator-=(const Field& o) {
    check_same(o);
    values_ -= o.values_;
    return *this;
  }
  Field& operator*=(double s) {
    values_ *= s;
    return *this;
  }
  /// this += s * o
  Field& axpy(double s, const Field& o) {
    check_same(o);
    values_ += s * o.values_;
    return *this;
  }

  friend Field operator+(Field a, const Field& b) { return a += b; }
  friend Field operator-(Field a, const Field& b) { return a -= b; }
  friend Field operator*(double s, Field a) { return a *= s; }

  void check_same(const Field& o) const {
    if (!(grid_ == o.grid_)) {
      throw Error(ErrorKind::structural, "field grid mismatch");
    }
  }

 private:
  Grid grid_;
  Bc bc_;
  Values values_;
};

using ScalarField = Field<1>;
using Vector2Field = Field<2>;
using Vector3Field = Field<3>;
using Tensor22Field = Field<4>;

/// Tensor component index for F_ab, a, b in {0, 1}.
constexpr int tensor_index(int a, int b) { return 2 * a + b; }

/// Fills a scalar field by evaluating fn(x, y) at every node.
template <class Fn>
ScalarField sample(const Grid& g, Bc bc, Fn&& fn) {
  ScalarField f(g, bc);
  for (int j = 0; j <= g.ny(); ++j) {
    for (int i = 0; i <= g.nx(); ++i) {
      f(g.index(i, j)) = fn(g.x(i), g.y(j));
    }
  }
  return f;
}

// ---------------------------------------------------------------------------
// Difference operators
// ---------------------------------------------------------------------------

/// Central differences inside, second-order one-sided at the boundary.
Vector2Field gradient_scalar(const ScalarField& f);

/// Consistent divergence using the same stencils as gradient_scalar:
/// <grad f, u> = -<f, div u> holds exactly when f and u vanish on the
/// boundary.
ScalarField divergence(const Vector2Field& u);

/// Divergence in the weak sense, -grad^* with respect to the trapezoid inner
/// product: <grad f, u> = -<f, weak_divergence(u)> for every f and u. This is
/// the constraint enforced by the discrete Leray projection.
ScalarField weak_divergence(const Vector2Field& u);

/// Discrete curl (d_y psi, -d_x psi) with the consistent stencils; annihilated
/// exactly by divergence().
Vector2Field curl(const ScalarField& psi);

/// Curl built from the adjoint stencils; annihilated exactly by
/// weak_divergence(), hence a fixed point of leray_project.
Vector2Field weak_curl(const ScalarField& psi);

/// Five-point Laplacian. dirichlet_zero treats boundary values as zero and
/// returns zero there; neumann_zero uses reflected ghost nodes.
template <int C>
Field<C> laplacian(const Field<C>& f);

// ---------------------------------------------------------------------------
// Quadrature and norms (trapezoid weights)
// ---------------------------------------------------------------------------

template <int C>
double inner_l2(const Field<C>& a, const Field<C>& b);

template <int C>
double norm_l2(const Field<C>& f);

/// sqrt(|f|^2 + |grad f|^2)
template <int C>
double norm_h1(const Field<C>& f);

/// sqrt(|f|_{H1}^2 + |f_xx|^2 + 2|f_xy|^2 + |f_yy|^2)
template <int C>
double norm_h2(const Field<C>& f);

/// H^2 norm plus all third differences (multinomial weights 1,3,3,1).
template <int C>
double norm_h3(const Field<C>& f);

/// Weighted mean (1/|Omega|) * integral.
double mean(const ScalarField& f);

// ---------------------------------------------------------------------------
// Poisson problems and the Leray projection
// ---------------------------------------------------------------------------

struct CgOptions {
  double tolerance = 1e-10;  // relative residual in the trapezoid norm
  int max_iterations = 20000;
};

struct CgReport {
  int iterations = 0;
  double relative_residual = 0.0;
};

/// Solves Delta_N p = rhs with the five-point Neumann Laplacian, zero-mean
/// gauge. Throws compatibility error if rhs has non-zero mean.
ScalarField poisson_neumann_solve(const ScalarField& rhs, const CgOptions& opts = {},
                                  CgReport* report = nullptr);

struct LerayResult {
  Vector2Field u;
  ScalarField p;
};

/// Trapezoid-orthogonal projection onto weakly divergence-free fields:
/// u = f - grad p with (grad p, grad phi) = (f, grad phi) for all grid phi.
LerayResult leray_project(const Vector2Field& f, const CgOptions& opts = {},
                          CgReport* report = nullptr);

}  // namespace mvf
