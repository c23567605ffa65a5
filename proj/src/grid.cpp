#include "mvf/grid.hpp"

#include <cmath>

#include "mvf/solvers.hpp"
#include "mvf/stencils.hpp"

namespace mvf {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::structural: return "structural";
    case ErrorKind::usage: return "usage";
    case ErrorKind::compatibility: return "compatibility";
    case ErrorKind::convergence: return "convergence";
    case ErrorKind::step: return "step";
    case ErrorKind::stagnation: return "stagnation";
    case ErrorKind::config: return "config";
    case ErrorKind::io: return "io";
    case ErrorKind::check: return "check";
  }
  return "unknown";
}

Grid::Grid(int nx, int ny, double lx, double ly) : nx_(nx), ny_(ny), lx_(lx), ly_(ly) {
  if (nx < 8 || ny < 8) {
    throw Error(ErrorKind::structural, "grid needs at least 8 cells per direction");
  }
  if (!(lx > 0.0) || !(ly > 0.0) || !std::isfinite(lx) || !std::isfinite(ly)) {
    throw Error(ErrorKind::structural, "grid lengths must be positive");
  }
}

std::string_view to_string(Bc bc) {
  switch (bc) {
    case Bc::dirichlet_zero: return "dirichlet_zero";
    case Bc::neumann_zero: return "neumann_zero";
    case Bc::none: return "none";
  }
  return "none";
}

Bc parse_bc(std::string_view text) {
  if (text == "dirichlet_zero") return Bc::dirichlet_zero;
  if (text == "neumann_zero") return Bc::neumann_zero;
  if (text == "none") return Bc::none;
  throw Error(ErrorKind::io, "unknown boundary tag '" + std::string(text) + "'");
}

namespace {

void same_grid(const Grid& a, const Grid& b) {
  if (!(a == b)) throw Error(ErrorKind::structural, "operands live on different grids");
}

}  // namespace

Vector2Field gradient_scalar(const ScalarField& f) {
  const auto& s = stencils(f.grid());
  Vector2Field out(f.grid(), Bc::none);
  out.comp(0) = s.dx * f.comp(0);
  out.comp(1) = s.dy * f.comp(0);
  return out;
}

ScalarField divergence(const Vector2Field& u) {
  const auto& s = stencils(u.grid());
  ScalarField out(u.grid(), Bc::none);
  out.comp(0) = s.dx * u.comp(0) + s.dy * u.comp(1);
  return out;
}

ScalarField weak_divergence(const Vector2Field& u) {
  const auto& s = stencils(u.grid());
  ScalarField out(u.grid(), Bc::none);
  Vec a = s.dxt * s.w.cwiseProduct(u.comp(0)) + s.dyt * s.w.cwiseProduct(u.comp(1));
  out.comp(0) = -a.cwiseProduct(s.w_inv);
  return out;
}

Vector2Field curl(const ScalarField& psi) {
  const auto& s = stencils(psi.grid());
  Vector2Field out(psi.grid(), Bc::none);
  out.comp(0) = s.dy * psi.comp(0);
  out.comp(1) = -(s.dx * psi.comp(0));
  return out;
}

Vector2Field weak_curl(const ScalarField& psi) {
  // (grad_y^* psi, -grad_x^* psi)
  const auto& s = stencils(psi.grid());
  Vector2Field out(psi.grid(), Bc::none);
  Vec wp = s.w.cwiseProduct(psi.comp(0));
  out.comp(0) = (s.dyt * wp).cwiseProduct(s.w_inv);
  out.comp(1) = -(s.dxt * wp).cwiseProduct(s.w_inv);
  return out;
}

template <int C>
Field<C> laplacian(const Field<C>& f) {
  const auto& s = stencils(f.grid());
  if (f.bc() == Bc::none) {
    throw Error(ErrorKind::usage, "laplacian needs a dirichlet_zero or neumann_zero field");
  }
  const SpMat& l = f.bc() == Bc::dirichlet_zero ? s.lap_d : s.lap_n;
  Field<C> out(f.grid(), f.bc());
  for (int c = 0; c < C; ++c) out.comp(c) = l * f.comp(c);
  return out;
}

template <int C>
double inner_l2(const Field<C>& a, const Field<C>& b) {
  same_grid(a.grid(), b.grid());
  const auto& s = stencils(a.grid());
  double sum = 0.0;
  for (int c = 0; c < C; ++c) sum += wdot(s, a.comp(c), b.comp(c));
  return sum;
}

template <int C>
double norm_l2(const Field<C>& f) {
  return std::sqrt(inner_l2(f, f));
}

namespace {

template <int C>
double grad_sq(const Stencils& s, const Field<C>& f) {
  double sum = 0.0;
  for (int c = 0; c < C; ++c) {
    Vec gx = s.dx * f.comp(c);
    Vec gy = s.dy * f.comp(c);
    sum += wdot(s, gx, gx) + wdot(s, gy, gy);
  }
  return sum;
}

template <int C>
double second_sq(const Stencils& s, const Field<C>& f) {
  double sum = 0.0;
  for (int c = 0; c < C; ++c) {
    Vec gx = s.dx * f.comp(c);
    Vec gy = s.dy * f.comp(c);
    Vec xx = s.dx * gx;
    Vec xy = s.dy * gx;
    Vec yy = s.dy * gy;
    sum += wdot(s, xx, xx) + 2.0 * wdot(s, xy, xy) + wdot(s, yy, yy);
  }
  return sum;
}

template <int C>
double third_sq(const Stencils& s, const Field<C>& f) {
  double sum = 0.0;
  for (int c = 0; c < C; ++c) {
    Vec gx = s.dx * f.comp(c);
    Vec gy = s.dy * f.comp(c);
    Vec xx = s.dx * gx;
    Vec yy = s.dy * gy;
    Vec xxx = s.dx * xx;
    Vec xxy = s.dy * xx;
    Vec xyy = s.dx * yy;
    Vec yyy = s.dy * yy;
    sum += wdot(s, xxx, xxx) + 3.0 * wdot(s, xxy, xxy) + 3.0 * wdot(s, xyy, xyy) +
           wdot(s, yyy, yyy);
  }
  return sum;
}

}  // namespace

template <int C>
double norm_h1(const Field<C>& f) {
  const auto& s = stencils(f.grid());
  return std::sqrt(inner_l2(f, f) + grad_sq(s, f));
}

template <int C>
double norm_h2(const Field<C>& f) {
  const auto& s = stencils(f.grid());
  return std::sqrt(inner_l2(f, f) + grad_sq(s, f) + second_sq(s, f));
}

template <int C>
double norm_h3(const Field<C>& f) {
  const auto& s = stencils(f.grid());
  return std::sqrt(inner_l2(f, f) + grad_sq(s, f) + second_sq(s, f) + third_sq(s, f));
}

double mean(const ScalarField& f) {
  const auto& s = stencils(f.grid());
  return s.w.dot(f.comp(0)) / s.w.sum();
}

#define MVF_INSTANTIATE(C)                                        \
  template Field<C> laplacian<C>(const Field<C>&);                \
  template double inner_l2<C>(const Field<C>&, const Field<C>&); \
  template double norm_l2<C>(const Field<C>&);                    \
  template double norm_h1<C>(const Field<C>&);                    \
  template double norm_h2<C>(const Field<C>&);                    \
  template double norm_h3<C>(const Field<C>&);

MVF_INSTANTIATE(1)
MVF_INSTANTIATE(2)
MVF_INSTANTIATE(3)
MVF_INSTANTIATE(4)
#undef MVF_INSTANTIATE

// ---------------------------------------------------------------------------

ScalarField poisson_neumann_solve(const ScalarField& rhs, const CgOptions& opts,
                                  CgReport* report) {
  const auto& s = stencils(rhs.grid());
  const Vec& b0 = rhs.comp(0);
  const double integral = s.w.dot(b0);
  const double scale = std::sqrt(wdot(s, b0, b0)) * std::sqrt(rhs.grid().area());
  if (std::abs(integral) > opts.tolerance * scale) {
    throw Error(ErrorKind::compatibility,
                "Neumann problem right-hand side has non-zero mean " +
                    std::to_string(integral / rhs.grid().area()));
  }
  const NullSpace ns = constant_nullspace(s);
  Vec b = -b0;
  ns.remove(s, b);
  Vec x;
  auto rep = cg_weighted(
      s, [&](const Vec& p, Vec& out) { out = -(s.lap_n * p); }, b, x, opts,
      [&](Vec& r) { ns.remove(s, r); }, "Neumann Poisson");
  ns.remove(s, x);
  if (report) *report = rep;
  ScalarField p(rhs.grid(), Bc::neumann_zero);
  p.comp(0) = x;
  return p;
}

LerayResult leray_project(const Vector2Field& f, const CgOptions& opts, CgReport* report) {
  const auto& s = stencils(f.grid());
  const NullSpace ns = constant_nullspace(s);
  // grad^* grad p = grad^* f
  auto grad_adj = [&](const Vec& ux, const Vec& uy) {
    Vec a = s.dxt * s.w.cwiseProduct(ux) + s.dyt * s.w.cwiseProduct(uy);
    return Vec(a.cwiseProduct(s.w_inv));
  };
  Vec b = grad_adj(f.comp(0), f.comp(1));
  Vec x;
  auto rep = cg_weighted(
      s,
      [&](const Vec& p, Vec& out) {
        Vec gx = s.dx * p;
        Vec gy = s.dy * p;
        out = grad_adj(gx, gy);
      },
      b, x, opts, [&](Vec& r) { ns.remove(s, r); }, "Leray projection");
  ns.remove(s, x);
  if (report) *report = rep;
  LerayResult res{Vector2Field(f.grid(), f.bc()), ScalarField(f.grid(), Bc::neumann_zero)};
  res.p.comp(0) = x;
  res.u.comp(0) = f.comp(0) - s.dx * x;
  res.u.comp(1) = f.comp(1) - s.dy * x;
  return res;
}

}  // namespace mvf
