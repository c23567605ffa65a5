#include "mvf/solvers.hpp"

#include <Eigen/SparseCore>

namespace mvf {
namespace {

using ColMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

}  // namespace

void NullSpace::add(const Stencils& s, Vec v) {
  for (const auto& b : basis_) v -= wdot(s, v, b) * b;
  const double n = std::sqrt(wdot(s, v, v));
  if (n > 0.0) basis_.push_back(v / n);
}

void NullSpace::remove(const Stencils& s, Vec& v) const {
  for (const auto& b : basis_) v -= wdot(s, v, b) * b;
}

NullSpace constant_nullspace(const Stencils& s) {
  NullSpace ns;
  ns.add(s, Vec::Ones(s.grid.nodes()));
  return ns;
}

NullSpace masked_gradient_nullspace(const Stencils& s) {
  const Grid& g = s.grid;
  auto corner = [&](int i, int j) {
    return (i == 0 || i == g.nx()) && (j == 0 || j == g.ny());
  };
  NullSpace ns;
  for (int pi = 0; pi < 2; ++pi) {
    for (int pj = 0; pj < 2; ++pj) {
      Vec v = Vec::Zero(g.nodes());
      for (int j = 0; j <= g.ny(); ++j) {
        for (int i = 0; i <= g.nx(); ++i) {
          if (i % 2 == pi && j % 2 == pj && !corner(i, j)) v[g.index(i, j)] = 1.0;
        }
      }
      ns.add(s, v);
    }
  }
  for (int j : {0, g.ny()}) {
    for (int i : {0, g.nx()}) {
      Vec v = Vec::Zero(g.nodes());
      v[g.index(i, j)] = 1.0;
      ns.add(s, v);
    }
  }
  return ns;
}

// ---------------------------------------------------------------------------

ShiftedLaplaceSolver::ShiftedLaplaceSolver(const Grid& g, Bc bc, double c,
                                           const SolverOptions& opts)
    : s_(&stencils(g)), bc_(bc), c_(c), opts_(opts) {
  if (bc == Bc::none) {
    throw Error(ErrorKind::usage, "implicit diffusion requires a boundary rule");
  }
  if (bc == Bc::dirichlet_zero) {
    std::vector<int> map(g.nodes(), -1);
    for (int j = 1; j < g.ny(); ++j) {
      for (int i = 1; i < g.nx(); ++i) {
        map[g.index(i, j)] = static_cast<int>(interior_.size());
        interior_.push_back(g.index(i, j));
      }
    }
    if (opts_.method != SolverOptions::Method::direct) return;
    std::vector<Triplet> t;
    for (int r = 0; r < static_cast<int>(interior_.size()); ++r) {
      t.emplace_back(r, r, 1.0);
      for (SpMat::InnerIterator it(s_->lap_d, interior_[r]); it; ++it) {
        t.emplace_back(r, map[it.col()], -c_ * it.value());
      }
    }
    ColMat a(interior_.size(), interior_.size());
    a.setFromTriplets(t.begin(), t.end());
    llt_ = std::make_shared<Eigen::SimplicialLLT<ColMat>>(a);
  } else {
    if (opts_.method != SolverOptions::Method::direct) return;
    // W (I - c L_N) is symmetric positive definite.
    std::vector<Triplet> t;
    for (int r = 0; r < g.nodes(); ++r) {
      t.emplace_back(r, r, s_->w[r]);
      for (SpMat::InnerIterator it(s_->lap_n, r); it; ++it) {
        t.emplace_back(r, it.col(), -c_ * s_->w[r] * it.value());
      }
    }
    ColMat a(g.nodes(), g.nodes());
    a.setFromTriplets(t.begin(), t.end());
    llt_ = std::make_shared<Eigen::SimplicialLLT<ColMat>>(a);
  }
  if (llt_->info() != Eigen::Success) {
    throw Error(ErrorKind::convergence, "factorisation of implicit diffusion operator failed");
  }
}

Vec ShiftedLaplaceSolver::apply(const Vec& x) const {
  if (bc_ == Bc::dirichlet_zero) {
    Vec y = x.cwiseProduct(s_->interior) - c_ * (s_->lap_d * x);
    return y;
  }
  return x - c_ * (s_->lap_n * x);
}

void ShiftedLaplaceSolver::solve(Vec& x) const {
  if (bc_ == Bc::dirichlet_zero) {
    if (llt_) {
      Vec b(interior_.size());
      for (std::size_t r = 0; r < interior_.size(); ++r) b[r] = x[interior_[r]];
      Vec y = llt_->solve(b);
      x.setZero();
      for (std::size_t r = 0; r < interior_.size(); ++r) x[interior_[r]] = y[r];
      return;
    }
    Vec b = x.cwiseProduct(s_->interior);
    Vec y;
    cg_weighted(
        *s_, [&](const Vec& p, Vec& out) { out = apply(p); }, b, y, opts_.cg,
        [](Vec&) {}, "implicit Dirichlet diffusion");
    x = y;
    return;
  }
  if (llt_) {
    Vec b = s_->w.cwiseProduct(x);
    x = llt_->solve(b);
    return;
  }
  Vec b = x;
  Vec y;
  cg_weighted(
      *s_, [&](const Vec& p, Vec& out) { out = apply(p); }, b, y, opts_.cg, [](Vec&) {},
      "implicit Neumann diffusion");
  x = y;
}

void ShiftedLaplaceSolver::solve_transpose(Vec& x) const {
  if (bc_ == Bc::dirichlet_zero) {
    solve(x);
    return;
  }
  x = x.cwiseProduct(s_->w_inv);
  solve(x);
  x = x.cwiseProduct(s_->w);
}

// ---------------------------------------------------------------------------

VelocityProjector::VelocityProjector(const Grid& g, const SolverOptions& opts)
    : s_(&stencils(g)), opts_(opts), null_(masked_gradient_nullspace(*s_)) {
  const int n = g.nodes();
  Vec wb = s_->w.cwiseProduct(s_->interior);
  SpMat kx = s_->dxt * wb.asDiagonal() * s_->dx;
  SpMat ky = s_->dyt * wb.asDiagonal() * s_->dy;
  k_ = kx + ky;

  if (opts_.method != SolverOptions::Method::direct) return;

  pinned_.assign(n, 0);
  for (int j : {0, g.ny()}) {
    for (int i : {0, g.nx()}) pinned_[g.index(i, j)] = 1;
  }
  for (int j : {1, 2}) {
    for (int i : {1, 2}) pinned_[g.index(i, j)] = 1;
  }
  std::vector<Triplet> t;
  for (int r = 0; r < n; ++r) {
    if (pinned_[r]) {
      t.emplace_back(r, r, 1.0);
      continue;
    }
    for (SpMat::InnerIterator it(k_, r); it; ++it) {
      if (!pinned_[it.col()]) t.emplace_back(r, it.col(), it.value());
    }
  }
  ColMat a(n, n);
  a.setFromTriplets(t.begin(), t.end());
  ldlt_ = std::make_shared<Eigen::SimplicialLDLT<ColMat>>(a);
  if (ldlt_->info() != Eigen::Success) {
    throw Error(ErrorKind::convergence, "factorisation of pressure operator failed");
  }
}

Vec VelocityProjector::rhs(const Vec& ux, const Vec& uy) const {
  Vec wb = s_->w.cwiseProduct(s_->interior);
  return s_->dxt * wb.cwiseProduct(ux) + s_->dyt * wb.cwiseProduct(uy);
}

Vec VelocityProjector::project(Vec& ux, Vec& uy) const {
  Vec b = rhs(ux, uy);
  Vec phi;
  if (ldlt_) {
    for (int r = 0; r < b.size(); ++r) {
      if (pinned_[r]) b[r] = 0.0;
    }
    phi = ldlt_->solve(b);
  } else {
    Vec bw = b.cwiseProduct(s_->w_inv);
    cg_weighted(
        *s_, [&](const Vec& p, Vec& out) { out = (k_ * p).cwiseProduct(s_->w_inv); }, bw, phi,
        opts_.cg, [&](Vec& r) { null_.remove(*s_, r); }, "velocity projection");
  }
  null_.remove(*s_, phi);
  ux -= (s_->dx * phi).cwiseProduct(s_->interior);
  uy -= (s_->dy * phi).cwiseProduct(s_->interior);
  return phi;
}

}  // namespace mvf
