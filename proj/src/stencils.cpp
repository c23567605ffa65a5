#include "mvf/stencils.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <tuple>
#include <vector>

namespace mvf {
namespace {

using Triplet = Eigen::Triplet<double>;

// 1D first derivative on n+1 nodes.
std::vector<Triplet> derivative_1d(int n, double h) {
  std::vector<Triplet> t;
  const double c = 1.0 / (2.0 * h);
  t.emplace_back(0, 0, -3.0 * c);
  t.emplace_back(0, 1, 4.0 * c);
  t.emplace_back(0, 2, -1.0 * c);
  for (int i = 1; i < n; ++i) {
    t.emplace_back(i, i - 1, -c);
    t.emplace_back(i, i + 1, c);
  }
  t.emplace_back(n, n - 2, c);
  t.emplace_back(n, n - 1, -4.0 * c);
  t.emplace_back(n, n, 3.0 * c);
  return t;
}

// 1D Neumann second difference with reflected ghosts.
std::vector<Triplet> neumann_1d(int n, double h) {
  std::vector<Triplet> t;
  const double c = 1.0 / (h * h);
  t.emplace_back(0, 0, -2.0 * c);
  t.emplace_back(0, 1, 2.0 * c);
  for (int i = 1; i < n; ++i) {
    t.emplace_back(i, i - 1, c);
    t.emplace_back(i, i, -2.0 * c);
    t.emplace_back(i, i + 1, c);
  }
  t.emplace_back(n, n - 1, 2.0 * c);
  t.emplace_back(n, n, -2.0 * c);
  return t;
}

SpMat build(int size, const std::vector<Triplet>& t) {
  SpMat m(size, size);
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

// Lift a 1D operator acting along x (dir 0) or y (dir 1) to the 2D grid.
std::vector<Triplet> lift(const Grid& g, int dir, const std::vector<Triplet>& op1d) {
  std::vector<Triplet> out;
  if (dir == 0) {
    for (int j = 0; j <= g.ny(); ++j) {
      for (const auto& e : op1d) {
        out.emplace_back(g.index(e.row(), j), g.index(e.col(), j), e.value());
      }
    }
  } else {
    for (int i = 0; i <= g.nx(); ++i) {
      for (const auto& e : op1d) {
        out.emplace_back(g.index(i, e.row()), g.index(i, e.col()), e.value());
      }
    }
  }
  return out;
}

}  // namespace

Stencils::Stencils(const Grid& g) : grid(g) {
  const int n = g.nodes();
  dx = build(n, lift(g, 0, derivative_1d(g.nx(), g.hx())));
  dy = build(n, lift(g, 1, derivative_1d(g.ny(), g.hy())));
  dxt = SpMat(dx.transpose());
  dyt = SpMat(dy.transpose());

  auto ln = lift(g, 0, neumann_1d(g.nx(), g.hx()));
  auto lny = lift(g, 1, neumann_1d(g.ny(), g.hy()));
  ln.insert(ln.end(), lny.begin(), lny.end());
  lap_n = build(n, ln);
  lap_n_t = SpMat(lap_n.transpose());

  std::vector<Triplet> ld;
  const double cx = 1.0 / (g.hx() * g.hx());
  const double cy = 1.0 / (g.hy() * g.hy());
  for (int j = 1; j < g.ny(); ++j) {
    for (int i = 1; i < g.nx(); ++i) {
      const int k = g.index(i, j);
      ld.emplace_back(k, k, -2.0 * cx - 2.0 * cy);
      if (i > 1) ld.emplace_back(k, g.index(i - 1, j), cx);
      if (i < g.nx() - 1) ld.emplace_back(k, g.index(i + 1, j), cx);
      if (j > 1) ld.emplace_back(k, g.index(i, j - 1), cy);
      if (j < g.ny() - 1) ld.emplace_back(k, g.index(i, j + 1), cy);
    }
  }
  lap_d = build(n, ld);

  w.resize(n);
  interior.resize(n);
  for (int j = 0; j <= g.ny(); ++j) {
    const double wy = (j == 0 || j == g.ny()) ? 0.5 : 1.0;
    for (int i = 0; i <= g.nx(); ++i) {
      const double wx = (i == 0 || i == g.nx()) ? 0.5 : 1.0;
      w[g.index(i, j)] = wx * wy * g.hx() * g.hy();
      interior[g.index(i, j)] = g.on_boundary(i, j) ? 0.0 : 1.0;
    }
  }
  w_inv = w.cwiseInverse();
}

const Stencils& stencils(const Grid& g) {
  using Key = std::tuple<int, int, double, double>;
  static std::mutex mutex;
  static std::map<Key, std::unique_ptr<Stencils>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[Key{g.nx(), g.ny(), g.lx(), g.ly()}];
  if (!slot) slot = std::make_unique<Stencils>(g);
  return *slot;
}

}  // namespace mvf
