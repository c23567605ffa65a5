#include "mvf/coupling.hpp"

#include <array>

#include "mvf/stencils.hpp"

namespace mvf {
namespace {

// d[c][dir] = D_dir applied to component c.
template <int C>
std::array<std::array<Vec, 2>, C> derivs(const Stencils& s, const Field<C>& f) {
  std::array<std::array<Vec, 2>, C> d;
  for (int c = 0; c < C; ++c) {
    d[c][0] = s.dx * f.comp(c);
    d[c][1] = s.dy * f.comp(c);
  }
  return d;
}

template <int C>
std::array<Vec, C> laps(const Stencils& s, const Field<C>& f) {
  std::array<Vec, C> l;
  for (int c = 0; c < C; ++c) l[c] = s.lap_n * f.comp(c);
  return l;
}

Vec sq_norm_minus_one(const Vector3Field& M) {
  return (M.values().rowwise().squaredNorm().array() - 1.0).matrix();
}

}  // namespace

FlowVector explicit_rhs(const State& x, const Vector3Field& h, double alpha) {
  const auto& s = stencils(x.grid());
  const auto dv = derivs(s, x.v);
  const auto dF = derivs(s, x.F);
  const auto dM = derivs(s, x.M);
  const auto dH = derivs(s, h);
  const auto lM = laps(s, x.M);
  const Vec& vx = x.v.comp(0);
  const Vec& vy = x.v.comp(1);
  FlowVector r(x.grid());

  for (int i = 0; i < 2; ++i) {
    Vec out = -(vx.cwiseProduct(dv[i][0]) + vy.cwiseProduct(dv[i][1]));
    for (int j = 0; j < 3; ++j) {
      out -= dM[j][i].cwiseProduct(lM[j]);
      out += dH[j][i].cwiseProduct(x.M.comp(j));
    }
    for (int l = 0; l < 2; ++l) {
      Vec q = Vec::Zero(out.size());
      for (int m = 0; m < 2; ++m) {
        q += x.F.comp(tensor_index(i, m)).cwiseProduct(x.F.comp(tensor_index(l, m)));
      }
      out += s.d(l) * q;
    }
    r.v.comp(i) = out;
  }

  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      const int ab = tensor_index(a, b);
      Vec out = -(vx.cwiseProduct(dF[ab][0]) + vy.cwiseProduct(dF[ab][1]));
      for (int c = 0; c < 2; ++c) out += dv[a][c].cwiseProduct(x.F.comp(tensor_index(c, b)));
      r.F.comp(ab) = out;
    }
  }

  const Vec g = sq_norm_minus_one(x.M) / (alpha * alpha);
  for (int j = 0; j < 3; ++j) {
    r.M.comp(j) = -(vx.cwiseProduct(dM[j][0]) + vy.cwiseProduct(dM[j][1])) -
                  g.cwiseProduct(x.M.comp(j)) + h.comp(j);
  }
  return r;
}

FlowVector explicit_rhs_tangent(const State& x, const Vector3Field& h, double alpha,
                                const FlowVector& dx, const Vector3Field* dh) {
  const auto& s = stencils(x.grid());
  const auto dv = derivs(s, x.v);
  const auto dF = derivs(s, x.F);
  const auto dM = derivs(s, x.M);
  const auto dH = derivs(s, h);
  const auto lM = laps(s, x.M);
  const auto ddv = derivs(s, dx.v);
  const auto ddF = derivs(s, dx.F);
  const auto ddM = derivs(s, dx.M);
  const auto ldM = laps(s, dx.M);
  const Vec& vx = x.v.comp(0);
  const Vec& vy = x.v.comp(1);
  const Vec& wx = dx.v.comp(0);
  const Vec& wy = dx.v.comp(1);
  FlowVector r(x.grid());

  for (int i = 0; i < 2; ++i) {
    Vec out = -(wx.cwiseProduct(dv[i][0]) + vx.cwiseProduct(ddv[i][0]) +
                wy.cwiseProduct(dv[i][1]) + vy.cwiseProduct(ddv[i][1]));
    for (int j = 0; j < 3; ++j) {
      out -= ddM[j][i].cwiseProduct(lM[j]) + dM[j][i].cwiseProduct(ldM[j]);
      out += dH[j][i].cwiseProduct(dx.M.comp(j));
      if (dh) out += (s.d(i) * dh->comp(j)).cwiseProduct(x.M.comp(j));
    }
    for (int l = 0; l < 2; ++l) {
      Vec q = Vec::Zero(out.size());
      for (int m = 0; m < 2; ++m) {
        q += dx.F.comp(tensor_index(i, m)).cwiseProduct(x.F.comp(tensor_index(l, m))) +
             x.F.comp(tensor_index(i, m)).cwiseProduct(dx.F.comp(tensor_index(l, m)));
      }
      out += s.d(l) * q;
    }
    r.v.comp(i) = out;
  }

  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      const int ab = tensor_index(a, b);
      Vec out = -(wx.cwiseProduct(dF[ab][0]) + vx.cwiseProduct(ddF[ab][0]) +
                  wy.cwiseProduct(dF[ab][1]) + vy.cwiseProduct(ddF[ab][1]));
      for (int c = 0; c < 2; ++c) {
        const int cb = tensor_index(c, b);
        out += ddv[a][c].cwiseProduct(x.F.comp(cb)) + dv[a][c].cwiseProduct(dx.F.comp(cb));
      }
      r.F.comp(ab) = out;
    }
  }

  const double ia2 = 1.0 / (alpha * alpha);
  const Vec g = sq_norm_minus_one(x.M);
  const Vec mdot = x.M.values().cwiseProduct(dx.M.values()).rowwise().sum();
  for (int j = 0; j < 3; ++j) {
    Vec out = -(wx.cwiseProduct(dM[j][0]) + vx.cwiseProduct(ddM[j][0]) +
                wy.cwiseProduct(dM[j][1]) + vy.cwiseProduct(ddM[j][1]));
    out -= ia2 * (g.cwiseProduct(dx.M.comp(j)) + 2.0 * mdot.cwiseProduct(x.M.comp(j)));
    if (dh) out += dh->comp(j);
    r.M.comp(j) = out;
  }
  return r;
}

void explicit_rhs_adjoint(const State& x, const Vector3Field& h, double alpha,
                          const FlowVector& rho, FlowVector& xbar, Vector3Field* hbar) {
  const auto& s = stencils(x.grid());
  const auto dv = derivs(s, x.v);
  const auto dF = derivs(s, x.F);
  const auto dM = derivs(s, x.M);
  const auto dH = derivs(s, h);
  const auto lM = laps(s, x.M);
  const Vec& vx = x.v.comp(0);
  const Vec& vy = x.v.comp(1);
  auto vbx = xbar.v.comp(0);
  auto vby = xbar.v.comp(1);

  // momentum
  for (int i = 0; i < 2; ++i) {
    const Vec& rv = rho.v.comp(i);
    vbx -= rv.cwiseProduct(dv[i][0]);
    vby -= rv.cwiseProduct(dv[i][1]);
    xbar.v.comp(i) -= s.dxt * vx.cwiseProduct(rv) + s.dyt * vy.cwiseProduct(rv);
    for (int j = 0; j < 3; ++j) {
      xbar.M.comp(j) -= s.dt(i) * rv.cwiseProduct(lM[j]) + s.lap_n_t * rv.cwiseProduct(dM[j][i]);
      xbar.M.comp(j) += rv.cwiseProduct(dH[j][i]);
      if (hbar) hbar->comp(j) += s.dt(i) * rv.cwiseProduct(x.M.comp(j));
    }
    for (int l = 0; l < 2; ++l) {
      const Vec qbar = s.dt(l) * rv;
      for (int m = 0; m < 2; ++m) {
        xbar.F.comp(tensor_index(i, m)) += qbar.cwiseProduct(x.F.comp(tensor_index(l, m)));
        xbar.F.comp(tensor_index(l, m)) += qbar.cwiseProduct(x.F.comp(tensor_index(i, m)));
      }
    }
  }

  // deformation
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      const int ab = tensor_index(a, b);
      const Vec& rf = rho.F.comp(ab);
      vbx -= rf.cwiseProduct(dF[ab][0]);
      vby -= rf.cwiseProduct(dF[ab][1]);
      xbar.F.comp(ab) -= s.dxt * vx.cwiseProduct(rf) + s.dyt * vy.cwiseProduct(rf);
      for (int c = 0; c < 2; ++c) {
        const int cb = tensor_index(c, b);
        xbar.v.comp(a) += s.dt(c) * rf.cwiseProduct(x.F.comp(cb));
        xbar.F.comp(cb) += rf.cwiseProduct(dv[a][c]);
      }
    }
  }

  // magnetisation
  const double ia2 = 1.0 / (alpha * alpha);
  const Vec g = sq_norm_minus_one(x.M);
  const Vec mdot = x.M.values().cwiseProduct(rho.M.values()).rowwise().sum();
  for (int j = 0; j < 3; ++j) {
    const Vec& rm = rho.M.comp(j);
    vbx -= rm.cwiseProduct(dM[j][0]);
    vby -= rm.cwiseProduct(dM[j][1]);
    xbar.M.comp(j) -= s.dxt * vx.cwiseProduct(rm) + s.dyt * vy.cwiseProduct(rm);
    xbar.M.comp(j) -= ia2 * (g.cwiseProduct(rm) + 2.0 * mdot.cwiseProduct(x.M.comp(j)));
    if (hbar) hbar->comp(j) += rm;
  }
}

Vector2Field control_momentum_source(const Vector3Field& M, const Vector3Field& dh) {
  const auto& s = stencils(M.grid());
  Vector2Field out(M.grid(), Bc::dirichlet_zero);
  for (int i = 0; i < 2; ++i) {
    Vec acc = Vec::Zero(M.grid().nodes());
    for (int j = 0; j < 3; ++j) acc += (s.d(i) * dh.comp(j)).cwiseProduct(M.comp(j));
    out.comp(i) = acc;
  }
  return out;
}

}  // namespace mvf
