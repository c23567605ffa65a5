#pragma once

#include <cmath>
#include <numbers>

#include "mvf/grid.hpp"
#include "mvf/presets.hpp"

namespace testing {

inline constexpr double pi = std::numbers::pi;

template <class Fx, class Fy>
mvf::Vector2Field vector_field(const mvf::Grid& g, mvf::Bc bc, Fx&& fx, Fy&& fy) {
  mvf::Vector2Field u(g, bc);
  u.comp(0) = mvf::sample(g, bc, fx).values();
  u.comp(1) = mvf::sample(g, bc, fy).values();
  return u;
}

inline double max_abs(const auto& f) { return f.values().cwiseAbs().maxCoeff(); }

/// Observed order between two errors at mesh ratio 2.
inline double order(double coarse, double fine) { return std::log2(coarse / fine); }

/// Least-squares slope of log y against log x.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

/// Classical RK4 for the homogeneous magnetization ODE dm/dt = -alpha^{-2}(|m|^2-1)m + h.
inline std::array<double, 3> rk4_magnetization(std::array<double, 3> m, std::array<double, 3> h,
                                               double alpha, double T, int n) {
  auto rhs = [&](const std::array<double, 3>& x) {
    const double s = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2] - 1.0) / (alpha * alpha);
    return std::array<double, 3>{-s * x[0] + h[0], -s * x[1] + h[1], -s * x[2] + h[2]};
  };
  const double dt = T / n;
  for (int k = 0; k < n; ++k) {
    auto k1 = rhs(m);
    std::array<double, 3> y;
    for (int c = 0; c < 3; ++c) y[c] = m[c] + 0.5 * dt * k1[c];
    auto k2 = rhs(y);
    for (int c = 0; c < 3; ++c) y[c] = m[c] + 0.5 * dt * k2[c];
    auto k3 = rhs(y);
    for (int c = 0; c < 3; ++c) y[c] = m[c] + dt * k3[c];
    auto k4 = rhs(y);
    for (int c = 0; c < 3; ++c) m[c] += dt / 6.0 * (k1[c] + 2 * k2[c] + 2 * k3[c] + k4[c]);
  }
  return m;
}

}  // namespace testing
