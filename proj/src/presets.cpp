#include "mvf/presets.hpp"

#include <cmath>
#include <numbers>

#include "mvf/stencils.hpp"

namespace mvf {

std::uint64_t SplitMix64::mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double SplitMix64::normal() {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

State preset_state(const Grid& g, std::string_view name, const PresetOptions& opts) {
  State s(g);
  if (name == "zero") return s;
  if (name == "constant_m") {
    for (int c = 0; c < 3; ++c) s.M.comp(c).setConstant(opts.m[c]);
    return s;
  }
  if (name == "vortex") {
    const double pi = std::numbers::pi;
    const double kx = pi / g.lx();
    const double ky = pi / g.ly();
    const double a = opts.amplitude;
    for (int j = 0; j <= g.ny(); ++j) {
      for (int i = 0; i <= g.nx(); ++i) {
        const int n = g.index(i, j);
        const double sx = std::sin(kx * g.x(i));
        const double sy = std::sin(ky * g.y(j));
        const double cx = std::cos(kx * g.x(i));
        const double cy = std::cos(ky * g.y(j));
        // stream function a sin^2 sin^2
        s.v(n, 0) = a * sx * sx * 2.0 * ky * sy * cy;
        s.v(n, 1) = -a * 2.0 * kx * sx * cx * sy * sy;
        const double bump = 0.2 * sx * sy;
        s.F(n, tensor_index(0, 0)) = bump;
        s.F(n, tensor_index(1, 1)) = bump;
        const double mx = 0.3 * cx;
        const double my = 0.3 * cy;
        const double r = std::sqrt(mx * mx + my * my + 1.0);
        s.M(n, 0) = mx / r;
        s.M(n, 1) = my / r;
        s.M(n, 2) = 1.0 / r;
      }
    }
    const auto& st = stencils(g);
    Vec ux = s.v.comp(0).cwiseProduct(st.interior);
    Vec uy = s.v.comp(1).cwiseProduct(st.interior);
    VelocityProjector(g, {}).project(ux, uy);
    s.v.comp(0) = ux;
    s.v.comp(1) = uy;
    s.F.values() = s.F.values().array().colwise() * st.interior.array();
    return s;
  }
  throw Error(ErrorKind::config, "unknown initial preset '" + std::string(name) +
                                     "' (expected zero, constant_m or vortex)");
}

template <int C>
Field<C> random_smooth_field(const Grid& g, Bc bc, SplitMix64& rng, double amplitude, int modes) {
  Field<C> f(g, bc);
  const double pi = std::numbers::pi;
  const bool dirichlet = bc == Bc::dirichlet_zero;
  for (int c = 0; c < C; ++c) {
    for (int m = 0; m < modes; ++m) {
      for (int n = 0; n < modes; ++n) {
        const double coef = amplitude * rng.normal() / (1.0 + m + n);
        const int mm = dirichlet ? m + 1 : m;
        const int nn = dirichlet ? n + 1 : n;
        for (int j = 0; j <= g.ny(); ++j) {
          const double ay = nn * pi * g.y(j) / g.ly();
          const double fy = dirichlet ? std::sin(ay) : std::cos(ay);
          for (int i = 0; i <= g.nx(); ++i) {
            const double ax = mm * pi * g.x(i) / g.lx();
            const double fx = dirichlet ? std::sin(ax) : std::cos(ax);
            f(g.index(i, j), c) += coef * fx * fy;
          }
        }
      }
    }
  }
  if (dirichlet) {
    const auto& st = stencils(g);
    f.values() = f.values().array().colwise() * st.interior.array();
  }
  return f;
}

template Field<1> random_smooth_field<1>(const Grid&, Bc, SplitMix64&, double, int);
template Field<2> random_smooth_field<2>(const Grid&, Bc, SplitMix64&, double, int);
template Field<3> random_smooth_field<3>(const Grid&, Bc, SplitMix64&, double, int);
template Field<4> random_smooth_field<4>(const Grid&, Bc, SplitMix64&, double, int);

ControlSamples random_smooth_control(const Grid& g, int steps, double dt, SplitMix64& rng,
                                     double amplitude) {
  const auto a = random_smooth_field<3>(g, Bc::neumann_zero, rng, amplitude);
  const auto b = random_smooth_field<3>(g, Bc::neumann_zero, rng, amplitude);
  const double T = steps * dt;
  ControlSamples h;
  h.reserve(steps + 1);
  for (int k = 0; k <= steps; ++k) {
    Vector3Field hk = a;
    hk.axpy(std::sin(std::numbers::pi * k * dt / T), b);
    h.push_back(std::move(hk));
  }
  return h;
}

ControlSamples constant_control(const Grid& g, int steps, const std::array<double, 3>& h) {
  Vector3Field f(g, Bc::neumann_zero);
  for (int c = 0; c < 3; ++c) f.comp(c).setConstant(h[c]);
  return ControlSamples(steps + 1, f);
}

std::vector<Vector3Field> coil_basis_preset(const Grid& g, std::string_view kind, int n) {
  if (n < 1) throw Error(ErrorKind::config, "coil count must be at least 1");
  std::vector<Vector3Field> basis;
  const double pi = std::numbers::pi;
  for (int c = 0; c < n; ++c) {
    Vector3Field h(g, Bc::neumann_zero);
    if (kind == "bumps") {
      // centres on a circle, direction rotating in the x-z plane
      const double phi = 2.0 * pi * c / n;
      const double cx = g.lx() * (0.5 + 0.25 * std::cos(phi));
      const double cy = g.ly() * (0.5 + 0.25 * std::sin(phi));
      const double width = 0.2 * std::min(g.lx(), g.ly());
      const double dir[3] = {std::cos(phi), 0.0, std::sin(phi) + 0.5};
      for (int j = 0; j <= g.ny(); ++j) {
        for (int i = 0; i <= g.nx(); ++i) {
          const double dx = g.x(i) - cx;
          const double dy = g.y(j) - cy;
          const double b = std::exp(-(dx * dx + dy * dy) / (width * width));
          for (int d = 0; d < 3; ++d) h(g.index(i, j), d) = dir[d] * b;
        }
      }
    } else if (kind == "harmonics") {
      const int m = c / 3;
      const int comp = c % 3;
      for (int j = 0; j <= g.ny(); ++j) {
        for (int i = 0; i <= g.nx(); ++i) {
          h(g.index(i, j), comp) = std::cos((m + 1) * pi * g.x(i) / g.lx()) *
                                   std::cos(m * pi * g.y(j) / g.ly());
        }
      }
    } else {
      throw Error(ErrorKind::config,
                  "unknown coil basis '" + std::string(kind) + "' (expected bumps or harmonics)");
    }
    basis.push_back(std::move(h));
  }
  return basis;
}

}  // namespace mvf
