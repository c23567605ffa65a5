#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "mvf/state.hpp"

namespace mvf {

/// Counter-based generator: the k-th draw is splitmix64(seed + (k+1) * 0x9E3779B97F4A7C15).
/// Any implementation of the SplitMix64 finalizer reproduces the sequence.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed = 42) : seed_(seed) {}

  static std::uint64_t mix(std::uint64_t z);

  std::uint64_t next_u64() { return mix(seed_ + (++counter_) * 0x9E3779B97F4A7C15ULL); }
  /// Uniform in [0, 1) from the top 53 bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal via Box-Muller (two draws per value).
  double normal();

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

struct PresetOptions {
  std::array<double, 3> m{0.0, 0.0, 1.0};  // constant_m value
  double amplitude = 0.5;                  // vortex strength
};

/// Named initial states: "zero", "constant_m", "vortex".
State preset_state(const Grid& g, std::string_view name, const PresetOptions& opts = {});

/// Smooth random field with a few low modes: cosines for neumann_zero,
/// sines for dirichlet_zero. Coefficients ~ amplitude * N(0,1) / (1+m+n).
template <int C>
Field<C> random_smooth_field(const Grid& g, Bc bc, SplitMix64& rng, double amplitude,
                             int modes = 3);

/// H_k = A + sin(pi t_k / T) B with random smooth Neumann fields A, B.
ControlSamples random_smooth_control(const Grid& g, int steps, double dt, SplitMix64& rng,
                                     double amplitude);

ControlSamples constant_control(const Grid& g, int steps, const std::array<double, 3>& h);

/// Coil shapes: "bumps" (Gaussian bumps with fixed directions) or
/// "harmonics" (cosine modes). Returns n fields.
std::vector<Vector3Field> coil_basis_preset(const Grid& g, std::string_view kind, int n);

}  // namespace mvf
