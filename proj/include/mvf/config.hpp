#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace mvf {

/// Field target or initial-data source: a preset name or a snapshot path.
struct FieldSource {
  std::string preset = "zero";  // zero | constant | snapshot
  std::vector<double> value;    // for constant
  std::string path;             // for snapshot

  friend bool operator==(const FieldSource&, const FieldSource&) = default;
};

struct RunConfig {
  struct GridCfg {
    int nx = 32;
    int ny = 32;
    double lx = 1.0;
    double ly = 1.0;
    friend bool operator==(const GridCfg&, const GridCfg&) = default;
  } grid;

  struct TimeCfg {
    double T = 0.2;
    double dt = 1e-3;
    int save_stride = 1;
    friend bool operator==(const TimeCfg&, const TimeCfg&) = default;
  } time;

  struct ParamsCfg {
    double nu = 1.0;
    double kappa = 1.0;
    double alpha = 1.0;
    friend bool operator==(const ParamsCfg&, const ParamsCfg&) = default;
  } params;

  struct InitialCfg {
    std::string preset = "vortex";  // zero | constant_m | vortex | snapshot
    std::array<double, 3> m{0.0, 0.0, 1.0};
    double amplitude = 0.5;
    std::string v_path, F_path, M_path;  // snapshot preset
    friend bool operator==(const InitialCfg&, const InitialCfg&) = default;
  } initial;

  struct ControlCfg {
    std::string field = "zero";  // zero | constant | random | snapshots
    std::array<double, 3> value{0.0, 0.0, 0.0};
    double amplitude = 0.5;
    std::string samples_dir;     // one snapshot per step: h_000000.snap ...
    std::string coil_basis = "bumps";
    int coils = 2;
    std::string coil_basis_dir;  // optional snapshots coil_000.snap ...
    double lower = -1.0;
    double upper = 1.0;
    double coil_initial = 0.0;
    friend bool operator==(const ControlCfg&, const ControlCfg&) = default;
  } control;

  struct CostCfg {
    double a1 = 0.0;
    double a2 = 0.0;
    double a3 = 1.0;
    double lambda = 1e-2;
    FieldSource v_target;
    FieldSource F_target;
    FieldSource M_target{"constant", {0.6, 0.0, 0.8}, ""};
    friend bool operator==(const CostCfg&, const CostCfg&) = default;
  } cost;

  struct SolverCfg {
    double poisson_tol = 1e-10;
    int max_cg_iters = 20000;
    std::string method = "direct";  // direct | cg
    friend bool operator==(const SolverCfg&, const SolverCfg&) = default;
  } solver;

  struct OptimizerCfg {
    int max_iter = 50;
    double grad_tol = 1e-6;
    double armijo_c = 1e-4;
    double armijo_shrink = 0.5;
    friend bool operator==(const OptimizerCfg&, const OptimizerCfg&) = default;
  } optimizer;

  struct CheckCfg {
    std::vector<double> epsilons{1e-1, 1e-2, 1e-3, 1e-4};
    int directions = 3;
    double slope_min = 1.6;
    double slope_max = 2.4;
    double direction_amplitude = 0.5;
    friend bool operator==(const CheckCfg&, const CheckCfg&) = default;
  } check;

  struct StabilityCfg {
    std::vector<double> epsilons{1e-1, 1e-2, 1e-3};
    std::string h2_samples_dir;  // when set, H2 is read instead of built
    friend bool operator==(const StabilityCfg&, const StabilityCfg&) = default;
  } stability;

  struct OutputCfg {
    std::string directory = "out";
    std::string trajectory_dir;  // input for energy-report
    friend bool operator==(const OutputCfg&, const OutputCfg&) = default;
  } output;

  std::uint64_t seed = 42;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Parses YAML text. Unknown keys, wrong types and out-of-range values raise a
/// config error whose message starts with "line N:". Relative paths are
/// resolved against base_dir and referenced files must exist.
RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = ".",
                       bool apply_env = true);

RunConfig load_config(const std::filesystem::path& path, bool apply_env = true);

/// Emits every key, so parse_config(serialize_config(c)) == c.
std::string serialize_config(const RunConfig& cfg);

/// Environment overrides: MVF_<SECTION>__<KEY>=value, e.g. MVF_GRID__NX=64 or
/// MVF_SEED=7. Values are parsed as YAML scalars or flow sequences.
std::vector<std::pair<std::string, std::string>> env_overrides();

/// FNV-1a 64 of the serialized configuration, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

}  // namespace mvf
