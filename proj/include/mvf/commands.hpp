#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "mvf/config.hpp"
#include "mvf/control.hpp"
#include "mvf/error.hpp"

namespace mvf {

struct CommandOptions {
  std::string config_path;  // empty: all defaults
  std::string output_dir;   // overrides output.directory when set
  std::optional<std::uint64_t> seed;
  bool quiet = false;
  double corrupt_adjoint = 1.0;  // test hook for gradient-check
};

/// Process exit status for an error category: 2 config, 3 convergence,
/// 4 failed check, 1 anything else.
int exit_code_for(ErrorKind kind);

/// Runs one subcommand and returns its exit status. Diagnostics go to err,
/// progress to log (unless quiet).
int run_command(const std::string& name, const CommandOptions& opts, std::ostream& log,
                std::ostream& err);

const std::vector<std::string>& command_names();

/// Pieces of a run built from a configuration.
struct Setup {
  RunConfig cfg;
  Grid grid;
  State init;
  PhysParams params;
  CostSpec cost;
  SolverOptions solver;
  FieldControl h;
};

Setup build_setup(const RunConfig& cfg);

/// Writes one 13-component snapshot per saved step (v, p, F, M, H) and
/// meta.json. Returns the written paths.
std::vector<std::filesystem::path> write_trajectory_dir(const std::filesystem::path& dir,
                                                        const Trajectory& traj,
                                                        const std::string& h_source);

/// Inverse of write_trajectory_dir. Controls are only known at saved steps.
Trajectory read_trajectory_dir(const std::filesystem::path& dir);

/// Control samples h_000000.snap ... in a directory.
FieldControl read_control_dir(const std::filesystem::path& dir, const Grid& g, int steps);
std::vector<std::filesystem::path> write_control_dir(const std::filesystem::path& dir,
                                                     const FieldControl& h, double dt);

}  // namespace mvf
