// Command-line front end. Everything goes through the C API.
#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <string>

#include "mvf/mvf.h"

int main(int argc, char** argv) {
  CLI::App app{"Magneto-viscoelastic flow simulation and optimal control"};
  app.set_version_flag("--version", std::string(mvf_version()));
  app.require_subcommand(1);

  std::string config;
  std::string output;
  std::uint64_t seed = 0;
  bool quiet = false;
  double corrupt = 1.0;

  app.add_option("--config", config, "YAML run configuration")->check(CLI::ExistingFile);
  app.add_option("--output", output, "output directory (overrides output.directory)");
  auto* seed_opt = app.add_option("--seed", seed, "random seed (overrides the config)");
  app.add_flag("--quiet", quiet, "suppress progress output");
  // Scales the adjoint field; used by tests to provoke a failing gradient check.
  app.add_option("--corrupt-adjoint", corrupt)->group("");

  const char* commands[] = {"simulate",        "gradient-check",  "optimize-field",
                            "optimize-coils", "stability-probe", "energy-report"};
  const char* help[] = {"run the forward model",
                        "Taylor test of the reduced gradient",
                        "optimize a distributed external field",
                        "optimize box-constrained coil intensities",
                        "measure the stability estimate on perturbed controls",
                        "recompute energy and norm reports for a saved trajectory"};
  for (int i = 0; i < 6; ++i) app.add_subcommand(commands[i], help[i])->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  mvf_run_options opts;
  mvf_run_options_init(&opts);
  opts.config_path = config.c_str();
  opts.output_dir = output.c_str();
  opts.has_seed = seed_opt->count() > 0;
  opts.seed = seed;
  opts.quiet = quiet;
  opts.corrupt_adjoint = corrupt;

  const std::string name = app.get_subcommands().front()->get_name();
  int code = 1;
  const mvf_status st = mvf_run_command(name.c_str(), &opts, &code);
  if (st != MVF_OK) {
    std::cerr << "mvf-cli: " << mvf_status_name(st) << ": " << mvf_last_error() << "\n";
    return 1;
  }
  return code;
}
