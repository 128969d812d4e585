#include <CLI11.hpp>

#include <iostream>

#include "chemostab/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Nonlocal chemotaxis simulations and stability checks"};
  app.require_subcommand(1, 1);
  app.fallthrough();

  std::string config;
  std::string out_dir;
  int threads = 1;
  std::uint64_t seed = 0;
  app.add_option("--config", config, "JSON run configuration")->required()->check(CLI::ExistingFile);
  auto* out_opt = app.add_option("--out", out_dir, "output directory (overrides output.dir)");
  app.add_option("--threads", threads, "workers for sweeps and multi-seed runs")->check(CLI::PositiveNumber);
  auto* seed_opt = app.add_option("--seed", seed, "seed for random initial data");

  const char* help[] = {
      "one run with diagnostics",
      "hypothesis verdicts and theta",
      "multi-seed runs, decay fits, Gronwall check and entire solution",
      "stability verdicts over a parameter grid",
      "mesh and time-step refinement study",
  };
  std::size_t k = 0;
  for (const auto& name : chemostab::command_names()) app.add_subcommand(name, help[k++]);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : chemostab::exit_code::validation;
  }

  chemostab::CommandOptions options;
  if (*out_opt) options.out_dir = out_dir;
  if (*seed_opt) options.seed = seed;
  options.threads = threads;
  const std::string command = app.get_subcommands().front()->get_name();
  return chemostab::run_command(command, config, options, std::cout, std::cerr);
}
