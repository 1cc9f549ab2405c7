#include "evi/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Particle-based energetic variational inference"};
  app.require_subcommand(1);

  std::string config;
  auto* run = app.add_subcommand("run", "Run a solver from a config file");
  run->add_option("--config", config, "Config file (key = value lines)")
      ->required()
      ->check(CLI::ExistingFile);

  std::string particles, reference;
  auto* mmd = app.add_subcommand("mmd", "Squared MMD between two particle CSV files");
  mmd->add_option("--particles", particles)->required()->check(CLI::ExistingFile);
  mmd->add_option("--reference", reference)->required()->check(CLI::ExistingFile);

  std::string target, out;
  long long n = 0;
  std::uint64_t seed = 0;
  int dim = 2;
  auto* sample = app.add_subcommand("sample-reference", "Draw samples directly from a target");
  sample->add_option("--target", target, "toy1, toy2, toy3 or gaussian")->required();
  sample->add_option("--n", n)->required()->check(CLI::NonNegativeNumber);
  sample->add_option("--seed", seed)->required();
  sample->add_option("--out", out)->required();
  sample->add_option("--dim", dim, "Dimension of the gaussian target")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) return evi::cmd_run(config, std::cout, std::cerr);
  if (mmd->parsed()) return evi::cmd_mmd(particles, reference, std::cout, std::cerr);
  return evi::cmd_sample_reference(target, n, seed, out, dim, std::cerr);
}
