#pragma once

// Run configuration: flat `key = value` text, `#` comments, dotted keys.
//
//   target.name = toy1
//   solver.scheme = evi_im
//   solver.tau = 0.01
//   solver.outer_iters = 200
//   particles.n = 50
//   kernel.bandwidth = 0.05      # or "median"
//
// Relative paths are resolved against the directory of the config file.

#include "evi/core.hpp"
#include "evi/kernels.hpp"
#include "evi/solvers.hpp"
#include "evi/targets.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace evi {

struct TargetSpec {
  std::string name;  // toy1 | toy2 | toy3 | mixture | logistic | gaussian

  // gaussian
  int dim = 2;
  std::vector<double> mean;  // empty: zero mean
  double scale = 1.0;

  // mixture: observations from a one-column CSV, or synthesized
  double sigma = 2.5;
  std::optional<std::filesystem::path> observations;
  Index n_obs = 1000;
  std::vector<double> omega = {1.0, -2.0};

  // logistic
  std::filesystem::path data;
  std::string label_column = "label";
  bool standardize = true;
  double split = 0.8;
  double alpha = 1.0;
  BatchSize batch_size;  // nullopt: full batch

  /// Seeds data synthesis and the train/test split; defaults to the run seed.
  std::optional<std::uint64_t> data_seed;
};

struct RunConfig {
  TargetSpec target;
  SolverConfig solver;
  Index n_particles = 0;
  std::vector<double> init_mean;  // empty: zero mean
  double init_scale = 1.0;
  std::optional<double> bandwidth;  // nullopt: median rule
  double h_min = 1e-3;
  long snapshot_every = 0;
  std::optional<std::filesystem::path> mmd_reference;
  std::filesystem::path output_dir = "out";
  bool record_wall_time = true;
  std::uint64_t seed = 0;

  KernelConfig kernel(int dim) const;
};

/// Parses and validates a config file. Errors name the offending key and line.
RunConfig parse_config(const std::filesystem::path& path);
RunConfig parse_config_text(const std::string& text,
                            const std::filesystem::path& base_dir = ".",
                            const std::string& source = "<config>");

/// Every key with its resolved value, in a form parse_config accepts.
std::string format_config(const RunConfig& config);

struct BuiltTarget {
  TargetModel model;
  std::optional<LabeledDataset> test_set;  // logistic only
};

BuiltTarget build_target(const RunConfig& config);

}  // namespace evi
