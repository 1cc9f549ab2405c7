#pragma once

#include "evi/core.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>

namespace evi {

/// Runs the configured solver and writes snapshots.csv, metrics.csv and
/// resolved_config.txt into the output directory. Returns a process exit code.
int cmd_run(const std::filesystem::path& config_path, std::ostream& out, std::ostream& err);

/// Prints MMD^2 between two particle files with 6 significant digits.
int cmd_mmd(const std::filesystem::path& particles_path,
            const std::filesystem::path& reference_path, std::ostream& out, std::ostream& err);

int cmd_sample_reference(const std::string& target, Index n, std::uint64_t seed,
                         const std::filesystem::path& out_path, int dim, std::ostream& err);

}  // namespace evi
