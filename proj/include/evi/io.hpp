#pragma once

// CSV serialization. Numbers are written with std::to_chars at 17 significant
// digits, so output is locale-independent and round-trips exactly.

#include "evi/core.hpp"
#include "evi/diagnostics.hpp"
#include "evi/solvers.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace evi {

std::string format_double(double value, int significant_digits = 17);
double parse_double(std::string_view text);

/// Header `x0,...,x{d-1}`, one particle per line.
void write_particles_csv(const std::filesystem::path& path, const ParticleSet& particles);

/// Reads a particle file. Snapshot files (header starting `iter,particle_id`)
/// yield the particles of their last iteration.
ParticleSet read_particles_csv(const std::filesystem::path& path);

/// Header `iter,particle_id,x0,...,x{d-1}`.
void write_snapshots_csv(const std::filesystem::path& path, const std::vector<Snapshot>& snapshots,
                         Index dim);

/// Header `iter,energy,grad_norm,mmd2,wall_time_s`; mmd2 empty when absent.
void write_metrics_csv(const std::filesystem::path& path,
                       const std::vector<MetricsRecord>& metrics);

}  // namespace evi
