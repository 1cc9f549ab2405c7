#include "evi/commands.hpp"

#include "evi/config.hpp"
#include "evi/io.hpp"
#include "evi/solvers.hpp"

#include <fstream>
#include <ostream>

namespace evi {

int cmd_run(const std::filesystem::path& config_path, std::ostream& out, std::ostream& err) {
  try {
    const RunConfig cfg = parse_config(config_path);
    const BuiltTarget target = build_target(cfg);
    const int dim = target.model.dim();

    const Eigen::VectorXd init_mean =
        cfg.init_mean.empty()
            ? Eigen::VectorXd::Zero(dim)
            : Eigen::Map<const Eigen::VectorXd>(cfg.init_mean.data(),
                                                static_cast<Index>(cfg.init_mean.size()))
                  .eval();
    const ParticleSet init =
        sample_gaussian_init(cfg.n_particles, dim, init_mean, cfg.init_scale, cfg.seed);

    DiagnosticsSpec diag;
    diag.snapshot_every = cfg.snapshot_every;
    diag.record_wall_time = cfg.record_wall_time;
    if (cfg.mmd_reference) {
      diag.mmd_reference = read_particles_csv(*cfg.mmd_reference);
      if (diag.mmd_reference->cols() != dim)
        throw Error(ErrorCode::DimensionMismatch, "MMD reference has dimension " +
                                                      std::to_string(diag.mmd_reference->cols()) +
                                                      ", target has " + std::to_string(dim));
    }

    const RunResult result = run(target.model, init, cfg.solver, cfg.kernel(dim), diag);

    std::filesystem::create_directories(cfg.output_dir);
    write_snapshots_csv(cfg.output_dir / "snapshots.csv", result.snapshots, dim);
    write_metrics_csv(cfg.output_dir / "metrics.csv", result.metrics);
    {
      std::ofstream echo(cfg.output_dir / "resolved_config.txt", std::ios::binary);
      echo << format_config(cfg);
      if (!echo) throw Error(ErrorCode::Io, "cannot write resolved_config.txt");
    }

    const auto& last = result.metrics.back();
    out << "scheme " << to_string(cfg.solver.scheme) << ", " << cfg.solver.outer_iters
        << " iterations, final energy " << format_double(last.energy, 8);
    if (last.mmd2) out << ", mmd2 " << format_double(*last.mmd2, 6);
    out << '\n';
    if (target.test_set && target.test_set->rows() > 0) {
      const Eigen::VectorXd mean = result.final_state.particles.colwise().mean().transpose();
      out << "test accuracy (posterior mean) "
          << format_double(classification_accuracy(*target.test_set, mean), 6) << '\n';
    }
    out << "wrote " << cfg.output_dir.string() << '\n';
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

int cmd_mmd(const std::filesystem::path& particles_path,
            const std::filesystem::path& reference_path, std::ostream& out, std::ostream& err) {
  try {
    const ParticleSet xs = read_particles_csv(particles_path);
    const ParticleSet ys = read_particles_csv(reference_path);
    if (xs.cols() != ys.cols())
      throw Error(ErrorCode::DimensionMismatch,
                  "particle files differ in dimension (" + std::to_string(xs.cols()) + " vs " +
                      std::to_string(ys.cols()) + ")");
    out << format_double(mmd2(xs, ys), 6) << '\n';
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

int cmd_sample_reference(const std::string& target, Index n, std::uint64_t seed,
                         const std::filesystem::path& out_path, int dim, std::ostream& err) {
  try {
    write_particles_csv(out_path, sample_reference(target, n, seed, dim));
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace evi
