#include "evi/commands.hpp"
#include "evi/config.hpp"
#include "evi/io.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace evi {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void spit(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream(path, std::ios::binary) << text;
}

std::string config_error(const std::string& text) {
  try {
    parse_config_text(text, ".", "test.cfg");
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Config);
    return e.what();
  }
  ADD_FAILURE() << "config accepted";
  return {};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::path(EVI_TEST_TMPDIR) / info->name();
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  fs::path dir_;
};

constexpr const char* kMinimal = R"(# toy run
target.name = toy1
solver.scheme = evi_im
solver.tau = 0.01
solver.outer_iters = 5
particles.n = 10
kernel.bandwidth = 0.3
seed = 7
)";

TEST(ParseConfig, Minimal) {
  const RunConfig c = parse_config_text(kMinimal);
  EXPECT_EQ(c.target.name, "toy1");
  EXPECT_EQ(c.solver.scheme, Scheme::EviIm);
  EXPECT_EQ(c.solver.tau, 0.01);
  EXPECT_EQ(c.solver.outer_iters, 5);
  EXPECT_EQ(c.n_particles, 10);
  EXPECT_EQ(c.bandwidth, 0.3);
  EXPECT_EQ(c.seed, 7u);
  EXPECT_FALSE(c.kernel(2).is_median());
}

TEST(ParseConfig, MedianBandwidthAndSvgd) {
  const RunConfig c = parse_config_text(
      "target.name = toy2\nsolver.scheme = \"svgd\"\nsolver.lr = 0.05\n"
      "solver.outer_iters = 3\nparticles.n = 4\nkernel.bandwidth = median\n");
  EXPECT_EQ(c.solver.scheme, Scheme::Svgd);
  EXPECT_EQ(c.solver.lr, 0.05);
  EXPECT_FALSE(c.bandwidth.has_value());
  EXPECT_TRUE(c.kernel(2).is_median());
}

TEST(ParseConfig, NonPositiveTauNamesTheKey) {
  std::string text = kMinimal;
  text.replace(text.find("0.01"), 4, "0");
  const std::string msg = config_error(text);
  EXPECT_NE(msg.find("tau"), std::string::npos) << msg;
  EXPECT_NE(msg.find("test.cfg:4"), std::string::npos) << msg;
}

TEST(ParseConfig, UnknownKeyReportsLine) {
  const std::string msg = config_error(std::string(kMinimal) + "solver.momentum = 0.9\n");
  EXPECT_NE(msg.find("solver.momentum"), std::string::npos) << msg;
  EXPECT_NE(msg.find(":9"), std::string::npos) << msg;
}

TEST(ParseConfig, DuplicateAndMissingKeys) {
  EXPECT_NE(config_error(std::string(kMinimal) + "seed = 8\n").find("seed"), std::string::npos);
  const std::string msg = config_error("target.name = toy1\nsolver.scheme = blob\n");
  EXPECT_NE(msg.find("missing required key"), std::string::npos) << msg;
}

TEST(ParseConfig, MalformedValues) {
  std::string text = kMinimal;
  text.replace(text.find("= 10"), 4, "= ten");
  EXPECT_NE(config_error(text).find("particles.n"), std::string::npos);
  EXPECT_NE(config_error("just words\n").find("test.cfg:1"), std::string::npos);
}

TEST(ParseConfig, FormatRoundTrip) {
  const RunConfig a = parse_config_text(std::string(kMinimal) +
                                        "init.mean = 0.5,-0.25\nsolver.adagrad = false\n");
  const RunConfig b = parse_config_text(format_config(a));
  EXPECT_EQ(format_config(a), format_config(b));
  EXPECT_EQ(b.init_mean, (std::vector<double>{0.5, -0.25}));
  EXPECT_FALSE(b.solver.adagrad);
}

TEST_F(CliTest, ParticleCsvRoundTripIsExact) {
  Rng rng(1);
  const ParticleSet x = testing::random_particles(rng, 25, 3, 1e3);
  write_particles_csv(dir_ / "x.csv", x);
  EXPECT_EQ(read_particles_csv(dir_ / "x.csv"), x);
  EXPECT_EQ(slurp(dir_ / "x.csv").substr(0, 9), "x0,x1,x2\n");
}

TEST_F(CliTest, ReadRejectsMalformedFiles) {
  spit(dir_ / "bad.csv", "x0,x1\n1,2\n3\n");
  EXPECT_THROW(read_particles_csv(dir_ / "bad.csv"), Error);
  EXPECT_THROW(read_particles_csv(dir_ / "missing.csv"), Error);
}

TEST_F(CliTest, RunWritesOutputsAndIsReproducible) {
  spit(dir_ / "run.cfg", std::string(kMinimal) + "output.dir = out\noutput.wall_time = false\n");
  std::ostringstream out, err;
  ASSERT_EQ(cmd_run(dir_ / "run.cfg", out, err), 0) << err.str();
  const std::string metrics = slurp(dir_ / "out" / "metrics.csv");
  const std::string snapshots = slurp(dir_ / "out" / "snapshots.csv");

  std::istringstream lines(metrics);
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "iter,energy,grad_norm,mmd2,wall_time_s");
  std::vector<double> energies;
  while (std::getline(lines, line)) {
    const auto first = line.find(',');
    energies.push_back(parse_double(line.substr(first + 1, line.find(',', first + 1) - first - 1)));
  }
  ASSERT_EQ(energies.size(), 6u);
  for (std::size_t i = 1; i < energies.size(); ++i) EXPECT_LE(energies[i], energies[i - 1]);
  EXPECT_EQ(snapshots.substr(0, snapshots.find('\n')), "iter,particle_id,x0,x1");
  EXPECT_TRUE(fs::exists(dir_ / "out" / "resolved_config.txt"));

  ASSERT_EQ(cmd_run(dir_ / "run.cfg", out, err), 0) << err.str();
  EXPECT_EQ(slurp(dir_ / "out" / "metrics.csv"), metrics);
  EXPECT_EQ(slurp(dir_ / "out" / "snapshots.csv"), snapshots);
}

TEST_F(CliTest, RunReportsConfigErrors) {
  spit(dir_ / "bad.cfg", "target.name = toy9\n");
  std::ostringstream out, err;
  EXPECT_EQ(cmd_run(dir_ / "bad.cfg", out, err), 1);
  EXPECT_NE(err.str().find("error:"), std::string::npos);
}

TEST_F(CliTest, MmdCommand) {
  spit(dir_ / "a.csv", "x0\n0\n");
  spit(dir_ / "b.csv", "x0\n1\n");
  spit(dir_ / "c.csv", "x0,x1\n1,2\n");
  std::ostringstream out, err;
  ASSERT_EQ(cmd_mmd(dir_ / "a.csv", dir_ / "a.csv", out, err), 0);
  ASSERT_EQ(cmd_mmd(dir_ / "a.csv", dir_ / "b.csv", out, err), 0);
  EXPECT_EQ(out.str(), "0\n1.37037\n");
  EXPECT_EQ(cmd_mmd(dir_ / "a.csv", dir_ / "c.csv", out, err), 1);
  EXPECT_NE(err.str().find("dimension"), std::string::npos);
}

TEST_F(CliTest, SampleReference) {
  std::ostringstream err;
  ASSERT_EQ(cmd_sample_reference("toy1", 0, 1, dir_ / "empty.csv", 2, err), 0) << err.str();
  EXPECT_EQ(slurp(dir_ / "empty.csv"), "x0,x1\n");

  ASSERT_EQ(cmd_sample_reference("gaussian", 4000, 3, dir_ / "g.csv", 2, err), 0) << err.str();
  const auto m = particle_moments(read_particles_csv(dir_ / "g.csv"));
  EXPECT_LE(m.mean.cwiseAbs().maxCoeff(), 0.1);
  EXPECT_LE((m.cov - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff(), 0.1);

  ASSERT_EQ(cmd_sample_reference("toy2", 50, 9, dir_ / "r1.csv", 2, err), 0);
  ASSERT_EQ(cmd_sample_reference("toy2", 50, 9, dir_ / "r2.csv", 2, err), 0);
  EXPECT_EQ(slurp(dir_ / "r1.csv"), slurp(dir_ / "r2.csv"));
  EXPECT_EQ(cmd_sample_reference("banana", 5, 1, dir_ / "x.csv", 2, err), 1);
}

}  // namespace
}  // namespace evi
