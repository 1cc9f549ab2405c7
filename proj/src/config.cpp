#include "evi/config.hpp"

#include "evi/io.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace evi {

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "target.name",          "target.dim",          "target.mean",
      "target.scale",         "target.sigma",        "target.observations",
      "target.n_obs",         "target.omega",        "target.data",
      "target.label_column",  "target.standardize",  "target.split",
      "target.alpha",         "target.batch_size",   "target.data_seed",
      "solver.scheme",        "solver.tau",          "solver.lr",
      "solver.inner_max_iter", "solver.inner_tol",   "solver.outer_iters",
      "solver.lmc_a",         "solver.lmc_b",        "solver.lmc_c",
      "solver.lmc_printed_sign", "solver.gfsf_ridge", "solver.adagrad",
      "particles.n",          "init.mean",           "init.scale",
      "kernel.bandwidth",     "kernel.h_min",        "output.dir",
      "output.snapshot_every", "output.wall_time",   "mmd.reference",
      "seed",
  };
  return keys;
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

class Entries {
 public:
  Entries(std::string source, std::filesystem::path base_dir)
      : source_(std::move(source)), base_dir_(std::move(base_dir)) {}

  void add(const std::string& key, std::string value, int line) {
    if (!known_keys().contains(key)) fail_at(line, "unknown key '" + key + "'");
    if (entries_.contains(key))
      fail_at(line, "duplicate key '" + key + "' (first set on line " +
                        std::to_string(entries_.at(key).line) + ")");
    entries_[key] = {std::move(value), line};
  }

  bool has(const std::string& key) const { return entries_.contains(key); }

  void require(const std::string& key, const std::string& why = {}) const {
    if (!has(key))
      throw Error(ErrorCode::Config, source_ + ": missing required key '" + key + "'" +
                                         (why.empty() ? "" : " (" + why + ")"));
  }

  std::optional<std::string> text(const std::string& key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second.value;
  }

  std::optional<double> number(const std::string& key) const {
    const auto raw = text(key);
    if (!raw) return std::nullopt;
    try {
      return parse_double(*raw);
    } catch (const Error&) {
      fail(key, "expected a number, got '" + *raw + "'");
    }
  }

  template <typename Int>
  std::optional<Int> integer(const std::string& key) const {
    const auto raw = text(key);
    if (!raw) return std::nullopt;
    Int v{};
    const auto [ptr, ec] = std::from_chars(raw->data(), raw->data() + raw->size(), v);
    if (raw->empty() || ec != std::errc() || ptr != raw->data() + raw->size())
      fail(key, "expected an integer, got '" + *raw + "'");
    return v;
  }

  std::optional<bool> boolean(const std::string& key) const {
    const auto raw = text(key);
    if (!raw) return std::nullopt;
    if (*raw == "true") return true;
    if (*raw == "false") return false;
    fail(key, "expected true or false, got '" + *raw + "'");
  }

  std::optional<std::vector<double>> list(const std::string& key) const {
    const auto raw = text(key);
    if (!raw) return std::nullopt;
    std::vector<double> out;
    std::stringstream in(*raw);
    std::string item;
    while (std::getline(in, item, ',')) {
      try {
        out.push_back(parse_double(trim(item)));
      } catch (const Error&) {
        fail(key, "expected a comma-separated list of numbers, got '" + *raw + "'");
      }
    }
    return out;
  }

  std::optional<std::filesystem::path> path(const std::string& key) const {
    const auto raw = text(key);
    if (!raw) return std::nullopt;
    std::filesystem::path p(*raw);
    if (p.is_relative()) p = base_dir_ / p;
    return p.lexically_normal();
  }

  std::optional<std::filesystem::path> existing_path(const std::string& key) const {
    auto p = path(key);
    if (p && !std::filesystem::exists(*p)) fail(key, "path does not exist: " + p->string());
    return p;
  }

  [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) throw Error(ErrorCode::Config, source_ + ": key '" + key + "': " + msg);
    fail_at(it->second.line, "key '" + key + "': " + msg);
  }

  [[noreturn]] void fail_at(int line, const std::string& msg) const {
    throw Error(ErrorCode::Config, source_ + ":" + std::to_string(line) + ": " + msg);
  }

 private:
  struct Entry {
    std::string value;
    int line = 0;
  };
  std::string source_;
  std::filesystem::path base_dir_;
  std::map<std::string, Entry> entries_;
};

std::string join(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i)
    out += (i ? "," : "") + format_double(values[i]);
  return out;
}

}  // namespace

KernelConfig RunConfig::kernel(int dim) const {
  if (bandwidth) return KernelConfig::fixed(*bandwidth, dim);
  return KernelConfig::median(dim, h_min);
}

RunConfig parse_config_text(const std::string& text, const std::filesystem::path& base_dir,
                            const std::string& source) {
  Entries e(source, base_dir);
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) e.fail_at(line_no, "expected 'key = value'");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    std::string value = trim(std::string_view(line).substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
      value = value.substr(1, value.size() - 2);
    if (key.empty()) e.fail_at(line_no, "empty key");
    e.add(key, value, line_no);
  }

  RunConfig c;
  e.require("target.name");
  e.require("solver.scheme");
  e.require("solver.outer_iters");
  e.require("particles.n");

  // target
  auto& t = c.target;
  t.name = *e.text("target.name");
  static const std::set<std::string> targets = {"toy1",    "toy2",     "toy3",
                                                "mixture", "logistic", "gaussian"};
  if (!targets.contains(t.name)) e.fail("target.name", "unknown target '" + t.name + "'");
  t.dim = e.integer<int>("target.dim").value_or(t.dim);
  if (t.dim < 1) e.fail("target.dim", "must be >= 1");
  t.mean = e.list("target.mean").value_or(t.mean);
  if (!t.mean.empty() && static_cast<int>(t.mean.size()) != t.dim)
    e.fail("target.mean", "has " + std::to_string(t.mean.size()) + " entries, target.dim is " +
                              std::to_string(t.dim));
  t.scale = e.number("target.scale").value_or(t.scale);
  if (!(t.scale > 0.0)) e.fail("target.scale", "must be positive");
  t.sigma = e.number("target.sigma").value_or(t.sigma);
  if (!(t.sigma > 0.0)) e.fail("target.sigma", "must be positive");
  t.observations = e.existing_path("target.observations");
  t.n_obs = e.integer<Index>("target.n_obs").value_or(t.n_obs);
  if (t.n_obs < 0) e.fail("target.n_obs", "must be >= 0");
  t.omega = e.list("target.omega").value_or(t.omega);
  if (t.omega.size() != 2) e.fail("target.omega", "needs exactly 2 entries");
  if (t.name == "logistic") e.require("target.data", "logistic target");
  if (auto p = e.existing_path("target.data")) t.data = *p;
  t.label_column = e.text("target.label_column").value_or(t.label_column);
  t.standardize = e.boolean("target.standardize").value_or(t.standardize);
  t.split = e.number("target.split").value_or(t.split);
  if (!(t.split > 0.0 && t.split < 1.0)) e.fail("target.split", "must lie in (0, 1)");
  t.alpha = e.number("target.alpha").value_or(t.alpha);
  if (!(t.alpha > 0.0)) e.fail("target.alpha", "must be positive");
  if (auto b = e.text("target.batch_size"); b && *b != "full") {
    const auto n = e.integer<Index>("target.batch_size");
    if (*n < 1) e.fail("target.batch_size", "must be >= 1 or 'full'");
    t.batch_size = *n;
  }
  t.data_seed = e.integer<std::uint64_t>("target.data_seed");

  // solver
  auto& s = c.solver;
  const std::string scheme = *e.text("solver.scheme");
  const auto parsed = parse_scheme(scheme);
  if (!parsed) e.fail("solver.scheme", "unknown scheme '" + scheme + "'");
  s.scheme = *parsed;
  if (s.scheme == Scheme::EviIm) e.require("solver.tau", "scheme evi_im");
  if (s.scheme != Scheme::EviIm && s.scheme != Scheme::Lmc)
    e.require("solver.lr", "explicit scheme " + scheme);
  s.tau = e.number("solver.tau").value_or(s.tau);
  if (!(s.tau > 0.0)) e.fail("solver.tau", "tau must be positive");
  s.lr = e.number("solver.lr").value_or(s.lr);
  if (!(s.lr > 0.0)) e.fail("solver.lr", "lr must be positive");
  s.inner_max_iter = e.integer<int>("solver.inner_max_iter").value_or(s.inner_max_iter);
  if (s.inner_max_iter < 1) e.fail("solver.inner_max_iter", "must be >= 1");
  s.inner_tol = e.number("solver.inner_tol").value_or(s.inner_tol);
  if (!(s.inner_tol > 0.0)) e.fail("solver.inner_tol", "must be positive");
  s.outer_iters = *e.integer<long>("solver.outer_iters");
  if (s.outer_iters < 0) e.fail("solver.outer_iters", "must be >= 0");
  s.lmc_schedule.a = e.number("solver.lmc_a").value_or(s.lmc_schedule.a);
  s.lmc_schedule.b = e.number("solver.lmc_b").value_or(s.lmc_schedule.b);
  s.lmc_schedule.c = e.number("solver.lmc_c").value_or(s.lmc_schedule.c);
  for (const char* k : {"solver.lmc_a", "solver.lmc_b", "solver.lmc_c"})
    if (e.has(k) && !(*e.number(k) > 0.0)) e.fail(k, "must be positive");
  s.lmc_printed_sign = e.boolean("solver.lmc_printed_sign").value_or(false);
  s.gfsf_ridge = e.number("solver.gfsf_ridge");
  if (s.gfsf_ridge && !(*s.gfsf_ridge >= 0.0)) e.fail("solver.gfsf_ridge", "must be >= 0");
  s.adagrad = e.boolean("solver.adagrad").value_or(true);

  c.seed = e.integer<std::uint64_t>("seed").value_or(0);
  s.seed = c.seed + 1;

  // particles, kernel, output
  c.n_particles = *e.integer<Index>("particles.n");
  if (c.n_particles < 1) e.fail("particles.n", "must be >= 1");
  c.init_mean = e.list("init.mean").value_or(c.init_mean);
  c.init_scale = e.number("init.scale").value_or(c.init_scale);
  if (!(c.init_scale >= 0.0)) e.fail("init.scale", "must be >= 0");
  if (auto bw = e.text("kernel.bandwidth"); bw && *bw != "median") {
    c.bandwidth = e.number("kernel.bandwidth");
    if (!(*c.bandwidth > 0.0)) e.fail("kernel.bandwidth", "must be positive or 'median'");
  }
  c.h_min = e.number("kernel.h_min").value_or(c.h_min);
  if (!(c.h_min > 0.0)) e.fail("kernel.h_min", "must be positive");
  c.output_dir = e.path("output.dir").value_or(base_dir / c.output_dir).lexically_normal();
  c.snapshot_every = e.integer<long>("output.snapshot_every").value_or(0);
  if (c.snapshot_every < 0) e.fail("output.snapshot_every", "must be >= 0");
  c.record_wall_time = e.boolean("output.wall_time").value_or(true);
  c.mmd_reference = e.existing_path("mmd.reference");
  return c;
}

RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  auto base = std::filesystem::absolute(path).parent_path();
  return parse_config_text(buf.str(), base, path.string());
}

std::string format_config(const RunConfig& c) {
  std::ostringstream out;
  out.imbue(std::locale::classic());
  const auto& t = c.target;
  const auto& s = c.solver;
  auto put = [&](const char* key, const std::string& value) {
    out << key << " = " << value << '\n';
  };
  auto num = [](double v) { return format_double(v); };
  put("target.name", t.name);
  put("target.dim", std::to_string(t.dim));
  if (!t.mean.empty()) put("target.mean", join(t.mean));
  put("target.scale", num(t.scale));
  put("target.sigma", num(t.sigma));
  if (t.observations) put("target.observations", std::filesystem::absolute(*t.observations).string());
  put("target.n_obs", std::to_string(t.n_obs));
  put("target.omega", join(t.omega));
  if (!t.data.empty()) put("target.data", std::filesystem::absolute(t.data).string());
  put("target.label_column", t.label_column);
  put("target.standardize", t.standardize ? "true" : "false");
  put("target.split", num(t.split));
  put("target.alpha", num(t.alpha));
  put("target.batch_size", t.batch_size ? std::to_string(*t.batch_size) : "full");
  if (t.data_seed) put("target.data_seed", std::to_string(*t.data_seed));
  put("solver.scheme", std::string(to_string(s.scheme)));
  put("solver.tau", num(s.tau));
  put("solver.lr", num(s.lr));
  put("solver.inner_max_iter", std::to_string(s.inner_max_iter));
  put("solver.inner_tol", num(s.inner_tol));
  put("solver.outer_iters", std::to_string(s.outer_iters));
  put("solver.lmc_a", num(s.lmc_schedule.a));
  put("solver.lmc_b", num(s.lmc_schedule.b));
  put("solver.lmc_c", num(s.lmc_schedule.c));
  put("solver.lmc_printed_sign", s.lmc_printed_sign ? "true" : "false");
  if (s.gfsf_ridge) put("solver.gfsf_ridge", num(*s.gfsf_ridge));
  put("solver.adagrad", s.adagrad ? "true" : "false");
  put("particles.n", std::to_string(c.n_particles));
  if (!c.init_mean.empty()) put("init.mean", join(c.init_mean));
  put("init.scale", num(c.init_scale));
  put("kernel.bandwidth", c.bandwidth ? num(*c.bandwidth) : "median");
  put("kernel.h_min", num(c.h_min));
  put("output.dir", std::filesystem::absolute(c.output_dir).string());
  put("output.snapshot_every", std::to_string(c.snapshot_every));
  put("output.wall_time", c.record_wall_time ? "true" : "false");
  if (c.mmd_reference) put("mmd.reference", std::filesystem::absolute(*c.mmd_reference).string());
  put("seed", std::to_string(c.seed));
  return out.str();
}

BuiltTarget build_target(const RunConfig& config) {
  const auto& t = config.target;
  const std::uint64_t data_seed = t.data_seed.value_or(config.seed);
  if (t.name == "toy1") return {toy1_target(), std::nullopt};
  if (t.name == "toy2") return {toy2_target(), std::nullopt};
  if (t.name == "toy3") return {toy3_target(), std::nullopt};
  if (t.name == "gaussian") {
    const Eigen::VectorXd mean =
        t.mean.empty() ? Eigen::VectorXd::Zero(t.dim)
                       : Eigen::Map<const Eigen::VectorXd>(t.mean.data(), t.dim).eval();
    return {gaussian_target(mean, t.scale), std::nullopt};
  }
  if (t.name == "mixture") {
    MixtureData data;
    if (t.observations) {
      const ParticleSet obs = read_particles_csv(*t.observations);
      if (obs.cols() != 1)
        throw Error(ErrorCode::Parse, t.observations->string() + ": expected one column");
      data = {obs.col(0), t.sigma};
    } else {
      data = generate_mixture_data(t.n_obs, Eigen::Vector2d(t.omega[0], t.omega[1]), t.sigma,
                                   data_seed);
    }
    return {mixture_posterior(std::move(data)), std::nullopt};
  }
  if (t.name == "logistic") {
    auto split = load_csv_dataset(t.data, t.label_column, t.standardize, t.split, data_seed);
    BuiltTarget built{logistic_posterior(split.train, t.alpha, t.batch_size), std::move(split.test)};
    return built;
  }
  throw Error(ErrorCode::Config, "unknown target '" + t.name + "'");
}

}  // namespace evi
