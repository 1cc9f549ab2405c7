#include "evi/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <locale>
#include <sstream>

namespace evi {

namespace {

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out.imbue(std::locale::classic());
  return out;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string_view strip(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.remove_suffix(1);
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  return s;
}

}  // namespace

std::string format_double(double value, int significant_digits) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general,
                                 significant_digits);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
  text = strip(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size())
    throw Error(ErrorCode::Parse, "not a number: '" + std::string(text) + "'");
  return v;
}

void write_particles_csv(const std::filesystem::path& path, const ParticleSet& particles) {
  auto out = open_for_write(path);
  for (Index k = 0; k < particles.cols(); ++k) out << (k ? ",x" : "x") << k;
  out << '\n';
  for (Index i = 0; i < particles.rows(); ++i) {
    for (Index k = 0; k < particles.cols(); ++k)
      out << (k ? "," : "") << format_double(particles(i, k));
    out << '\n';
  }
  if (!out) throw Error(ErrorCode::Io, "write failed: " + path.string());
}

ParticleSet read_particles_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::Parse, path.string() + ": missing header");
  const auto header = split(strip(line));
  const bool snapshot = header.size() >= 2 && strip(header[0]) == "iter" &&
                        strip(header[1]) == "particle_id";
  const std::size_t offset = snapshot ? 2 : 0;
  const std::size_t dim = header.size() - offset;
  if (dim == 0) throw Error(ErrorCode::Parse, path.string() + ": no coordinate columns");

  std::vector<double> values;
  long current_iter = 0;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    const auto text = strip(line);
    if (text.empty()) continue;
    const auto fields = split(text);
    if (fields.size() != header.size()) {
      std::ostringstream msg;
      msg << path.string() << ": line " << row << " has " << fields.size() << " fields, expected "
          << header.size();
      throw Error(ErrorCode::Parse, msg.str());
    }
    try {
      if (snapshot) {
        const auto iter = static_cast<long>(parse_double(fields[0]));
        if (values.empty() || iter != current_iter) {
          if (!values.empty() && iter < current_iter)
            throw Error(ErrorCode::Parse, "iterations are not increasing");
          values.clear();
          current_iter = iter;
        }
      }
      for (std::size_t c = offset; c < fields.size(); ++c) values.push_back(parse_double(fields[c]));
    } catch (const Error& e) {
      throw Error(ErrorCode::Parse,
                  path.string() + ": line " + std::to_string(row) + ": " + e.what());
    }
  }
  ParticleSet out(static_cast<Index>(values.size() / dim), static_cast<Index>(dim));
  for (Index i = 0; i < out.rows(); ++i)
    for (Index k = 0; k < out.cols(); ++k)
      out(i, k) = values[static_cast<std::size_t>(i) * dim + static_cast<std::size_t>(k)];
  return out;
}

void write_snapshots_csv(const std::filesystem::path& path, const std::vector<Snapshot>& snapshots,
                         Index dim) {
  auto out = open_for_write(path);
  out << "iter,particle_id";
  for (Index k = 0; k < dim; ++k) out << ",x" << k;
  out << '\n';
  for (const auto& snap : snapshots)
    for (Index i = 0; i < snap.particles.rows(); ++i) {
      out << snap.iter << ',' << i;
      for (Index k = 0; k < snap.particles.cols(); ++k)
        out << ',' << format_double(snap.particles(i, k));
      out << '\n';
    }
  if (!out) throw Error(ErrorCode::Io, "write failed: " + path.string());
}

void write_metrics_csv(const std::filesystem::path& path,
                       const std::vector<MetricsRecord>& metrics) {
  auto out = open_for_write(path);
  out << "iter,energy,grad_norm,mmd2,wall_time_s\n";
  for (const auto& m : metrics) {
    out << m.iter << ',' << format_double(m.energy) << ',' << format_double(m.grad_norm) << ',';
    if (m.mmd2) out << format_double(*m.mmd2);
    out << ',' << format_double(m.wall_time_s) << '\n';
  }
  if (!out) throw Error(ErrorCode::Io, "write failed: " + path.string());
}

}  // namespace evi
