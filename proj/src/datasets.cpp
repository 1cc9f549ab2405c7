#include "evi/targets.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <span>
#include <sstream>
#include <vector>

namespace evi {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_number(const std::string& raw, std::size_t row, std::size_t col) {
  const std::string s = trim(raw);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
    throw Error(ErrorCode::Parse, "row " + std::to_string(row) + ", column " +
                                      std::to_string(col) + ": not a finite number: '" + s + "'");
  return v;
}

LabeledDataset take_rows(const LabeledDataset& data, std::span<const Index> rows) {
  LabeledDataset out;
  out.features.resize(static_cast<Index>(rows.size()), data.cols());
  out.labels.resize(static_cast<Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    out.features.row(static_cast<Index>(k)) = data.features.row(rows[k]);
    out.labels(static_cast<Index>(k)) = data.labels(rows[k]);
  }
  return out;
}

}  // namespace

DatasetSplit split_dataset(const LabeledDataset& data, bool standardize, double split_fraction,
                           std::uint64_t seed) {
  if (data.rows() == 0) throw Error(ErrorCode::EmptyInput, "dataset has no rows");
  if (!(split_fraction > 0.0 && split_fraction < 1.0))
    throw Error(ErrorCode::InvalidArgument, "split fraction must lie in (0, 1)");

  std::vector<Index> order(static_cast<std::size_t>(data.rows()));
  std::iota(order.begin(), order.end(), Index{0});
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  const auto n_train = static_cast<std::size_t>(
      std::llround(split_fraction * static_cast<double>(data.rows())));
  const std::span<const Index> all(order);
  DatasetSplit split{take_rows(data, all.first(n_train)), take_rows(data, all.subspan(n_train))};

  if (standardize) {
    auto& train = split.train;
    if (train.rows() == 0) throw Error(ErrorCode::EmptyInput, "training split is empty");
    const Eigen::RowVectorXd mean = train.features.colwise().mean();
    const Eigen::RowVectorXd stdev =
        ((train.features.rowwise() - mean).array().square().colwise().sum() /
         static_cast<double>(train.rows()))
            .sqrt();
    for (Index c = 0; c < stdev.size(); ++c)
      if (!(stdev(c) > 0.0))
        throw Error(ErrorCode::Parse,
                    "column " + std::to_string(c) + " is constant in the training split");
    for (LabeledDataset* part : {&split.train, &split.test}) {
      part->features =
          ((part->features.rowwise() - mean).array().rowwise() / stdev.array()).matrix();
      part->standardized = true;
      part->column_means = mean.transpose();
      part->column_stds = stdev.transpose();
    }
  }
  return split;
}

DatasetSplit load_csv_dataset(const std::filesystem::path& path, const std::string& label_column,
                              bool standardize, double split_fraction, std::uint64_t seed) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open dataset " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::Parse, path.string() + ": missing header");
  std::vector<std::string> header = split_fields(line);
  for (auto& h : header) h = trim(h);
  const auto label_it = std::find(header.begin(), header.end(), label_column);
  if (label_it == header.end())
    throw Error(ErrorCode::Parse, path.string() + ": no label column '" + label_column + "'");
  const auto label_idx = static_cast<std::size_t>(label_it - header.begin());
  const std::size_t n_features = header.size() - 1;

  std::vector<double> features;
  std::vector<double> labels;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != header.size())
      throw Error(ErrorCode::Parse, path.string() + ": row " + std::to_string(row) + " has " +
                                        std::to_string(fields.size()) + " fields, expected " +
                                        std::to_string(header.size()));
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const double v = parse_number(fields[c], row, c);
      if (c != label_idx) {
        features.push_back(v);
        continue;
      }
      if (v == 1.0) {
        labels.push_back(1.0);
      } else if (v == -1.0 || v == 0.0) {
        labels.push_back(-1.0);
      } else {
        throw Error(ErrorCode::Parse, path.string() + ": row " + std::to_string(row) +
                                          ", column " + std::to_string(c) +
                                          ": unknown label " + trim(fields[c]));
      }
    }
  }

  LabeledDataset data;
  const auto n_rows = static_cast<Index>(labels.size());
  data.features = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                                 Eigen::RowMajor>>(
      features.data(), n_rows, static_cast<Index>(n_features));
  data.labels = Eigen::Map<const Eigen::VectorXd>(labels.data(), n_rows);
  return split_dataset(data, standardize, split_fraction, seed);
}

}  // namespace evi
