#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "binrbm/error.hpp"
#include "binrbm/matrix.hpp"
#include "binrbm/rng.hpp"

namespace binrbm {

struct LabeledDataset {
  Matrix features;
  std::vector<int> labels;
  std::vector<std::string> feature_names;  // empty, or one per column

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t dim() const noexcept { return features.cols(); }

  void validate() const {
    detail::require(features.rows() == labels.size(), "LabeledDataset: row/label count mismatch");
    detail::require(feature_names.empty() || feature_names.size() == features.cols(),
                    "LabeledDataset: feature name count mismatch");
  }

  // Ascending distinct labels.
  std::vector<int> classes() const {
    std::vector<int> ids(labels);
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids;
  }

  // Rows whose label equals `class_id`, in dataset order.
  Matrix rows_of_class(int class_id) const {
    std::vector<std::size_t> idx;
    for (std::size_t r = 0; r < labels.size(); ++r)
      if (labels[r] == class_id) idx.push_back(r);
    return features.select_rows(idx);
  }

  LabeledDataset subset(std::span<const std::size_t> indices) const {
    LabeledDataset out{features.select_rows(indices), {}, feature_names};
    out.labels.reserve(indices.size());
    for (std::size_t i : indices) out.labels.push_back(labels[i]);
    return out;
  }
};

namespace detail {

inline std::string_view trim(std::string_view s) noexcept {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

template <typename T>
std::optional<T> parse_number(std::string_view cell) {
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  T value{};
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc{} || ptr != cell.data() + cell.size() || cell.empty()) return std::nullopt;
  return value;
}

}  // namespace detail

/// Reads a header-first comma-separated file. Every column except
/// `label_column` is a feature, in file order; labels must be integers.
inline LabeledDataset load_csv(const std::string& path, const std::string& label_column = "label") {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) throw IoError("'" + path + "' is empty");
  const auto header = detail::split_commas(line);
  std::vector<std::string> names(header.begin(), header.end());
  auto label_it = std::find(names.begin(), names.end(), label_column);
  if (label_it == names.end()) throw MissingColumnError(label_column);
  const std::size_t label_index = static_cast<std::size_t>(label_it - names.begin());

  LabeledDataset ds;
  for (std::size_t c = 0; c < names.size(); ++c)
    if (c != label_index) ds.feature_names.push_back(names[c]);
  ds.features = Matrix(0, ds.feature_names.size());

  Vector row(ds.feature_names.size());
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split_commas(line);
    if (cells.size() != names.size())
      throw ParseError(line_no, "", "'" + path + "' line " + std::to_string(line_no) + ": expected " +
                                        std::to_string(names.size()) + " cells, got " +
                                        std::to_string(cells.size()));
    std::size_t f = 0;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c == label_index) {
        auto label = detail::parse_number<int>(cells[c]);
        if (!label)
          throw ParseError(line_no, names[c], "'" + path + "' row " + std::to_string(line_no) +
                                                  ", column " + names[c] + ": label '" +
                                                  std::string(cells[c]) + "' is not an integer");
        ds.labels.push_back(*label);
      } else {
        auto value = detail::parse_number<double>(cells[c]);
        if (!value || !std::isfinite(*value))
          throw ParseError(line_no, names[c], "'" + path + "' row " + std::to_string(line_no) +
                                                  ", column " + names[c] + ": '" +
                                                  std::string(cells[c]) + "' is not a finite number");
        row[f++] = *value;
      }
    }
    ds.features.append_row(row);
  }
  if (in.bad()) throw IoError("read error on '" + path + "'");
  return ds;
}

/// Writes features then a label column. Reals use 17 significant digits, so
/// loading the file back reproduces every double exactly.
inline void save_csv(const LabeledDataset& ds, const std::string& path,
                     const std::string& label_column = "label") {
  ds.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  for (std::size_t c = 0; c < ds.dim(); ++c)
    out << (ds.feature_names.empty() ? "f" + std::to_string(c + 1) : ds.feature_names[c]) << ',';
  out << label_column << '\n';
  char buf[32];
  for (std::size_t r = 0; r < ds.size(); ++r) {
    for (double x : ds.features.row(r)) {
      std::snprintf(buf, sizeof buf, "%.17g", x);
      out << buf << ',';
    }
    out << ds.labels[r] << '\n';
  }
  if (!out) throw IoError("write error on '" + path + "'");
}

struct SplitSpec {
  double train_fraction = 0.5;
  std::uint64_t seed = 0;
  bool stratified = true;

  void validate() const {
    detail::require(train_fraction > 0.0 && train_fraction < 1.0,
                    "SplitSpec: train_fraction must be in (0,1)");
  }
};

struct SplitResult {
  LabeledDataset train;
  LabeledDataset test;
  std::vector<std::size_t> train_indices;  // ascending
  std::vector<std::size_t> test_indices;   // ascending
};

namespace detail {
inline void shuffle(std::vector<std::size_t>& xs, SeededRng& rng) {
  for (std::size_t i = xs.size(); i > 1; --i) std::swap(xs[i - 1], xs[rng.uniform_index(i)]);
}
}  // namespace detail

/// Seeded random partition. Stratified: classes are visited in ascending id
/// order, each class's rows shuffled and the first floor(count * fraction)
/// sent to train. Both index lists come back sorted, so row order follows
/// the source dataset.
inline SplitResult split(const LabeledDataset& ds, const SplitSpec& spec) {
  spec.validate();
  ds.validate();
  detail::require(ds.size() > 0, "split: empty dataset");

  SeededRng rng(spec.seed);
  SplitResult out;
  auto take = [&](std::vector<std::size_t> idx) {
    detail::shuffle(idx, rng);
    const auto n_train =
        static_cast<std::size_t>(std::floor(static_cast<double>(idx.size()) * spec.train_fraction));
    out.train_indices.insert(out.train_indices.end(), idx.begin(), idx.begin() + n_train);
    out.test_indices.insert(out.test_indices.end(), idx.begin() + n_train, idx.end());
  };

  if (spec.stratified) {
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t r = 0; r < ds.size(); ++r) by_class[ds.labels[r]].push_back(r);
    for (auto& [label, idx] : by_class) {
      detail::require(idx.size() >= 2, "split: class " + std::to_string(label) +
                                           " has fewer than 2 samples");
      take(std::move(idx));
    }
  } else {
    std::vector<std::size_t> idx(ds.size());
    for (std::size_t r = 0; r < idx.size(); ++r) idx[r] = r;
    take(std::move(idx));
  }

  std::sort(out.train_indices.begin(), out.train_indices.end());
  std::sort(out.test_indices.begin(), out.test_indices.end());
  out.train = ds.subset(out.train_indices);
  out.test = ds.subset(out.test_indices);
  return out;
}

struct SynthSpec {
  unsigned classes = 2;
  std::size_t samples_per_class = 200;
  std::size_t dim = 100;
  double separation = 1.0;
  double noise = 0.05;
  std::uint64_t seed = 0;

  // Number of leading dimensions that carry class information.
  std::size_t informative_dims() const {
    return static_cast<std::size_t>(std::ceil(separation * static_cast<double>(dim)));
  }

  void validate() const {
    detail::require(classes >= 2, "SynthSpec: classes must be >= 2");
    detail::require(samples_per_class >= 1, "SynthSpec: samples_per_class must be >= 1");
    detail::require(dim >= 1, "SynthSpec: dim must be >= 1");
    detail::require(separation > 0.0 && separation <= 1.0, "SynthSpec: separation must be in (0,1]");
    detail::require(noise >= 0.0 && noise <= 1.0, "SynthSpec: noise must be in [0,1]");
    detail::require(informative_dims() >= classes,
                    "SynthSpec: separation * dim must give at least one dimension per class");
  }
};

/// Class templates: the first ceil(separation * dim) dimensions are cut into
/// `classes` contiguous blocks and class c switches on block c only. The
/// remaining dimensions are 0 in every template.
inline Matrix synth_templates(const SynthSpec& spec) {
  spec.validate();
  const std::size_t region = spec.informative_dims();
  Matrix templates(spec.classes, spec.dim);
  for (std::size_t c = 0; c < spec.classes; ++c) {
    const std::size_t begin = c * region / spec.classes;
    const std::size_t end = (c + 1) * region / spec.classes;
    for (std::size_t d = begin; d < end; ++d) templates(c, d) = 1.0;
  }
  return templates;
}

// Samples are class-major with labels 0..classes-1; each bit of the
// template flips independently with probability `noise`.
inline LabeledDataset synth_generate(const SynthSpec& spec) {
  const Matrix templates = synth_templates(spec);
  SeededRng rng(spec.seed);
  LabeledDataset ds{Matrix(spec.classes * spec.samples_per_class, spec.dim), {}, {}};
  ds.labels.reserve(ds.features.rows());
  for (std::size_t d = 0; d < spec.dim; ++d) ds.feature_names.push_back("f" + std::to_string(d + 1));
  std::size_t r = 0;
  for (std::size_t c = 0; c < spec.classes; ++c) {
    for (std::size_t s = 0; s < spec.samples_per_class; ++s, ++r) {
      auto row = ds.features.row(r);
      for (std::size_t d = 0; d < spec.dim; ++d) {
        const bool flip = rng.uniform() < spec.noise;
        row[d] = flip ? 1.0 - templates(c, d) : templates(c, d);
      }
      ds.labels.push_back(static_cast<int>(c));
    }
  }
  return ds;
}

}  // namespace binrbm
