#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>

#include "binrbm/error.hpp"
#include "binrbm/matrix.hpp"

namespace binrbm {

// Which matrix supplies min/max for binarization: each class's own rows, or all rows.
enum class RangeScope { PerMatrix, Global };

inline std::string_view to_string(RangeScope scope) noexcept {
  return scope == RangeScope::PerMatrix ? "per-matrix" : "global";
}

inline RangeScope parse_range_scope(std::string_view text) {
  if (text == "per-matrix") return RangeScope::PerMatrix;
  if (text == "global") return RangeScope::Global;
  throw ValidationError("unknown range scope '" + std::string(text) +
                        "' (expected per-matrix or global)");
}

struct BinarizationRule {
  double alpha = 0.5;
  RangeScope scope = RangeScope::PerMatrix;

  void validate() const {
    detail::require(alpha > 0.0 && alpha < 1.0, "BinarizationRule: alpha must be in (0,1)");
  }
};

struct ValueRange {
  double min = 0.0;
  double max = 0.0;
};

inline Vector l2_normalize(std::span<const double> row) {
  detail::require(!row.empty(), "l2_normalize: empty row");
  double sum_sq = 0.0;
  for (double x : row) sum_sq += x * x;
  const double norm = std::sqrt(sum_sq);
  if (!(norm > 0.0) || !std::isfinite(norm))
    throw DegenerateInputError("l2_normalize: row has zero or non-finite norm");
  Vector out(row.begin(), row.end());
  for (double& x : out) x /= norm;
  return out;
}

inline Matrix l2_normalize_rows(const Matrix& matrix) {
  Matrix out(matrix.rows(), matrix.cols());
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    const Vector row = l2_normalize(matrix.row(r));
    std::copy(row.begin(), row.end(), out.row(r).begin());
  }
  return out;
}

inline ValueRange minmax(const Matrix& matrix) {
  detail::require(!matrix.empty(), "minmax: empty matrix");
  auto [lo, hi] = std::minmax_element(matrix.data().begin(), matrix.data().end());
  return {*lo, *hi};
}

/// Entry -> 0 iff (x - min) < alpha * (max - min), else 1. With min == max
/// nothing is strictly below the threshold, so every entry becomes 1.
inline Matrix binarize(const Matrix& matrix, const BinarizationRule& rule, ValueRange range) {
  rule.validate();
  detail::require(range.min <= range.max, "binarize: min exceeds max");
  const double cut = rule.alpha * (range.max - range.min);
  Matrix out(matrix.rows(), matrix.cols());
  auto src = matrix.data();
  auto dst = out.data();
  for (std::size_t k = 0; k < src.size(); ++k) dst[k] = (src[k] - range.min < cut) ? 0.0 : 1.0;
  return out;
}

// Normalize rows, then binarize against this matrix's own range.
inline Matrix preprocess_pipeline(const Matrix& matrix, const BinarizationRule& rule) {
  rule.validate();
  detail::require(!matrix.empty(), "preprocess_pipeline: empty matrix");
  const Matrix normalized = l2_normalize_rows(matrix);
  return binarize(normalized, rule, minmax(normalized));
}

struct LabeledBinarization {
  Matrix binary;
  std::map<int, ValueRange> class_ranges;  // range of each class's normalized rows
  ValueRange global_range;                 // range over all normalized rows
};

/// Labelled variant: with PerMatrix scope each class's rows are binarized
/// against that class's own range, with Global against the pooled range.
/// Both kinds of range are reported so they can be reused on unlabelled data.
inline LabeledBinarization preprocess_labeled(const Matrix& matrix, std::span<const int> labels,
                                              const BinarizationRule& rule) {
  rule.validate();
  detail::require(!matrix.empty(), "preprocess_labeled: empty matrix");
  detail::require(labels.size() == matrix.rows(), "preprocess_labeled: label count mismatch");

  const Matrix normalized = l2_normalize_rows(matrix);
  LabeledBinarization out{Matrix(matrix.rows(), matrix.cols()), {}, minmax(normalized)};

  for (std::size_t r = 0; r < normalized.rows(); ++r) {
    auto row = normalized.row(r);
    auto [lo, hi] = std::minmax_element(row.begin(), row.end());
    auto [it, inserted] = out.class_ranges.try_emplace(labels[r], ValueRange{*lo, *hi});
    if (!inserted) {
      it->second.min = std::min(it->second.min, *lo);
      it->second.max = std::max(it->second.max, *hi);
    }
  }

  for (std::size_t r = 0; r < normalized.rows(); ++r) {
    const ValueRange range =
        rule.scope == RangeScope::PerMatrix ? out.class_ranges.at(labels[r]) : out.global_range;
    const double cut = rule.alpha * (range.max - range.min);
    auto src = normalized.row(r);
    auto dst = out.binary.row(r);
    for (std::size_t c = 0; c < src.size(); ++c) dst[c] = (src[c] - range.min < cut) ? 0.0 : 1.0;
  }
  return out;
}

}  // namespace binrbm
