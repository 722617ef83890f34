#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdio>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "binrbm/error.hpp"

namespace binrbm {

/// Accuracy plus the confusion matrix and per-class recall. Rows of
/// `confusion` are true classes, columns predicted, both indexed by
/// position in `classes` (ascending ids seen in either input).
/// Recall is std::nullopt for a class with no true samples.
struct EvalReport {
  std::vector<int> classes;
  std::vector<std::vector<std::size_t>> confusion;
  std::vector<std::optional<double>> per_class_recall;
  double accuracy = 0.0;
  std::size_t sample_count = 0;

  std::size_t index_of(int class_id) const {
    auto it = std::lower_bound(classes.begin(), classes.end(), class_id);
    detail::require(it != classes.end() && *it == class_id,
                    "EvalReport: unknown class " + std::to_string(class_id));
    return static_cast<std::size_t>(it - classes.begin());
  }

  std::optional<double> recall(int class_id) const { return per_class_recall[index_of(class_id)]; }
};

inline EvalReport evaluate(std::span<const int> predicted, std::span<const int> truth) {
  detail::require(predicted.size() == truth.size(), "evaluate: length mismatch");
  detail::require(!truth.empty(), "evaluate: empty input");

  EvalReport report;
  report.classes.assign(truth.begin(), truth.end());
  report.classes.insert(report.classes.end(), predicted.begin(), predicted.end());
  std::sort(report.classes.begin(), report.classes.end());
  report.classes.erase(std::unique(report.classes.begin(), report.classes.end()),
                       report.classes.end());

  const std::size_t c = report.classes.size();
  report.confusion.assign(c, std::vector<std::size_t>(c, 0));
  std::size_t correct = 0;
  for (std::size_t k = 0; k < truth.size(); ++k) {
    ++report.confusion[report.index_of(truth[k])][report.index_of(predicted[k])];
    correct += predicted[k] == truth[k];
  }
  report.sample_count = truth.size();
  report.accuracy = static_cast<double>(correct) / static_cast<double>(truth.size());

  report.per_class_recall.resize(c);
  for (std::size_t i = 0; i < c; ++i) {
    std::size_t row_sum = 0;
    for (std::size_t n : report.confusion[i]) row_sum += n;
    if (row_sum > 0)
      report.per_class_recall[i] =
          static_cast<double>(report.confusion[i][i]) / static_cast<double>(row_sum);
  }
  return report;
}

namespace detail {
inline std::string format_real(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}
}  // namespace detail

inline std::string to_text(const EvalReport& report) {
  std::ostringstream out;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", report.accuracy);
  out << "samples:  " << report.sample_count << "\n";
  out << "accuracy: " << buf << "\n";
  out << "confusion (rows = true, columns = predicted):\n";
  out << "      ";
  for (int id : report.classes) {
    std::snprintf(buf, sizeof buf, "%8d", id);
    out << buf;
  }
  out << "\n";
  for (std::size_t i = 0; i < report.classes.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%6d", report.classes[i]);
    out << buf;
    for (std::size_t n : report.confusion[i]) {
      std::snprintf(buf, sizeof buf, "%8zu", n);
      out << buf;
    }
    out << "\n";
  }
  out << "recall:\n";
  for (std::size_t i = 0; i < report.classes.size(); ++i) {
    out << "  class " << report.classes[i] << ": ";
    if (report.per_class_recall[i]) {
      std::snprintf(buf, sizeof buf, "%.6f", *report.per_class_recall[i]);
      out << buf << "\n";
    } else {
      out << "undefined (no true samples)\n";
    }
  }
  return out.str();
}

// Flat key=value form; undefined recall is written as "undefined".
inline std::string to_key_values(const EvalReport& report) {
  std::ostringstream out;
  out << "report.version=1\n";
  out << "samples=" << report.sample_count << "\n";
  out << "accuracy=" << detail::format_real(report.accuracy) << "\n";
  out << "classes=";
  for (std::size_t i = 0; i < report.classes.size(); ++i) out << (i ? "," : "") << report.classes[i];
  out << "\n";
  for (std::size_t i = 0; i < report.classes.size(); ++i) {
    out << "recall." << report.classes[i] << "=";
    if (report.per_class_recall[i])
      out << detail::format_real(*report.per_class_recall[i]) << "\n";
    else
      out << "undefined\n";
  }
  for (std::size_t i = 0; i < report.classes.size(); ++i)
    for (std::size_t j = 0; j < report.classes.size(); ++j)
      out << "confusion." << report.classes[i] << "." << report.classes[j] << "="
          << report.confusion[i][j] << "\n";
  return out.str();
}

}  // namespace binrbm
