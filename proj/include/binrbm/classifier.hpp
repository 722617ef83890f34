#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "binrbm/dataset.hpp"
#include "binrbm/error.hpp"
#include "binrbm/matrix.hpp"
#include "binrbm/rbm.hpp"
#include "binrbm/rng.hpp"

namespace binrbm {

/// One RBM per class plus a soft-max offset per class. The offset of class c
/// stands in for -log PF_c; only differences between offsets matter, and
/// fitting pins offsets[0] to 0.
struct ClassEnsemble {
  std::vector<int> classes;  // strictly ascending
  std::vector<RbmParams> models;
  Vector offsets;
  std::vector<TrainConfig> configs;  // config each model was trained with; may be empty

  std::size_t visible() const noexcept { return models.empty() ? 0 : models.front().visible(); }

  void validate() const {
    detail::require(classes.size() >= 2, "ClassEnsemble: need at least 2 classes");
    detail::require(models.size() == classes.size() && offsets.size() == classes.size(),
                    "ClassEnsemble: classes, models and offsets differ in length");
    detail::require(configs.empty() || configs.size() == classes.size(),
                    "ClassEnsemble: configs length mismatch");
    detail::require(std::adjacent_find(classes.begin(), classes.end(), std::greater_equal<>()) ==
                        classes.end(),
                    "ClassEnsemble: class ids must be strictly ascending");
    for (const auto& model : models) {
      model.validate();
      detail::require(model.visible() == visible(), "ClassEnsemble: models differ in visible size");
    }
    for (double b : offsets) detail::require(std::isfinite(b), "ClassEnsemble: non-finite offset");
  }

  friend bool operator==(const ClassEnsemble&, const ClassEnsemble&) = default;
};

struct OffsetFitConfig {
  double learning_rate = 1.0;
  unsigned iterations = 10000;
  double tolerance = 1e-8;

  void validate() const {
    detail::require(std::isfinite(learning_rate) && learning_rate > 0.0,
                    "OffsetFitConfig: learning_rate must be positive");
    detail::require(iterations >= 1, "OffsetFitConfig: iterations must be >= 1");
    detail::require(std::isfinite(tolerance) && tolerance > 0.0,
                    "OffsetFitConfig: tolerance must be positive");
  }
};

struct OffsetFit {
  Vector offsets;
  std::vector<double> objective_trace;  // mean log-likelihood before each step
  unsigned iterations = 0;
  bool converged = false;
};

// Training seed for one class; independent of which other classes exist.
inline std::uint64_t derive_class_seed(std::uint64_t seed, int class_id) noexcept {
  return seed ^ mix64(static_cast<std::uint64_t>(static_cast<std::int64_t>(class_id)));
}

// Soft-max of -F_c(v) + offset_c, max-subtracted.
inline Vector softmax_of_logits(Vector logits) {
  const double top = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (double& x : logits) total += (x = std::exp(x - top));
  for (double& x : logits) x /= total;
  return logits;
}

// rows = samples, columns = models.
inline Matrix free_energy_table(std::span<const RbmParams> models, const Matrix& data) {
  Matrix table(data.rows(), models.size());
  for (std::size_t r = 0; r < data.rows(); ++r)
    for (std::size_t c = 0; c < models.size(); ++c) table(r, c) = free_energy(data.row(r), models[c]);
  return table;
}

/// Maximum-likelihood offsets for the soft-max over -F + offset, by
/// full-batch gradient ascent on the mean log-likelihood (concave in the
/// offsets). `label_columns[k]` is the column of sample k's true class.
/// Column 0 stays anchored at 0; the others move until the largest free
/// gradient component is <= tolerance or iterations run out.
inline OffsetFit fit_offsets_detailed(const Matrix& table, std::span<const std::size_t> label_columns,
                                      const OffsetFitConfig& fit) {
  fit.validate();
  const std::size_t n = table.rows();
  const std::size_t k = table.cols();
  detail::require(k >= 2, "fit_offsets: need at least 2 classes");
  detail::require(label_columns.size() == n, "fit_offsets: label count differs from table rows");
  detail::require(n > 0, "fit_offsets: empty table");
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t y : label_columns) {
    detail::require(y < k, "fit_offsets: label column out of range");
    ++counts[y];
  }
  for (std::size_t c = 0; c < k; ++c)
    detail::require(counts[c] > 0, "fit_offsets: class column " + std::to_string(c) +
                                       " has no samples");

  OffsetFit out{Vector(k, 0.0), {}, 0, false};
  Vector grad(k);
  Vector logits(k);
  for (unsigned iter = 0; iter < fit.iterations; ++iter) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double objective = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < k; ++c) logits[c] = -table(r, c) + out.offsets[c];
      const double top = *std::max_element(logits.begin(), logits.end());
      double total = 0.0;
      for (std::size_t c = 0; c < k; ++c) total += std::exp(logits[c] - top);
      const double log_norm = top + std::log(total);
      objective += logits[label_columns[r]] - log_norm;
      for (std::size_t c = 0; c < k; ++c) grad[c] -= std::exp(logits[c] - log_norm);
      grad[label_columns[r]] += 1.0;
    }
    const double scale = 1.0 / static_cast<double>(n);
    out.objective_trace.push_back(objective * scale);

    double largest = 0.0;
    for (std::size_t c = 1; c < k; ++c) largest = std::max(largest, std::abs(grad[c] * scale));
    if (largest <= fit.tolerance) {
      out.converged = true;
      break;
    }
    for (std::size_t c = 1; c < k; ++c) out.offsets[c] += fit.learning_rate * grad[c] * scale;
    out.iterations = iter + 1;
  }
  return out;
}

inline Vector fit_offsets(const Matrix& table, std::span<const std::size_t> label_columns,
                          const OffsetFitConfig& fit) {
  return fit_offsets_detailed(table, label_columns, fit).offsets;
}

/// Trains one RBM per class (seed derived from config.seed and the class id),
/// then fits offsets on the pooled training rows.
inline ClassEnsemble train_ensemble(const std::map<int, Matrix>& per_class, const TrainConfig& config,
                                    const OffsetFitConfig& fit) {
  config.validate();
  fit.validate();
  detail::require(per_class.size() >= 2, "train_ensemble: need at least 2 classes");
  const std::size_t m = per_class.begin()->second.cols();
  for (const auto& [id, data] : per_class) {
    detail::require(data.rows() > 0, "train_ensemble: class " + std::to_string(id) + " is empty");
    detail::require(data.cols() == m, "train_ensemble: class " + std::to_string(id) +
                                          " has " + std::to_string(data.cols()) +
                                          " columns, expected " + std::to_string(m));
  }

  ClassEnsemble ensemble;
  for (const auto& [id, data] : per_class) {
    TrainConfig class_config = config;
    class_config.seed = derive_class_seed(config.seed, id);
    ensemble.classes.push_back(id);
    ensemble.models.push_back(train_rbm(data, class_config));
    ensemble.configs.push_back(class_config);
  }

  Matrix pooled(0, m);
  std::vector<std::size_t> label_columns;
  std::size_t column = 0;
  for (const auto& [id, data] : per_class) {
    for (std::size_t r = 0; r < data.rows(); ++r) {
      pooled.append_row(data.row(r));
      label_columns.push_back(column);
    }
    ++column;
  }
  ensemble.offsets = fit_offsets(free_energy_table(ensemble.models, pooled), label_columns, fit);
  ensemble.validate();
  return ensemble;
}

inline ClassEnsemble train_ensemble(const LabeledDataset& train, const TrainConfig& config,
                                    const OffsetFitConfig& fit) {
  train.validate();
  std::map<int, Matrix> per_class;
  for (int id : train.classes()) per_class.emplace(id, train.rows_of_class(id));
  return train_ensemble(per_class, config, fit);
}

inline Vector predict_proba(std::span<const double> v, const ClassEnsemble& ensemble) {
  detail::require_length(v, ensemble.visible(), "predict_proba");
  Vector logits(ensemble.classes.size());
  for (std::size_t c = 0; c < logits.size(); ++c)
    logits[c] = -free_energy(v, ensemble.models[c]) + ensemble.offsets[c];
  return softmax_of_logits(std::move(logits));
}

// Argmax of predict_proba; ties go to the lowest class id.
inline int predict_label(std::span<const double> v, const ClassEnsemble& ensemble) {
  const Vector p = predict_proba(v, ensemble);
  std::size_t best = 0;
  for (std::size_t c = 1; c < p.size(); ++c)
    if (p[c] > p[best]) best = c;
  return ensemble.classes[best];
}

inline std::vector<int> predict_labels(const Matrix& data, const ClassEnsemble& ensemble) {
  std::vector<int> out(data.rows());
  for (std::size_t r = 0; r < data.rows(); ++r) out[r] = predict_label(data.row(r), ensemble);
  return out;
}

}  // namespace binrbm
