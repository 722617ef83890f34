#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>

#include "binrbm/error.hpp"
#include "binrbm/markov.hpp"
#include "binrbm/matrix.hpp"
#include "binrbm/rng.hpp"

namespace binrbm {

/// Binary RBM parameters. weights(i, j) couples visible unit i to hidden unit j.
/// There are no visible-visible or hidden-hidden couplings.
struct RbmParams {
  Matrix weights;       // m x n
  Vector visible_bias;  // m
  Vector hidden_bias;   // n

  static RbmParams zeros(std::size_t visible, std::size_t hidden) {
    return {Matrix(visible, hidden), Vector(visible, 0.0), Vector(hidden, 0.0)};
  }

  std::size_t visible() const noexcept { return visible_bias.size(); }
  std::size_t hidden() const noexcept { return hidden_bias.size(); }

  void validate() const {
    detail::require(weights.rows() == visible_bias.size() && weights.cols() == hidden_bias.size(),
                    "RbmParams: weight shape " + std::to_string(weights.rows()) + "x" +
                        std::to_string(weights.cols()) + " does not match biases (" +
                        std::to_string(visible_bias.size()) + ", " +
                        std::to_string(hidden_bias.size()) + ")");
  }

  bool all_finite() const noexcept {
    auto finite = [](std::span<const double> xs) {
      for (double x : xs)
        if (!std::isfinite(x)) return false;
      return true;
    };
    return finite(weights.data()) && finite(visible_bias) && finite(hidden_bias);
  }

  friend bool operator==(const RbmParams&, const RbmParams&) = default;
};

/// Training hyperparameters. Defaults are the published settings; note that
/// init_weight_scale = 1.0 (standard normal) is large for wide inputs.
struct TrainConfig {
  double learning_rate = 0.1;
  double momentum = 0.5;
  unsigned epochs = 50;
  unsigned hidden_units = 100;
  double weight_decay = 2e-4;
  std::uint64_t seed = 0;
  double init_weight_scale = 1.0;

  void validate() const {
    detail::require(std::isfinite(learning_rate) && learning_rate > 0.0,
                    "TrainConfig: learning_rate must be positive");
    detail::require(momentum >= 0.0 && momentum < 1.0, "TrainConfig: momentum must be in [0,1)");
    detail::require(epochs >= 1, "TrainConfig: epochs must be >= 1");
    detail::require(hidden_units >= 1, "TrainConfig: hidden_units must be >= 1");
    detail::require(std::isfinite(weight_decay) && weight_decay >= 0.0,
                    "TrainConfig: weight_decay must be nonnegative");
    detail::require(std::isfinite(init_weight_scale) && init_weight_scale > 0.0,
                    "TrainConfig: init_weight_scale must be positive");
  }

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct GradientEstimate {
  Matrix d_weights;
  Vector d_visible_bias;
  Vector d_hidden_bias;
};

namespace detail {

inline void require_length(std::span<const double> v, std::size_t expected, const char* what) {
  if (v.size() != expected)
    throw ValidationError(std::string(what) + ": expected length " + std::to_string(expected) +
                          ", got " + std::to_string(v.size()));
}

inline void require_binary(std::span<const double> v, const char* what) {
  if (!is_binary(v)) throw ValidationError(std::string(what) + ": input must be binary (0/1)");
}

}  // namespace detail

inline double sigmoid(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// log(1 + e^x) without overflow.
inline double softplus(double x) noexcept {
  if (x > 30.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

inline double energy(std::span<const double> v, std::span<const double> h, const RbmParams& params) {
  params.validate();
  detail::require_length(v, params.visible(), "energy(v)");
  detail::require_length(h, params.hidden(), "energy(h)");
  detail::require_binary(v, "energy(v)");
  detail::require_binary(h, "energy(h)");
  double e = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] == 0.0) continue;
    double coupling = params.visible_bias[i];
    auto w = params.weights.row(i);
    for (std::size_t j = 0; j < h.size(); ++j) coupling += w[j] * h[j];
    e -= coupling;
  }
  for (std::size_t j = 0; j < h.size(); ++j) e -= h[j] * params.hidden_bias[j];
  return e;
}

// Pre-sigmoid hidden activations x_j = b_j + sum_i v_i w_ij.
inline Vector hidden_activations(std::span<const double> v, const RbmParams& params) {
  params.validate();
  detail::require_length(v, params.visible(), "hidden_activations");
  Vector x = params.hidden_bias;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double vi = v[i];
    if (vi == 0.0) continue;
    auto w = params.weights.row(i);
    for (std::size_t j = 0; j < x.size(); ++j) x[j] += vi * w[j];
  }
  return x;
}

inline Vector hidden_probs(std::span<const double> v, const RbmParams& params) {
  Vector x = hidden_activations(v, params);
  for (double& xj : x) xj = sigmoid(xj);
  return x;
}

inline Vector visible_probs(std::span<const double> h, const RbmParams& params) {
  params.validate();
  detail::require_length(h, params.hidden(), "visible_probs");
  Vector p(params.visible());
  for (std::size_t i = 0; i < p.size(); ++i) {
    double x = params.visible_bias[i];
    auto w = params.weights.row(i);
    for (std::size_t j = 0; j < h.size(); ++j) x += w[j] * h[j];
    p[i] = sigmoid(x);
  }
  return p;
}

// Independent Bernoulli draw per component, in index order.
inline Vector sample_bits(std::span<const double> probs, SeededRng& rng) {
  Vector bits(probs.size());
  for (std::size_t k = 0; k < probs.size(); ++k) {
    const double p = probs[k];
    if (!(p >= 0.0 && p <= 1.0))
      throw ValidationError("sample_bits: component " + std::to_string(k) + " outside [0,1]");
    bits[k] = markov::bernoulli(p, rng);
  }
  return bits;
}

/// One contrastive-divergence step from a data vector. Probabilities (not
/// samples) of the hidden layer enter the statistics; the sampled hidden
/// state drives the sampled reconstruction. Returns the raw gradient; the
/// learning rate is applied by the caller.
inline GradientEstimate cd1(std::span<const double> v1, const RbmParams& params, SeededRng& rng) {
  detail::require_length(v1, params.visible(), "cd1");
  detail::require_binary(v1, "cd1");

  const Vector p1 = hidden_probs(v1, params);
  const Vector h1 = sample_bits(p1, rng);
  const Vector v2 = sample_bits(visible_probs(h1, params), rng);
  const Vector p2 = hidden_probs(v2, params);

  const std::size_t m = params.visible();
  const std::size_t n = params.hidden();
  GradientEstimate g{Matrix(m, n), Vector(m), Vector(n)};
  for (std::size_t i = 0; i < m; ++i) {
    auto row = g.d_weights.row(i);
    for (std::size_t j = 0; j < n; ++j) row[j] = v1[i] * p1[j] - v2[i] * p2[j];
    g.d_visible_bias[i] = v1[i] - v2[i];
  }
  for (std::size_t j = 0; j < n; ++j) g.d_hidden_bias[j] = p1[j] - p2[j];
  return g;
}

/// Initial parameters: weights ~ init_weight_scale * N(0,1) drawn row-major
/// from `rng`, biases zero.
inline RbmParams initial_params(std::size_t visible, const TrainConfig& config, SeededRng& rng) {
  RbmParams params = RbmParams::zeros(visible, config.hidden_units);
  for (double& w : params.weights.data()) w = config.init_weight_scale * rng.normal();
  return params;
}

// Called after each completed epoch (1-based) with the current parameters.
using EpochObserver = std::function<void(unsigned epoch, const RbmParams&)>;

/// Online CD-1 training with classical momentum and L2 weight decay.
///
/// A single SeededRng(config.seed) first draws the initial weights and then
/// drives every Gibbs sample, visiting rows in data order each epoch.
/// Per row: velocity = momentum * velocity + lr * (grad - decay * W), where
/// the decay term touches weights only, then params += velocity.
inline RbmParams train_rbm(const Matrix& data, const TrainConfig& config,
                           const EpochObserver& on_epoch = {}) {
  config.validate();
  detail::require(data.rows() > 0 && data.cols() > 0, "train_rbm: empty data");
  detail::require(is_binary(data.data()), "train_rbm: data must be binary (0/1)");

  SeededRng rng(config.seed);
  RbmParams params = initial_params(data.cols(), config, rng);
  const std::size_t m = params.visible();
  const std::size_t n = params.hidden();
  RbmParams velocity = RbmParams::zeros(m, n);

  const double lr = config.learning_rate;
  const double mom = config.momentum;
  const double decay = config.weight_decay;

  for (unsigned epoch = 1; epoch <= config.epochs; ++epoch) {
    for (std::size_t r = 0; r < data.rows(); ++r) {
      const GradientEstimate g = cd1(data.row(r), params, rng);

      auto w = params.weights.data();
      auto vw = velocity.weights.data();
      auto gw = g.d_weights.data();
      bool finite = true;
      for (std::size_t k = 0; k < w.size(); ++k) {
        vw[k] = mom * vw[k] + lr * (gw[k] - decay * w[k]);
        w[k] += vw[k];
        finite &= std::isfinite(w[k]);
      }
      for (std::size_t i = 0; i < m; ++i) {
        velocity.visible_bias[i] = mom * velocity.visible_bias[i] + lr * g.d_visible_bias[i];
        params.visible_bias[i] += velocity.visible_bias[i];
        finite &= std::isfinite(params.visible_bias[i]);
      }
      for (std::size_t j = 0; j < n; ++j) {
        velocity.hidden_bias[j] = mom * velocity.hidden_bias[j] + lr * g.d_hidden_bias[j];
        params.hidden_bias[j] += velocity.hidden_bias[j];
        finite &= std::isfinite(params.hidden_bias[j]);
      }
      if (!finite)
        throw ConvergenceError("train_rbm: non-finite parameters at epoch " + std::to_string(epoch) +
                               ", row " + std::to_string(r));
    }
    if (on_epoch) on_epoch(epoch, params);
  }
  return params;
}

/// F(v) = -sum_i v_i c_i - sum_j log(1 + exp(x_j)), so that
/// exp(-F(v)) = sum_h exp(-E(v, h)).
inline double free_energy(std::span<const double> v, const RbmParams& params) {
  detail::require_length(v, params.visible(), "free_energy");
  detail::require_binary(v, "free_energy");
  double f = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) f -= v[i] * params.visible_bias[i];
  for (double x : hidden_activations(v, params)) f -= softplus(x);
  return f;
}

// Squared Euclidean distance between v and its one-step mean reconstruction.
inline double reconstruction_error(std::span<const double> v, const RbmParams& params, SeededRng& rng) {
  const Vector h = sample_bits(hidden_probs(v, params), rng);
  const Vector recon = visible_probs(h, params);
  double err = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) err += (v[i] - recon[i]) * (v[i] - recon[i]);
  return err;
}

inline double mean_reconstruction_error(const Matrix& data, const RbmParams& params, SeededRng& rng) {
  detail::require(data.rows() > 0, "mean_reconstruction_error: empty data");
  double total = 0.0;
  for (std::size_t r = 0; r < data.rows(); ++r) total += reconstruction_error(data.row(r), params, rng);
  return total / static_cast<double>(data.rows());
}

}  // namespace binrbm
