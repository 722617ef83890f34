#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>

#include "binrbm/error.hpp"
#include "binrbm/matrix.hpp"
#include "binrbm/rng.hpp"

namespace binrbm::markov {

inline constexpr double kRowSumTolerance = 1e-12;

/// Row-stochastic square matrix. Validated once at construction; every
/// operation below may assume the invariants hold.
class TransitionMatrix {
 public:
  explicit TransitionMatrix(Matrix entries) : entries_(std::move(entries)) { validate(); }

  std::size_t states() const noexcept { return entries_.rows(); }
  const Matrix& entries() const noexcept { return entries_; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return entries_(i, j); }

  // Products of valid matrices drift from exact stochasticity by rounding only;
  // they are not re-validated against the construction tolerance.
  static TransitionMatrix from_product(Matrix entries) {
    TransitionMatrix t;
    t.entries_ = std::move(entries);
    return t;
  }

 private:
  TransitionMatrix() = default;

  void validate() const {
    detail::require(entries_.rows() > 0, "TransitionMatrix: empty");
    detail::require(entries_.rows() == entries_.cols(), "TransitionMatrix: not square");
    for (std::size_t i = 0; i < entries_.rows(); ++i) {
      double sum = 0.0;
      for (double p : entries_.row(i)) {
        detail::require(p >= 0.0 && p <= 1.0, "TransitionMatrix: entry outside [0,1]");
        sum += p;
      }
      detail::require(std::abs(sum - 1.0) <= kRowSumTolerance,
                      "TransitionMatrix: row " + std::to_string(i) + " does not sum to 1");
    }
  }

  Matrix entries_;
};

class StateDistribution {
 public:
  explicit StateDistribution(Vector probs) : probs_(std::move(probs)) {
    detail::require(!probs_.empty(), "StateDistribution: empty");
    double sum = 0.0;
    for (double p : probs_) {
      detail::require(p >= 0.0 && p <= 1.0, "StateDistribution: entry outside [0,1]");
      sum += p;
    }
    detail::require(std::abs(sum - 1.0) <= kRowSumTolerance,
                    "StateDistribution: does not sum to 1");
  }

  static StateDistribution uniform(std::size_t states) {
    return StateDistribution(Vector(states, 1.0 / static_cast<double>(states)));
  }

  std::size_t size() const noexcept { return probs_.size(); }
  const Vector& probs() const noexcept { return probs_; }
  double operator[](std::size_t i) const noexcept { return probs_[i]; }

 private:
  Vector probs_;
};

inline TransitionMatrix transition_power(const TransitionMatrix& t, unsigned n) {
  detail::require(n >= 1, "transition_power: n must be >= 1");
  Matrix result = Matrix::identity(t.states());
  Matrix base = t.entries();
  // Binary exponentiation.
  for (unsigned e = n; e > 0; e >>= 1) {
    if (e & 1u) result = multiply(result, base);
    if (e > 1) base = multiply(base, base);
  }
  return TransitionMatrix::from_product(std::move(result));
}

inline bool is_regular(const TransitionMatrix& t, unsigned max_power) {
  detail::require(max_power >= 1, "is_regular: max_power must be >= 1");
  Matrix power = t.entries();
  for (unsigned k = 1; k <= max_power; ++k) {
    if (k > 1) power = multiply(power, t.entries());
    auto values = power.data();
    if (std::all_of(values.begin(), values.end(), [](double x) { return x > 0.0; })) return true;
  }
  return false;
}

// Row vector times matrix.
inline Vector step(std::span<const double> v, const TransitionMatrix& t) {
  Vector out(t.states(), 0.0);
  for (std::size_t i = 0; i < t.states(); ++i)
    for (std::size_t j = 0; j < t.states(); ++j) out[j] += v[i] * t(i, j);
  return out;
}

/// Power iteration V <- V*T from `start` until ||V*T - V||_inf <= tol.
/// Returns the first iterate meeting that bound. Irregular chains may
/// "converge" to a non-unique fixed point (identity keeps any start); gate
/// on is_regular first when uniqueness matters.
inline StateDistribution equilibrium_vector(const TransitionMatrix& t, const StateDistribution& start,
                                            double tol, unsigned max_iters) {
  detail::require(tol > 0.0, "equilibrium_vector: tol must be positive");
  detail::require(max_iters >= 1, "equilibrium_vector: max_iters must be >= 1");
  detail::require(start.size() == t.states(), "equilibrium_vector: start has wrong length");

  Vector v = start.probs();
  for (unsigned iter = 0; iter < max_iters; ++iter) {
    Vector next = step(v, t);
    double residual = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) residual = std::max(residual, std::abs(next[i] - v[i]));
    if (residual <= tol) {
      // Renormalize rounding drift; the residual bound is unaffected at this scale.
      double sum = 0.0;
      for (double x : v) sum += x;
      for (double& x : v) x /= sum;
      return StateDistribution(std::move(v));
    }
    v = std::move(next);
  }
  throw ConvergenceError("equilibrium_vector: no convergence within " + std::to_string(max_iters) +
                             " iterations",
                         std::move(v));
}

inline StateDistribution equilibrium_vector(const TransitionMatrix& t, double tol, unsigned max_iters) {
  return equilibrium_vector(t, StateDistribution::uniform(t.states()), tol, max_iters);
}

// 1 iff a fresh uniform draw r satisfies r < p, so p = 0 never fires and p = 1 always does.
inline int bernoulli(double p, SeededRng& rng) {
  detail::require(p >= 0.0 && p <= 1.0, "bernoulli: probability outside [0,1]");
  return rng.uniform() < p ? 1 : 0;
}

}  // namespace binrbm::markov
