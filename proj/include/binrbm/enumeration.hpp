#pragma once

// Exact brute-force quantities for small RBMs. Exponential in m + n; intended
// as reference values for tests and diagnostics.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>

#include "binrbm/error.hpp"
#include "binrbm/rbm.hpp"

namespace binrbm {

inline constexpr std::size_t kMaxEnumeratedUnits = 24;

// Fills `bits` with the low bits of `mask`, bit k -> bits[k].
inline void unpack_bits(std::uint64_t mask, std::span<double> bits) noexcept {
  for (std::size_t k = 0; k < bits.size(); ++k) bits[k] = static_cast<double>((mask >> k) & 1u);
}

// Streaming log-sum-exp accumulator.
class LogSumExp {
 public:
  void add(double x) noexcept {
    if (x == -std::numeric_limits<double>::infinity()) return;
    if (x <= max_) {
      sum_ += std::exp(x - max_);
    } else {
      sum_ = sum_ * std::exp(max_ - x) + 1.0;
      max_ = x;
    }
  }
  double value() const noexcept {
    return sum_ == 0.0 ? -std::numeric_limits<double>::infinity() : max_ + std::log(sum_);
  }

 private:
  double max_ = -std::numeric_limits<double>::infinity();
  double sum_ = 0.0;
};

namespace detail {

inline void require_enumerable(const RbmParams& params, const char* what) {
  params.validate();
  if (params.visible() + params.hidden() > kMaxEnumeratedUnits)
    throw SizeLimitError(std::string(what) + ": m + n = " +
                         std::to_string(params.visible() + params.hidden()) + " exceeds " +
                         std::to_string(kMaxEnumeratedUnits));
}

}  // namespace detail

/// log sum_{v,h} exp(-E(v,h)), enumerating the joint states directly.
inline double log_partition_function(const RbmParams& params) {
  detail::require_enumerable(params, "log_partition_function");
  const std::size_t m = params.visible();
  const std::size_t n = params.hidden();
  Vector v(m), h(n);
  LogSumExp acc;
  for (std::uint64_t vm = 0; vm < (std::uint64_t{1} << m); ++vm) {
    unpack_bits(vm, v);
    for (std::uint64_t hm = 0; hm < (std::uint64_t{1} << n); ++hm) {
      unpack_bits(hm, h);
      acc.add(-energy(v, h, params));
    }
  }
  return acc.value();
}

inline double exact_partition_function(const RbmParams& params) {
  return std::exp(log_partition_function(params));
}

// Sum over rows of log p(row) = -F(row) - log PF.
inline double exact_log_likelihood(const Matrix& data, const RbmParams& params) {
  const double log_pf = log_partition_function(params);
  detail::require(data.cols() == params.visible(), "exact_log_likelihood: width mismatch");
  double total = 0.0;
  for (std::size_t r = 0; r < data.rows(); ++r) total += -free_energy(data.row(r), params) - log_pf;
  return total;
}

}  // namespace binrbm
