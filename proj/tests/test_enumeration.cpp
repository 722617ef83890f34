#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "binrbm/enumeration.hpp"
#include "oracles.hpp"

using namespace binrbm;

TEST(PartitionFunction, ZeroParamsCountsConfigurations) {
  EXPECT_NEAR(exact_partition_function(RbmParams::zeros(3, 2)), 32.0, 1e-12);
}

TEST(PartitionFunction, NoHiddenUnits) {
  const double t = 1.7;
  const RbmParams p{Matrix(1, 0), {t}, {}};
  EXPECT_NEAR(exact_partition_function(p), 1.0 + std::exp(t), 1e-12);
}

TEST(PartitionFunction, AgreesWithFreeEnergyMarginalization) {
  std::mt19937_64 gen(1);
  const RbmParams p = oracle::random_params(4, 3, gen);
  LogSumExp acc;
  for (std::uint64_t vm = 0; vm < 16; ++vm) acc.add(-free_energy(oracle::bits(vm, 4), p));
  EXPECT_NEAR(log_partition_function(p), acc.value(), 1e-10);
  EXPECT_NEAR(log_partition_function(p), oracle::log_partition(p), 1e-10);
}

TEST(PartitionFunction, PropertyConsistencyAndNormalization) {
  std::mt19937_64 gen(2);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t m = 1 + trial % 8, n = (trial * 3) % 6;
    const RbmParams p = oracle::random_params(m, n, gen, 1.5);
    const double log_pf = log_partition_function(p);
    double mass = 0.0;
    LogSumExp acc;
    for (std::uint64_t vm = 0; vm < (std::uint64_t{1} << m); ++vm) {
      const double neg_f = -free_energy(oracle::bits(vm, m), p);
      acc.add(neg_f);
      mass += std::exp(neg_f - log_pf);
    }
    EXPECT_NEAR(log_pf, acc.value(), 1e-9);
    EXPECT_NEAR(mass, 1.0, 1e-9);
  }
}

TEST(PartitionFunction, SizeGuard) {
  EXPECT_THROW(log_partition_function(RbmParams::zeros(13, 12)), SizeLimitError);
  EXPECT_THROW(exact_log_likelihood(Matrix(1, 20), RbmParams::zeros(20, 5)), SizeLimitError);
}

TEST(LogLikelihood, UniformModel) {
  // Each of the 2^m visible states has probability 1/4 when m = 2.
  EXPECT_NEAR(exact_log_likelihood(Matrix{{1, 0}}, RbmParams::zeros(2, 1)), -std::log(4.0), 1e-12);
}

TEST(LogLikelihood, NormalizesOverAllVisibleStates) {
  std::mt19937_64 gen(3);
  const RbmParams p = oracle::random_params(5, 3, gen);
  double total = 0.0;
  for (std::uint64_t vm = 0; vm < 32; ++vm)
    total += std::exp(exact_log_likelihood(Matrix::from_rows({oracle::bits(vm, 5)}), p));
  EXPECT_NEAR(total, 1.0, 1e-10);
}

TEST(LogLikelihood, TrainingOnConcentratedDataImproves) {
  Matrix data;
  for (int k = 0; k < 10; ++k) {
    data.append_row(Vector{1, 1, 1, 0, 0, 0});
    data.append_row(Vector{0, 0, 0, 1, 1, 1});
  }
  TrainConfig c;
  c.hidden_units = 4;
  c.init_weight_scale = 0.01;
  c.seed = 4;
  SeededRng rng(c.seed);
  const double before = exact_log_likelihood(data, initial_params(6, c, rng));
  const double after = exact_log_likelihood(data, train_rbm(data, c));
  EXPECT_GT(after, before);
}

TEST(LogSumExp, HandlesEmptyAndLargeValues) {
  LogSumExp empty;
  EXPECT_EQ(empty.value(), -std::numeric_limits<double>::infinity());
  LogSumExp big;
  big.add(1000.0);
  big.add(1000.0);
  EXPECT_NEAR(big.value(), 1000.0 + std::log(2.0), 1e-12);
}
