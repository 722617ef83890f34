#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "binrbm/metrics.hpp"

using namespace binrbm;

TEST(Evaluate, PerfectPrediction) {
  const std::vector<int> y{0, 1, 1, 0, 2, 2, 1, 0, 0, 1};
  const EvalReport r = evaluate(y, y);
  EXPECT_EQ(r.accuracy, 1.0);
  EXPECT_EQ(r.sample_count, 10u);
  for (std::size_t i = 0; i < r.classes.size(); ++i)
    for (std::size_t j = 0; j < r.classes.size(); ++j)
      if (i != j) EXPECT_EQ(r.confusion[i][j], 0u);
  for (const auto& rec : r.per_class_recall) EXPECT_EQ(rec, 1.0);
}

TEST(Evaluate, AllMinorityMisclassified) {
  // 3409 majority correct, 104 minority predicted as majority.
  std::vector<int> truth(3409, 1), predicted(3409, 1);
  truth.insert(truth.end(), 104, -1);
  predicted.insert(predicted.end(), 104, 1);
  const EvalReport r = evaluate(predicted, truth);
  EXPECT_DOUBLE_EQ(r.accuracy, 3409.0 / 3513.0);
  EXPECT_NEAR(r.accuracy, 0.9704, 5e-5);
  EXPECT_EQ(r.recall(-1), 0.0);
  EXPECT_EQ(r.recall(1), 1.0);
  EXPECT_EQ(r.confusion[r.index_of(-1)][r.index_of(1)], 104u);
}

TEST(Evaluate, UndefinedRecallIsFlagged) {
  const EvalReport r = evaluate(std::vector<int>{0, 1, 1}, std::vector<int>{0, 0, 0});
  EXPECT_FALSE(r.recall(1).has_value());
  EXPECT_NE(to_key_values(r).find("recall.1=undefined"), std::string::npos);
  EXPECT_NE(to_text(r).find("undefined"), std::string::npos);
}

TEST(Evaluate, Errors) {
  EXPECT_THROW(evaluate(std::vector<int>{}, std::vector<int>{}), ValidationError);
  EXPECT_THROW(evaluate(std::vector<int>{1}, std::vector<int>{1, 2}), ValidationError);
}

TEST(Evaluate, PropertyInvariantsUnderJointPermutation) {
  std::mt19937_64 gen(17);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + gen() % 60;
    std::vector<int> truth(n), predicted(n);
    for (std::size_t k = 0; k < n; ++k) {
      truth[k] = static_cast<int>(gen() % 4);
      predicted[k] = static_cast<int>(gen() % 4);
    }
    const EvalReport r = evaluate(predicted, truth);

    std::size_t total = 0, diag = 0, agree = 0;
    for (std::size_t i = 0; i < r.classes.size(); ++i) {
      std::size_t row = 0, col = 0;
      for (std::size_t j = 0; j < r.classes.size(); ++j) {
        row += r.confusion[i][j];
        col += r.confusion[j][i];
      }
      EXPECT_EQ(row, static_cast<std::size_t>(std::count(truth.begin(), truth.end(), r.classes[i])));
      EXPECT_EQ(col,
                static_cast<std::size_t>(std::count(predicted.begin(), predicted.end(), r.classes[i])));
      total += row;
      diag += r.confusion[i][i];
      if (r.per_class_recall[i]) {
        EXPECT_GE(*r.per_class_recall[i], 0.0);
        EXPECT_LE(*r.per_class_recall[i], 1.0);
      }
    }
    for (std::size_t k = 0; k < n; ++k) agree += truth[k] == predicted[k];
    EXPECT_EQ(total, n);
    EXPECT_DOUBLE_EQ(r.accuracy, double(diag) / n);
    EXPECT_DOUBLE_EQ(r.accuracy, double(agree) / n);

    std::vector<std::size_t> order(n);
    for (std::size_t k = 0; k < n; ++k) order[k] = k;
    std::shuffle(order.begin(), order.end(), gen);
    std::vector<int> t2(n), p2(n);
    for (std::size_t k = 0; k < n; ++k) {
      t2[k] = truth[order[k]];
      p2[k] = predicted[order[k]];
    }
    const EvalReport r2 = evaluate(p2, t2);
    EXPECT_EQ(r2.confusion, r.confusion);
    EXPECT_EQ(r2.accuracy, r.accuracy);
    EXPECT_EQ(r2.per_class_recall, r.per_class_recall);
  }
}

TEST(Report, KeyValueForm) {
  const EvalReport r = evaluate(std::vector<int>{0, 1, 1, 1}, std::vector<int>{0, 1, 0, 1});
  const std::string kv = to_key_values(r);
  EXPECT_NE(kv.find("accuracy=0.75\n"), std::string::npos);
  EXPECT_NE(kv.find("samples=4\n"), std::string::npos);
  EXPECT_NE(kv.find("confusion.0.1=1\n"), std::string::npos);
  EXPECT_NE(kv.find("recall.0=0.5\n"), std::string::npos);
}
