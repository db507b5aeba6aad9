#include <gtest/gtest.h>

#include <cmath>

#include "buggin/error.hpp"
#include "buggin/metrics.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace buggin;
using namespace buggin::testing;

namespace {

std::vector<int> expand(std::size_t tp, std::size_t fp, std::size_t tn, std::size_t fn, std::vector<int>& pred) {
  std::vector<int> truth;
  pred.clear();
  for (std::size_t i = 0; i < tp; ++i) truth.push_back(1), pred.push_back(1);
  for (std::size_t i = 0; i < fp; ++i) truth.push_back(0), pred.push_back(1);
  for (std::size_t i = 0; i < tn; ++i) truth.push_back(0), pred.push_back(0);
  for (std::size_t i = 0; i < fn; ++i) truth.push_back(1), pred.push_back(0);
  return truth;
}

}  // namespace

TEST(Confusion, Examples) {
  const std::vector<int> t = {1, 1, 0, 0};
  const std::vector<int> p = {1, 0, 0, 1};
  EXPECT_EQ(confusion(t, p), (ConfusionCounts{1, 1, 1, 1}));
  EXPECT_EQ(confusion(t, t), (ConfusionCounts{2, 0, 2, 0}));
  const std::vector<int> zeros(7, 0), ones(7, 1);
  EXPECT_EQ(confusion(zeros, ones), (ConfusionCounts{0, 7, 0, 0}));
}

TEST(Confusion, RejectsMismatchAndEmpty) {
  const std::vector<int> a = {1, 0}, b = {1};
  EXPECT_THROW(confusion(a, b), DimensionError);
  EXPECT_THROW(confusion(std::vector<int>{}, std::vector<int>{}), DimensionError);
}

TEST(Rates, WorkedExample) {
  const ConfusionCounts c{2, 1, 6, 1};
  EXPECT_NEAR(precision(c).value, 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(recall(c).value, 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(f1(c).value, 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(accuracy(c).value, 0.8, 1e-15);
  EXPECT_FALSE(f1(c).degenerate);
}

TEST(Rates, AllNegativeTruthAndPrediction) {
  const ConfusionCounts c{0, 0, 5, 0};
  EXPECT_EQ(accuracy(c).value, 1.0);
  for (auto v : {precision(c), recall(c), f1(c)}) {
    EXPECT_EQ(v.value, 0.0);
    EXPECT_TRUE(v.degenerate);
  }
}

TEST(Rates, ExhaustiveOverSmallConfusionMatrices) {
  std::size_t checked = 0;
  for (std::size_t tp = 0; tp <= 20; ++tp) {
    for (std::size_t fp = 0; tp + fp <= 20; ++fp) {
      for (std::size_t tn = 0; tp + fp + tn <= 20; ++tn) {
        for (std::size_t fn = 0; tp + fp + tn + fn <= 20; ++fn) {
          const ConfusionCounts c{tp, fp, tn, fn};
          const auto p = precision(c), r = recall(c), f = f1(c), a = accuracy(c);
          ASSERT_EQ(p.degenerate, tp + fp == 0);
          ASSERT_EQ(r.degenerate, tp + fn == 0);
          ASSERT_EQ(f.degenerate, 2 * tp + fp + fn == 0);
          ASSERT_EQ(a.degenerate, c.total() == 0);
          if (!p.degenerate) {
            ASSERT_NEAR(p.value * double(tp + fp), double(tp), 1e-12);
          }
          if (!r.degenerate) {
            ASSERT_NEAR(r.value * double(tp + fn), double(tp), 1e-12);
          }
          if (!a.degenerate) {
            ASSERT_NEAR(a.value * double(c.total()), double(tp + tn), 1e-12);
          }
          if (!p.degenerate && !r.degenerate && p.value + r.value > 0) {
            ASSERT_NEAR(f.value, 2 * p.value * r.value / (p.value + r.value), 1e-12);
          } else if (!f.degenerate) {
            ASSERT_EQ(f.value, 0.0);
          }
          for (auto v : {p, r, f, a}) {
            ASSERT_GE(v.value, 0.0);
            ASSERT_LE(v.value, 1.0);
            if (v.degenerate) {
              ASSERT_EQ(v.value, 0.0);
            }
          }
          if (c.total() > 0) {
            std::vector<int> pred;
            const auto truth = expand(tp, fp, tn, fn, pred);
            ASSERT_EQ(confusion(truth, pred), c);
          }
          ++checked;
        }
      }
    }
  }
  EXPECT_EQ(checked, 10626u);  // C(24, 4)
}

TEST(Rates, EqualPrecisionAndRecallGiveThatF1) {
  for (std::size_t tp = 1; tp < 30; ++tp) {
    for (std::size_t e = 0; e < 30; ++e) {
      const ConfusionCounts c{tp, e, 3, e};
      EXPECT_NEAR(f1(c).value, precision(c).value, 1e-15);
    }
  }
}

TEST(Rates, ConstantMajorityPredictorAccuracyIsTheMajorityFraction) {
  Pcg32 rng(6);
  for (int trial = 0; trial < 500; ++trial) {
    const auto n = uniform_int(rng, 1, 60);
    std::vector<int> y(n);
    std::size_t pos = 0;
    for (auto& v : y) pos += static_cast<std::size_t>(v = static_cast<int>(rng.bounded(2)));
    const int majority = 2 * pos >= n ? 1 : 0;
    const std::vector<int> pred(n, majority);
    const double frac = double(std::max(pos, n - pos)) / double(n);
    ASSERT_NEAR(accuracy(confusion(y, pred)).value, frac, 1e-15);
  }
}

TEST(Auc, Examples) {
  EXPECT_EQ(auc_roc(std::vector<int>{1, 1, 0}, std::vector<double>{0.9, 0.8, 0.3}), 1.0);
  EXPECT_EQ(auc_roc(std::vector<int>{1, 0, 1, 0, 0}, std::vector<double>(5, 0.42)), 0.5);
  EXPECT_DOUBLE_EQ(auc_roc(std::vector<int>{1, 0, 1, 0}, std::vector<double>{0.8, 0.8, 0.4, 0.2}), 0.625);
  EXPECT_EQ(auc_roc(std::vector<int>{0, 1}, std::vector<double>{0.9, 0.1}), 0.0);
}

TEST(Auc, Errors) {
  EXPECT_THROW(auc_roc(std::vector<int>{1, 1}, std::vector<double>{0.1, 0.2}), UndefinedMetricError);
  EXPECT_THROW(auc_roc(std::vector<int>{0}, std::vector<double>{0.1}), UndefinedMetricError);
  EXPECT_THROW(auc_roc(std::vector<int>{0, 1}, std::vector<double>{0.1}), DimensionError);
}

TEST(AucProperty, MatchesPairCountingOnRandomInstances) {
  Pcg32 rng(31337);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto n = uniform_int(rng, 2, 50);
    const auto y = random_labels(rng, n, 1);
    std::vector<double> s(n);
    // coarse grid so ties are common
    const auto levels = uniform_int(rng, 1, 12);
    for (auto& v : s) v = double(rng.bounded(levels)) / double(levels);
    ASSERT_NEAR(auc_roc(y, s), oracle::pair_count_auc(y, s), 1e-12) << "trial " << trial;
  }
}

TEST(AucProperty, InvariantUnderStrictlyIncreasingTransforms) {
  Pcg32 rng(99);
  for (int trial = 0; trial < 300; ++trial) {
    const auto n = uniform_int(rng, 2, 50);
    const auto y = random_labels(rng, n, 1);
    std::vector<double> s(n), t1(n), t2(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = double(rng.bounded(20)) - 10.0;
      t1[i] = std::exp(s[i]);
      t2[i] = 3.0 * s[i] * s[i] * s[i] + 7.0;
    }
    const double a = auc_roc(y, s);
    ASSERT_EQ(a, auc_roc(y, t1));
    ASSERT_EQ(a, auc_roc(y, t2));
  }
}
