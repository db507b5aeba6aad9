#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "buggin/error.hpp"
#include "buggin/learners.hpp"
#include "buggin/report.hpp"
#include "buggin/tuning.hpp"
#include "test_util.hpp"

using namespace buggin;
using namespace buggin::testing;

namespace {

FeatureMatrix noisy_problem(Pcg32& rng, std::size_t n, std::size_t d) {
  std::vector<std::vector<double>> rows(n, std::vector<double>(d));
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& v : rows[i]) v = uniform(rng, -1, 1);
    y[i] = rows[i][0] + 0.8 * uniform(rng, -1, 1) > 0 ? 1 : 0;
  }
  for (std::size_t i = 0; i < 10; ++i) y[i] = static_cast<int>(i % 2);
  return dense_matrix(rows, y);
}

ModelConfig knn(int k) {
  ModelConfig c;
  c.family = Family::Knn;
  c.n_neighbors = k;
  return c;
}

ModelConfig dtree(int depth) {
  ModelConfig c;
  c.family = Family::DTree;
  c.max_depth = depth;
  return c;
}

}  // namespace

TEST(Folds, SixPositivesFourNegativesIntoFive) {
  const std::vector<int> y = {1, 1, 1, 1, 1, 1, 0, 0, 0, 0};
  const auto plan = stratified_kfold(y, 5, 3);
  for (int f = 0; f < 5; ++f) {
    const auto v = plan.validation_rows(f);
    EXPECT_EQ(v.size(), 2u);
    std::size_t pos = 0;
    for (auto i : v) pos += static_cast<std::size_t>(y[i]);
    EXPECT_GE(pos, 1u);
    EXPECT_LE(pos, 2u);
    EXPECT_LE(v.size() - pos, 1u);
  }
}

TEST(Folds, ValidationOfK) {
  const std::vector<int> y = {1, 1, 0, 0};
  EXPECT_THROW(stratified_kfold(y, 1, 0), ConfigError);
  EXPECT_THROW(stratified_kfold(y, 5, 0), StratificationError);
  EXPECT_THROW(stratified_kfold(std::vector<int>(8, 1), 2, 0), StratificationError);
  EXPECT_NO_THROW(stratified_kfold(y, 2, 0));
  EXPECT_NO_THROW(stratified_kfold(y, 4, 0));
}

TEST(Folds, DeterministicForASeed) {
  Pcg32 rng(1);
  const auto y = random_labels(rng, 80, 10);
  const auto a = stratified_kfold(y, 5, 42);
  EXPECT_EQ(a.fold_of, stratified_kfold(y, 5, 42).fold_of);
  EXPECT_NE(a.fold_of, stratified_kfold(y, 5, 43).fold_of);
}

TEST(FoldsProperty, PartitionAndProportionBounds) {
  Pcg32 rng(808);
  for (int trial = 0; trial < 200; ++trial) {
    const int k = static_cast<int>(uniform_int(rng, 2, 10));
    const auto n = uniform_int(rng, static_cast<std::size_t>(k), 300);
    auto y = random_labels(rng, n, 1);
    if (trial % 4 == 0) {
      // a minority smaller than k
      std::fill(y.begin(), y.end(), 0);
      for (std::size_t i = 0, m = uniform_int(rng, 1, static_cast<std::size_t>(k)); i < m; ++i) y[rng.bounded(n)] = 1;
      y[0] = 1;
      y[n - 1] = 0;
    }
    const auto plan = stratified_kfold(y, k, rng.next_u64());
    std::size_t pos_total = 0;
    for (int v : y) pos_total += static_cast<std::size_t>(v);
    std::vector<int> seen(n, 0);
    std::vector<std::size_t> sizes, pos_counts, neg_counts;
    for (int f = 0; f < k; ++f) {
      const auto v = plan.validation_rows(f);
      const auto t = plan.training_rows(f);
      ASSERT_EQ(v.size() + t.size(), n);
      std::size_t pos = 0;
      for (auto i : v) {
        ++seen[i];
        pos += static_cast<std::size_t>(y[i]);
      }
      for (auto i : t) ASSERT_NE(plan.fold_of[i], f);
      const double dev = std::abs(double(pos) / double(v.size()) - double(pos_total) / double(n));
      ASSERT_LE(dev, 1.0 / double(v.size()) + 1e-12) << "trial " << trial << " fold " << f;
      sizes.push_back(v.size());
      pos_counts.push_back(pos);
      neg_counts.push_back(v.size() - pos);
    }
    for (int s : seen) ASSERT_EQ(s, 1);
    for (const auto* c : {&sizes, &pos_counts, &neg_counts}) {
      ASSERT_LE(*std::max_element(c->begin(), c->end()) - *std::min_element(c->begin(), c->end()), 1u);
    }
  }
}

TEST(Grid, DefaultSizes) {
  EXPECT_EQ(grid_expand(Family::Svm).size(), 24u);
  EXPECT_EQ(grid_expand(Family::LogReg).size(), 18u);
  EXPECT_EQ(grid_expand(Family::DTree).size(), 36u);
  EXPECT_EQ(grid_expand(Family::RForest).size(), 18u);
  EXPECT_EQ(grid_expand(Family::Knn).size(), 12u);
  EXPECT_EQ(expand(default_grid(Family::LogReg)).skipped.size(), 6u);
  EXPECT_EQ(expand(default_grid(Family::DTree)).skipped.size(), 18u);
}

TEST(Grid, EnumerationIsValidUniqueAndStable) {
  for (auto f : kAllFamilies) {
    const auto a = grid_expand(f);
    EXPECT_EQ(a, grid_expand(f));
    std::set<std::string> seen;
    for (const auto& c : a) {
      EXPECT_EQ(c.family, f);
      EXPECT_NO_THROW(validate(c));
      EXPECT_TRUE(seen.insert(to_json(c).dump()).second) << describe(c);
    }
  }
  // logreg: l1 never paired with lbfgs
  for (const auto& c : grid_expand(Family::LogReg)) {
    EXPECT_FALSE(c.penalty == Penalty::L1 && c.solver == Solver::Lbfgs);
  }
}

TEST(Grid, OverrideReplacesAxesAndAcceptsExplicitLists) {
  const auto specs = parse_grid_override(nlohmann::json::parse(R"({
    "knn": {"weights": ["uniform"], "n_neighbors": [1, 3], "metric": "manhattan"},
    "dtree": [{"max_depth": 2}, {"max_depth": 4, "criterion": "entropy"}]
  })"));
  std::vector<ModelConfig> knns, trees;
  for (const auto& s : specs) {
    const auto e = expand(s).configs;
    auto& into = s.family == Family::Knn ? knns : trees;
    into.insert(into.end(), e.begin(), e.end());
  }
  ASSERT_EQ(knns.size(), 2u);
  EXPECT_EQ(knns[0].n_neighbors, 1);
  EXPECT_EQ(knns[1].n_neighbors, 3);
  EXPECT_EQ(knns[1].metric, DistanceMetric::Manhattan);
  ASSERT_EQ(trees.size(), 2u);
  EXPECT_EQ(trees[1].criterion, Criterion::Entropy);
  EXPECT_THROW(parse_grid_override(nlohmann::json::parse(R"({"knn": {"colour": [1]}})")), ConfigError);
}

TEST(Search, SingleConfigIsTheBest) {
  Pcg32 rng(2);
  const auto x = noisy_problem(rng, 60, 3);
  const auto plan = stratified_kfold(x.labels(), 5, 1);
  const auto g = grid_search(x, {dtree(2)}, plan, {});
  EXPECT_EQ(g.best_index, 0u);
  EXPECT_EQ(g.best_config(), dtree(2));
}

TEST(Search, IdenticalMeansKeepTheFirstConfig) {
  Pcg32 rng(3);
  const auto x = noisy_problem(rng, 60, 3);
  const auto plan = stratified_kfold(x.labels(), 5, 1);
  // explicit defaults: the same model twice under different spellings
  auto a = knn(5);
  auto b = with_defaults(knn(5));
  ASSERT_NE(a, b);
  const auto g = grid_search(x, {a, b}, plan, {});
  EXPECT_EQ(g.results[0].metric(MetricId::F1).mean, g.results[1].metric(MetricId::F1).mean);
  EXPECT_EQ(g.best_index, 0u);
  const auto g2 = grid_search(x, {b, a}, plan, {});
  EXPECT_EQ(g2.best_config(), b);
}

TEST(Search, MeansAreRecomputedPerFold) {
  Pcg32 rng(4);
  const auto x = noisy_problem(rng, 80, 4);
  const auto plan = stratified_kfold(x.labels(), 4, 9);
  const std::vector<ModelConfig> configs = {dtree(1), dtree(3), knn(1), knn(7)};
  const auto g = grid_search(x, configs, plan, {});
  for (std::size_t c = 0; c < configs.size(); ++c) {
    double f1_sum = 0, acc_sum = 0;
    std::vector<double> f1s;
    for (int f = 0; f < plan.k; ++f) {
      const auto tr = plan.training_rows(f);
      const auto va = plan.validation_rows(f);
      const auto model = train(configs[c], x.select_rows(tr), derive_seed(0, "fold-train", f));
      const auto pred = predict(model, x.select_rows(va));
      double tp = 0, fp = 0, fn = 0, ok = 0;
      for (std::size_t i = 0; i < va.size(); ++i) {
        const int t = x.labels()[va[i]];
        tp += (t == 1 && pred[i] == 1);
        fp += (t == 0 && pred[i] == 1);
        fn += (t == 1 && pred[i] == 0);
        ok += (t == pred[i]);
      }
      const double f1 = 2 * tp + fp + fn > 0 ? 2 * tp / (2 * tp + fp + fn) : 0.0;
      f1s.push_back(f1);
      f1_sum += f1;
      acc_sum += ok / double(va.size());
    }
    const auto& r = g.results[c];
    ASSERT_FALSE(r.failed);
    EXPECT_NEAR(r.metric(MetricId::F1).mean, f1_sum / plan.k, 1e-12);
    EXPECT_NEAR(r.metric(MetricId::Accuracy).mean, acc_sum / plan.k, 1e-12);
    ASSERT_EQ(r.metric(MetricId::F1).per_fold.size(), f1s.size());
    double var = 0;
    for (double v : f1s) var += (v - f1_sum / plan.k) * (v - f1_sum / plan.k);
    EXPECT_NEAR(r.metric(MetricId::F1).std, std::sqrt(var / plan.k), 1e-12);
  }
  // argmax over means
  std::size_t best = 0;
  for (std::size_t c = 1; c < configs.size(); ++c) {
    if (g.results[c].metric(MetricId::F1).mean > g.results[best].metric(MetricId::F1).mean) best = c;
  }
  EXPECT_EQ(g.best_index, best);
}

TEST(Search, FailedConfigsAreRecordedAndSkipped) {
  Pcg32 rng(5);
  const auto x = noisy_problem(rng, 40, 2);
  const auto plan = stratified_kfold(x.labels(), 5, 1);
  const auto g = grid_search(x, {knn(0), dtree(2)}, plan, {});
  EXPECT_TRUE(g.results[0].failed);
  EXPECT_FALSE(g.results[0].error.empty());
  EXPECT_EQ(g.best_index, 1u);
  EXPECT_THROW(grid_search(x, {knn(0), knn(-2)}, plan, {}), SearchError);
}

TEST(Search, ParallelRunMatchesSerialRun) {
  Pcg32 rng(6);
  const auto x = noisy_problem(rng, 70, 3);
  const auto plan = stratified_kfold(x.labels(), 5, 7);
  auto configs = grid_expand(Family::Knn);
  const auto more = grid_expand(Family::LogReg);
  configs.insert(configs.end(), more.begin(), more.begin() + 4);
  SearchOptions serial;
  serial.smote_per_fold = SmoteConfig{3, 11};
  SearchOptions parallel = serial;
  parallel.jobs = 3;
  EXPECT_EQ(to_json(grid_search(x, configs, plan, serial)).dump(), to_json(grid_search(x, configs, plan, parallel)).dump());
}

TEST(Search, AucSelectionUsesAuc) {
  Pcg32 rng(7);
  const auto x = noisy_problem(rng, 60, 3);
  const auto plan = stratified_kfold(x.labels(), 5, 7);
  SearchOptions o;
  o.select = MetricId::Auc;
  const auto g = grid_search(x, {dtree(1), knn(9)}, plan, o);
  const auto& r = g.results;
  EXPECT_EQ(g.best_index, r[1].metric(MetricId::Auc).mean > r[0].metric(MetricId::Auc).mean ? 1u : 0u);
  EXPECT_EQ(parse_select_metric("auc"), MetricId::Auc);
  EXPECT_THROW(parse_select_metric("recall"), ConfigError);
}
