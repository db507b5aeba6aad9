#include "buggin/tuning.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <mutex>
#include <thread>

#include "buggin/error.hpp"
#include "buggin/metrics.hpp"
#include "buggin/random.hpp"

namespace buggin {

namespace {

// Declaration order of ModelConfig, used to order override axes.
constexpr std::array<std::string_view, 18> kFieldOrder = {
    "kernel",    "gamma",           "poly_degree",       "coef0",        "class_weight", "C",
    "penalty",   "solver",          "criterion",         "max_depth",    "min_samples_leaf",
    "min_samples_split", "n_estimators", "bootstrap",    "max_features", "n_neighbors",  "metric", "weights"};

nlohmann::json list(std::initializer_list<nlohmann::json> v) { return nlohmann::json::array_t(v); }

MetricSummary summarize(std::vector<double> values, int degenerate) {
  MetricSummary s;
  s.per_fold = std::move(values);
  s.degenerate_folds = degenerate;
  if (s.per_fold.empty()) return s;
  double sum = 0.0;
  for (double v : s.per_fold) sum += v;
  s.mean = sum / static_cast<double>(s.per_fold.size());
  double ss = 0.0;
  for (double v : s.per_fold) ss += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(ss / static_cast<double>(s.per_fold.size()));
  return s;
}

}  // namespace

std::vector<std::size_t> FoldPlan::validation_rows(int fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold_of.size(); ++i) {
    if (fold_of[i] == fold) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> FoldPlan::training_rows(int fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold_of.size(); ++i) {
    if (fold_of[i] != fold) out.push_back(i);
  }
  return out;
}

FoldPlan stratified_kfold(const std::vector<int>& labels, int k, std::uint64_t seed) {
  if (k < 2) throw ConfigError("number of folds must be >= 2, got " + std::to_string(k));
  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.fold_of.assign(labels.size(), -1);
  if (labels.size() < static_cast<std::size_t>(k)) {
    throw StratificationError(std::to_string(labels.size()) + " rows cannot fill " + std::to_string(k) + " folds");
  }
  std::size_t counter = 0;
  for (int c = 0; c <= 1; ++c) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if ((labels[i] != 0 ? 1 : 0) == c) idx.push_back(i);
    }
    if (idx.empty()) throw StratificationError("class " + std::to_string(c) + " has no rows");
    Pcg32 rng(derive_seed(seed, "kfold", static_cast<std::uint64_t>(c)));
    shuffle(std::span<std::size_t>(idx), rng);
    for (auto i : idx) plan.fold_of[i] = static_cast<int>(counter++ % static_cast<std::size_t>(k));
  }
  return plan;
}

GridSpec default_grid(Family family) {
  GridSpec g;
  g.family = family;
  const auto weights = list({"balanced", "0.6/0.4", "0.4/0.6"});
  const auto one_to_three = list({1, 2, 3});
  switch (family) {
    case Family::Svm:
      g.axes = {{"kernel", list({"linear", "poly", "rbf", "sigmoid"})},
                {"class_weight", weights},
                {"gamma", list({"auto", "scale"})}};
      break;
    case Family::LogReg:
      g.axes = {{"C", list({1.0, 0.1})},
                {"class_weight", weights},
                {"penalty", list({"l1", "l2"})},
                {"solver", list({"coordinate_descent", "lbfgs"})}};
      break;
    case Family::DTree:
      g.axes = {{"criterion", list({"gini", "entropy"})},
                {"max_depth", one_to_three},
                {"min_samples_leaf", one_to_three},
                {"min_samples_split", one_to_three}};
      break;
    case Family::RForest:
      g.fixed = {{"criterion", "gini"}, {"n_estimators", 100}};
      g.axes = {{"max_depth", one_to_three}, {"min_samples_leaf", one_to_three}, {"min_samples_split", one_to_three}};
      break;
    case Family::Knn:
      g.axes = {{"metric", list({"euclidean", "manhattan"})},
                {"n_neighbors", one_to_three},
                {"weights", list({"uniform", "distance"})}};
      break;
  }
  return g;
}

GridExpansion expand(const GridSpec& spec) {
  GridExpansion out;
  nlohmann::json base = spec.fixed.is_null() ? nlohmann::json::object() : spec.fixed;
  base["family"] = family_name(spec.family);
  std::function<void(std::size_t, nlohmann::json&)> rec = [&](std::size_t a, nlohmann::json& cur) {
    if (a == spec.axes.size()) {
      try {
        out.configs.push_back(config_from_json(cur));
      } catch (const ConfigError& e) {
        out.skipped.push_back(cur.dump() + ": " + e.what());
      }
      return;
    }
    const auto& axis = spec.axes[a];
    if (!axis.values.is_array() || axis.values.empty()) {
      throw ConfigError("grid axis '" + axis.field + "' needs a nonempty list of values");
    }
    for (const auto& v : axis.values) {
      cur[axis.field] = v;
      rec(a + 1, cur);
    }
    cur.erase(axis.field);
  };
  rec(0, base);
  return out;
}

std::vector<ModelConfig> grid_expand(Family family) { return expand(default_grid(family)).configs; }

std::vector<GridSpec> parse_grid_override(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("grid override must be a JSON object keyed by family");
  std::vector<GridSpec> out;
  for (const auto& [name, body] : j.items()) {
    GridSpec g;
    g.family = parse_family(name);
    if (body.is_array()) {
      // explicit list: one axis-free spec per config
      for (const auto& cfg : body) {
        if (!cfg.is_object()) throw ConfigError("grid override for " + name + ": entries must be objects");
        GridSpec one;
        one.family = g.family;
        one.fixed = cfg;
        one.fixed.erase("family");
        out.push_back(one);
      }
      continue;
    }
    if (!body.is_object()) throw ConfigError("grid override for " + name + " must be an object or a list");
    for (const auto& [field, _] : body.items()) {
      if (std::find(kFieldOrder.begin(), kFieldOrder.end(), field) == kFieldOrder.end()) {
        throw ConfigError("grid override for " + name + ": unknown field '" + field + "'");
      }
    }
    for (auto field : kFieldOrder) {
      const std::string key(field);
      if (!body.contains(key)) continue;
      const auto& v = body.at(key);
      if (v.is_array()) {
        g.axes.push_back({key, v});
      } else {
        g.fixed[key] = v;
      }
    }
    out.push_back(g);
  }
  return out;
}

std::string_view metric_name(MetricId m) {
  switch (m) {
    case MetricId::Precision: return "precision";
    case MetricId::Recall: return "recall";
    case MetricId::F1: return "f1";
    case MetricId::Accuracy: return "accuracy";
    case MetricId::Auc: return "auc";
  }
  return "?";
}

MetricId parse_select_metric(std::string_view s) {
  if (s == "f1") return MetricId::F1;
  if (s == "auc") return MetricId::Auc;
  throw ConfigError("selection metric must be f1 or auc, got '" + std::string(s) + "'");
}

ConfigResult evaluate_config(const FeatureMatrix& matrix, const ModelConfig& config, const FoldPlan& plan,
                             const SearchOptions& options) {
  if (plan.fold_of.size() != matrix.n_rows()) {
    throw DimensionError("fold plan covers " + std::to_string(plan.fold_of.size()) + " rows, matrix has " +
                         std::to_string(matrix.n_rows()));
  }
  ConfigResult r;
  r.config = config;
  std::array<std::vector<double>, 5> values;
  std::array<int, 5> degenerate{};
  try {
    for (int f = 0; f < plan.k; ++f) {
      const auto tr = plan.training_rows(f);
      const auto va = plan.validation_rows(f);
      FeatureMatrix train_m = matrix.select_rows(tr);
      if (options.smote_per_fold) {
        SmoteConfig sc = *options.smote_per_fold;
        sc.seed = derive_seed(sc.seed, "smote-fold", static_cast<std::uint64_t>(f));
        train_m = smote(train_m, sc);
      }
      const FeatureMatrix val_m = matrix.select_rows(va);
      const auto model = train(config, train_m, derive_seed(options.seed, "fold-train", static_cast<std::uint64_t>(f)));
      const auto pred = predict(model, val_m);
      const auto scores = decision_scores(model, val_m);
      const auto c = confusion(val_m.labels(), pred);
      const std::array<MetricValue, 4> mv = {precision(c), recall(c), f1(c), accuracy(c)};
      for (std::size_t m = 0; m < 4; ++m) {
        values[m].push_back(mv[m].value);
        degenerate[m] += mv[m].degenerate ? 1 : 0;
      }
      values[4].push_back(auc_roc(val_m.labels(), scores));
    }
  } catch (const Error& e) {
    r.failed = true;
    r.error = e.what();
    return r;
  }
  for (std::size_t m = 0; m < 5; ++m) r.metrics[m] = summarize(std::move(values[m]), degenerate[m]);
  return r;
}

GridResult grid_search(const FeatureMatrix& matrix, const std::vector<ModelConfig>& configs, const FoldPlan& plan,
                       const SearchOptions& options) {
  if (configs.empty()) throw SearchError("empty grid");
  GridResult out;
  out.family = configs.front().family;
  out.select = options.select;
  out.results.resize(configs.size());

  unsigned jobs = options.jobs > 0 ? static_cast<unsigned>(options.jobs) : std::thread::hardware_concurrency();
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(configs.size())));
  std::atomic<std::size_t> next{0};
  std::exception_ptr fatal;
  std::mutex fatal_mu;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= configs.size()) return;
      try {
        out.results[i] = evaluate_config(matrix, configs[i], plan, options);
      } catch (...) {
        std::lock_guard<std::mutex> lock(fatal_mu);
        if (!fatal) fatal = std::current_exception();
      }
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (fatal) std::rethrow_exception(fatal);

  bool found = false;
  double best = 0.0;
  for (std::size_t i = 0; i < out.results.size(); ++i) {
    const auto& r = out.results[i];
    if (r.failed) continue;
    const double v = r.metric(options.select).mean;
    if (!found || v > best) {
      best = v;
      out.best_index = i;
      found = true;
    }
  }
  if (!found) {
    throw SearchError("all " + std::to_string(configs.size()) + " " + std::string(family_name(out.family)) +
                      " configs failed; first error: " + out.results.front().error);
  }
  return out;
}

}  // namespace buggin
