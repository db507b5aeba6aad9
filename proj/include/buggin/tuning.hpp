#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "buggin/learners.hpp"
#include "buggin/matrix.hpp"
#include "buggin/model_config.hpp"
#include "buggin/smote.hpp"

namespace buggin {

struct FoldPlan {
  int k = 5;
  std::vector<int> fold_of;  // row -> fold id in [0, k)
  std::uint64_t seed = 0;

  std::vector<std::size_t> validation_rows(int fold) const;
  std::vector<std::size_t> training_rows(int fold) const;
};

// Per class: seeded shuffle, then round-robin over folds. The fold counter
// carries over from one class to the next, so total fold sizes also differ
// by at most one. A class smaller than k leaves some folds without it.
// Throws ConfigError for k < 2 and StratificationError when a class is
// absent or there are fewer than k rows.
FoldPlan stratified_kfold(const std::vector<int>& labels, int k, std::uint64_t seed);

// One hyperparameter axis: field name and the values it takes.
struct GridAxis {
  std::string field;
  nlohmann::json values;  // array
};

struct GridSpec {
  Family family = Family::Svm;
  nlohmann::json fixed = nlohmann::json::object();  // fields shared by every config
  std::vector<GridAxis> axes;                       // first axis varies slowest
};

struct GridExpansion {
  std::vector<ModelConfig> configs;
  std::vector<std::string> skipped;  // invalid combinations, with the reason
};

// The built-in grid for a family.
GridSpec default_grid(Family family);
GridExpansion expand(const GridSpec& spec);
// expand(default_grid(family)).configs
std::vector<ModelConfig> grid_expand(Family family);

// {"<family>": {"<field>": [values...], ...}, ...}; axes follow the order in
// which fields are declared on ModelConfig. A family given as a list of
// config objects is used verbatim instead. Families not mentioned keep their
// default grid.
std::vector<GridSpec> parse_grid_override(const nlohmann::json& j);

enum class MetricId { Precision, Recall, F1, Accuracy, Auc };
inline constexpr std::array<MetricId, 5> kAllMetrics = {MetricId::Precision, MetricId::Recall, MetricId::F1,
                                                        MetricId::Accuracy, MetricId::Auc};
std::string_view metric_name(MetricId m);
MetricId parse_select_metric(std::string_view s);  // f1 | auc

struct MetricSummary {
  double mean = 0.0;
  double std = 0.0;  // population std over folds
  std::vector<double> per_fold;
  int degenerate_folds = 0;
};

struct ConfigResult {
  ModelConfig config;
  bool failed = false;
  std::string error;
  std::array<MetricSummary, 5> metrics{};  // indexed by MetricId

  const MetricSummary& metric(MetricId m) const { return metrics[static_cast<std::size_t>(m)]; }
};

struct SearchOptions {
  MetricId select = MetricId::F1;
  std::optional<SmoteConfig> smote_per_fold;  // oversample each training fold
  int jobs = 1;                               // 0: hardware concurrency
  std::uint64_t seed = 0;
};

struct GridResult {
  Family family = Family::Svm;
  MetricId select = MetricId::F1;
  std::vector<ConfigResult> results;  // enumeration order
  std::size_t best_index = 0;

  const ModelConfig& best_config() const { return results.at(best_index).config; }
};

// Train on k-1 folds, score the held-out fold, k times. Failures inside
// training or scoring are recorded on the result, not thrown.
ConfigResult evaluate_config(const FeatureMatrix& matrix, const ModelConfig& config, const FoldPlan& plan,
                             const SearchOptions& options);

// Best = strictly largest mean of the selection metric; earlier configs win
// ties. Throws SearchError when every config failed.
GridResult grid_search(const FeatureMatrix& matrix, const std::vector<ModelConfig>& configs, const FoldPlan& plan,
                       const SearchOptions& options);

}  // namespace buggin
