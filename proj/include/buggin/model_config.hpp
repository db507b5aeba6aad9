#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include <json.hpp>

namespace buggin {

enum class Family { Svm, LogReg, DTree, RForest, Knn };
enum class Kernel { Linear, Poly, Rbf, Sigmoid };
enum class GammaMode { Auto, Scale };
// Named by the Intrinsic weight: Intrinsic60 means Intrinsic 0.6 /
// NonIntrinsic 0.4.
enum class ClassWeightMode { Balanced, Intrinsic60, Intrinsic40 };
enum class Penalty { L1, L2 };
enum class Solver { CoordinateDescent, Lbfgs };
enum class Criterion { Gini, Entropy };
enum class DistanceMetric { Euclidean, Manhattan };
enum class NeighborWeights { Uniform, Distance };
enum class MaxFeatures { Sqrt, All };

inline constexpr std::array<Family, 5> kAllFamilies = {Family::Svm, Family::LogReg, Family::DTree,
                                                       Family::RForest, Family::Knn};

std::string_view family_name(Family f);
// Accepts svm, logreg/lr, dtree/dt, rforest/rf, knn.
Family parse_family(std::string_view s);
std::string_view family_display_name(Family f);

std::string_view to_string(Kernel v);
std::string_view to_string(GammaMode v);
std::string_view to_string(ClassWeightMode v);
std::string_view to_string(Penalty v);
std::string_view to_string(Solver v);
std::string_view to_string(Criterion v);
std::string_view to_string(DistanceMetric v);
std::string_view to_string(NeighborWeights v);
std::string_view to_string(MaxFeatures v);

// One hyperparameter assignment. Only fields relevant to `family` may be
// set; validate() enforces this.
struct ModelConfig {
  Family family = Family::Svm;

  // svm
  std::optional<Kernel> kernel;
  std::optional<GammaMode> gamma_mode;
  std::optional<int> poly_degree;
  std::optional<double> coef0;
  // svm, logreg
  std::optional<ClassWeightMode> class_weight;
  std::optional<double> C;
  // logreg
  std::optional<Penalty> penalty;
  std::optional<Solver> solver;
  // dtree, rforest
  std::optional<Criterion> criterion;
  std::optional<int> max_depth;
  std::optional<int> min_samples_leaf;
  std::optional<int> min_samples_split;
  // rforest
  std::optional<int> n_estimators;
  std::optional<bool> bootstrap;
  std::optional<MaxFeatures> max_features;
  // knn
  std::optional<int> n_neighbors;
  std::optional<DistanceMetric> metric;
  std::optional<NeighborWeights> weights;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// Throws ConfigError naming the offending field.
void validate(const ModelConfig& config);

// Fills every unset field relevant to the family with its default.
ModelConfig with_defaults(ModelConfig config);

nlohmann::json to_json(const ModelConfig& config);
ModelConfig config_from_json(const nlohmann::json& j);

// Short human-readable rendering, e.g. "kernel=poly gamma=auto class_weight=0.6/0.4".
std::string describe(const ModelConfig& config);

// (w0, w1) for (NonIntrinsic, Intrinsic). Balanced: n / (2 n_c). Unset
// mode yields (1, 1). Throws WeightError when a class is absent.
std::array<double, 2> class_weights(std::optional<ClassWeightMode> mode, std::span<const int> labels);

}  // namespace buggin
