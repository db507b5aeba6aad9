#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include <json.hpp>

#include "buggin/kernels.hpp"
#include "buggin/knn.hpp"
#include "buggin/matrix.hpp"
#include "buggin/model_config.hpp"
#include "buggin/tree.hpp"

namespace buggin {

struct SvmModel {
  KernelSpec kernel;
  FeatureMatrix support_vectors;
  std::vector<double> dual_coef;  // alpha_i * y_i, y in {-1, +1}
  double bias = 0.0;
  double kkt_residual = 0.0;
  long iterations = 0;
};

struct LogregModel {
  std::vector<double> w;
  double b = 0.0;
  int iterations = 0;
};

struct TreeModel {
  DecisionTree tree;
};

struct ForestModel {
  RandomForest forest;
};

struct KnnModel {
  FeatureMatrix train;
};

using ModelParams = std::variant<SvmModel, LogregModel, TreeModel, ForestModel, KnnModel>;

struct TrainedModel {
  ModelConfig config;  // with defaults filled in
  std::size_t n_features = 0;
  std::uint64_t seed = 0;
  ModelParams params;

  Family family() const { return config.family; }
};

// Per-sample loss weights from the class-weight mode, rescaled so they sum
// to n. Scaling both class weights by a constant therefore changes nothing.
std::vector<double> sample_weights(const ModelConfig& config, std::span<const int> labels);
// Same rescaling for explicit (w0, w1).
std::vector<double> normalized_sample_weights(std::array<double, 2> class_w, std::span<const int> labels);

// Throws TrainingError unless each class has >= 2 rows, ConfigError on an
// invalid config and ConvergenceError when a solver gives up.
TrainedModel train(const ModelConfig& config, const FeatureMatrix& matrix, std::uint64_t seed = 0);

// svm: signed margin; logreg: sigmoid(w.x + b); trees: Intrinsic leaf
// fraction (forest: mean over trees); knn: weighted Intrinsic neighbour
// fraction. Throws DimensionError when the width differs from training.
std::vector<double> decision_scores(const TrainedModel& model, const FeatureMatrix& matrix);
// Margins: >= 0 is Intrinsic. Other scores: >= 0.5. knn: ties at exactly
// 0.5 go to the nearest neighbour's label.
std::vector<int> predict(const TrainedModel& model, const FeatureMatrix& matrix);

inline constexpr const char* kModelSchema = "buggin.model/1";

nlohmann::json to_json(const TrainedModel& model);
TrainedModel model_from_json(const nlohmann::json& j);

}  // namespace buggin
