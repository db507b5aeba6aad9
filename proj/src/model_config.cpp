#include "buggin/model_config.hpp"

#include <sstream>

#include "buggin/error.hpp"

namespace buggin {

namespace {

template <typename E, std::size_t N>
E parse_enum(std::string_view s, const std::array<std::pair<std::string_view, E>, N>& table,
             std::string_view what) {
  for (const auto& [name, value] : table) {
    if (name == s) return value;
  }
  throw ConfigError("unknown " + std::string(what) + " '" + std::string(s) + "'");
}

constexpr std::array<std::pair<std::string_view, Kernel>, 5> kKernels = {
    {{"linear", Kernel::Linear}, {"poly", Kernel::Poly}, {"polynomial", Kernel::Poly},
     {"rbf", Kernel::Rbf}, {"sigmoid", Kernel::Sigmoid}}};
constexpr std::array<std::pair<std::string_view, GammaMode>, 2> kGammas = {
    {{"auto", GammaMode::Auto}, {"scale", GammaMode::Scale}}};
constexpr std::array<std::pair<std::string_view, ClassWeightMode>, 3> kWeights = {
    {{"balanced", ClassWeightMode::Balanced},
     {"0.6/0.4", ClassWeightMode::Intrinsic60},
     {"0.4/0.6", ClassWeightMode::Intrinsic40}}};
constexpr std::array<std::pair<std::string_view, Penalty>, 2> kPenalties = {
    {{"l1", Penalty::L1}, {"l2", Penalty::L2}}};
constexpr std::array<std::pair<std::string_view, Solver>, 3> kSolvers = {
    {{"coordinate_descent", Solver::CoordinateDescent},
     {"liblinear", Solver::CoordinateDescent},
     {"lbfgs", Solver::Lbfgs}}};
constexpr std::array<std::pair<std::string_view, Criterion>, 2> kCriteria = {
    {{"gini", Criterion::Gini}, {"entropy", Criterion::Entropy}}};
constexpr std::array<std::pair<std::string_view, DistanceMetric>, 2> kMetrics = {
    {{"euclidean", DistanceMetric::Euclidean}, {"manhattan", DistanceMetric::Manhattan}}};
constexpr std::array<std::pair<std::string_view, NeighborWeights>, 2> kNeighborWeights = {
    {{"uniform", NeighborWeights::Uniform}, {"distance", NeighborWeights::Distance}}};
constexpr std::array<std::pair<std::string_view, MaxFeatures>, 2> kMaxFeatures = {
    {{"sqrt", MaxFeatures::Sqrt}, {"all", MaxFeatures::All}}};

bool allowed(Family f, std::string_view field) {
  auto in = [&](std::initializer_list<std::string_view> fields) {
    for (auto x : fields) {
      if (x == field) return true;
    }
    return false;
  };
  switch (f) {
    case Family::Svm:
      return in({"kernel", "gamma", "poly_degree", "coef0", "class_weight", "C"});
    case Family::LogReg:
      return in({"class_weight", "C", "penalty", "solver"});
    case Family::DTree:
      return in({"criterion", "max_depth", "min_samples_leaf", "min_samples_split"});
    case Family::RForest:
      return in({"criterion", "max_depth", "min_samples_leaf", "min_samples_split", "n_estimators", "bootstrap",
                 "max_features"});
    case Family::Knn:
      return in({"n_neighbors", "metric", "weights"});
  }
  return false;
}

// (field name, is set) for every optional field, in declaration order.
std::vector<std::pair<std::string_view, bool>> set_fields(const ModelConfig& c) {
  return {{"kernel", c.kernel.has_value()},
          {"gamma", c.gamma_mode.has_value()},
          {"poly_degree", c.poly_degree.has_value()},
          {"coef0", c.coef0.has_value()},
          {"class_weight", c.class_weight.has_value()},
          {"C", c.C.has_value()},
          {"penalty", c.penalty.has_value()},
          {"solver", c.solver.has_value()},
          {"criterion", c.criterion.has_value()},
          {"max_depth", c.max_depth.has_value()},
          {"min_samples_leaf", c.min_samples_leaf.has_value()},
          {"min_samples_split", c.min_samples_split.has_value()},
          {"n_estimators", c.n_estimators.has_value()},
          {"bootstrap", c.bootstrap.has_value()},
          {"max_features", c.max_features.has_value()},
          {"n_neighbors", c.n_neighbors.has_value()},
          {"metric", c.metric.has_value()},
          {"weights", c.weights.has_value()}};
}

std::string fmt_double(double v) {
  std::ostringstream ss;
  ss << v;
  return ss.str();
}

}  // namespace

std::string_view family_name(Family f) {
  switch (f) {
    case Family::Svm: return "svm";
    case Family::LogReg: return "logreg";
    case Family::DTree: return "dtree";
    case Family::RForest: return "rforest";
    case Family::Knn: return "knn";
  }
  return "?";
}

std::string_view family_display_name(Family f) {
  switch (f) {
    case Family::Svm: return "Support Vector Machine";
    case Family::LogReg: return "Logistic Regression";
    case Family::DTree: return "Decision Tree";
    case Family::RForest: return "Random Forest";
    case Family::Knn: return "K-Nearest Neighbors";
  }
  return "?";
}

Family parse_family(std::string_view s) {
  static constexpr std::array<std::pair<std::string_view, Family>, 8> kFamilies = {
      {{"svm", Family::Svm}, {"logreg", Family::LogReg}, {"lr", Family::LogReg}, {"dtree", Family::DTree},
       {"dt", Family::DTree}, {"rforest", Family::RForest}, {"rf", Family::RForest}, {"knn", Family::Knn}}};
  return parse_enum(s, kFamilies, "model family");
}

std::string_view to_string(Kernel v) {
  switch (v) {
    case Kernel::Linear: return "linear";
    case Kernel::Poly: return "poly";
    case Kernel::Rbf: return "rbf";
    case Kernel::Sigmoid: return "sigmoid";
  }
  return "?";
}
std::string_view to_string(GammaMode v) { return v == GammaMode::Auto ? "auto" : "scale"; }
std::string_view to_string(ClassWeightMode v) {
  switch (v) {
    case ClassWeightMode::Balanced: return "balanced";
    case ClassWeightMode::Intrinsic60: return "0.6/0.4";
    case ClassWeightMode::Intrinsic40: return "0.4/0.6";
  }
  return "?";
}
std::string_view to_string(Penalty v) { return v == Penalty::L1 ? "l1" : "l2"; }
std::string_view to_string(Solver v) { return v == Solver::CoordinateDescent ? "coordinate_descent" : "lbfgs"; }
std::string_view to_string(Criterion v) { return v == Criterion::Gini ? "gini" : "entropy"; }
std::string_view to_string(DistanceMetric v) { return v == DistanceMetric::Euclidean ? "euclidean" : "manhattan"; }
std::string_view to_string(NeighborWeights v) { return v == NeighborWeights::Uniform ? "uniform" : "distance"; }
std::string_view to_string(MaxFeatures v) { return v == MaxFeatures::Sqrt ? "sqrt" : "all"; }

void validate(const ModelConfig& c) {
  for (const auto& [field, is_set] : set_fields(c)) {
    if (is_set && !allowed(c.family, field)) {
      throw ConfigError("field '" + std::string(field) + "' does not apply to family " +
                        std::string(family_name(c.family)));
    }
  }
  if (c.C && !(*c.C > 0.0)) throw ConfigError("C must be positive");
  if (c.penalty == Penalty::L1 && c.solver && *c.solver != Solver::CoordinateDescent) {
    throw ConfigError("penalty l1 requires solver coordinate_descent");
  }
  if (c.min_samples_split && *c.min_samples_split < 2) throw ConfigError("min_samples_split must be >= 2");
  if (c.min_samples_leaf && *c.min_samples_leaf < 1) throw ConfigError("min_samples_leaf must be >= 1");
  if (c.max_depth && *c.max_depth < 1) throw ConfigError("max_depth must be >= 1");
  if (c.n_estimators && *c.n_estimators < 1) throw ConfigError("n_estimators must be >= 1");
  if (c.n_neighbors && *c.n_neighbors < 1) throw ConfigError("n_neighbors must be >= 1");
  if (c.poly_degree && *c.poly_degree < 1) throw ConfigError("poly_degree must be >= 1");
}

ModelConfig with_defaults(ModelConfig c) {
  switch (c.family) {
    case Family::Svm:
      if (!c.kernel) c.kernel = Kernel::Rbf;
      if (!c.gamma_mode) c.gamma_mode = GammaMode::Scale;
      if (!c.poly_degree) c.poly_degree = 3;
      if (!c.coef0) c.coef0 = 0.0;
      if (!c.C) c.C = 1.0;
      break;
    case Family::LogReg:
      if (!c.C) c.C = 1.0;
      if (!c.penalty) c.penalty = Penalty::L2;
      if (!c.solver) c.solver = *c.penalty == Penalty::L1 ? Solver::CoordinateDescent : Solver::Lbfgs;
      break;
    case Family::RForest:
      if (!c.n_estimators) c.n_estimators = 100;
      if (!c.bootstrap) c.bootstrap = true;
      if (!c.max_features) c.max_features = MaxFeatures::Sqrt;
      [[fallthrough]];
    case Family::DTree:
      if (!c.criterion) c.criterion = Criterion::Gini;
      if (!c.min_samples_leaf) c.min_samples_leaf = 1;
      if (!c.min_samples_split) c.min_samples_split = 2;
      break;
    case Family::Knn:
      if (!c.n_neighbors) c.n_neighbors = 5;
      if (!c.metric) c.metric = DistanceMetric::Euclidean;
      if (!c.weights) c.weights = NeighborWeights::Uniform;
      break;
  }
  return c;
}

nlohmann::json to_json(const ModelConfig& c) {
  nlohmann::json j;
  j["family"] = family_name(c.family);
  if (c.kernel) j["kernel"] = to_string(*c.kernel);
  if (c.gamma_mode) j["gamma"] = to_string(*c.gamma_mode);
  if (c.poly_degree) j["poly_degree"] = *c.poly_degree;
  if (c.coef0) j["coef0"] = *c.coef0;
  if (c.class_weight) j["class_weight"] = to_string(*c.class_weight);
  if (c.C) j["C"] = *c.C;
  if (c.penalty) j["penalty"] = to_string(*c.penalty);
  if (c.solver) j["solver"] = to_string(*c.solver);
  if (c.criterion) j["criterion"] = to_string(*c.criterion);
  if (c.max_depth) j["max_depth"] = *c.max_depth;
  if (c.min_samples_leaf) j["min_samples_leaf"] = *c.min_samples_leaf;
  if (c.min_samples_split) j["min_samples_split"] = *c.min_samples_split;
  if (c.n_estimators) j["n_estimators"] = *c.n_estimators;
  if (c.bootstrap) j["bootstrap"] = *c.bootstrap;
  if (c.max_features) j["max_features"] = to_string(*c.max_features);
  if (c.n_neighbors) j["n_neighbors"] = *c.n_neighbors;
  if (c.metric) j["metric"] = to_string(*c.metric);
  if (c.weights) j["weights"] = to_string(*c.weights);
  return j;
}

ModelConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("model config must be a JSON object");
  ModelConfig c;
  try {
    c.family = parse_family(j.at("family").get<std::string>());
    for (const auto& [key, value] : j.items()) {
      if (key == "family") continue;
      auto str = [&] { return value.get<std::string>(); };
      if (key == "kernel") c.kernel = parse_enum(str(), kKernels, "kernel");
      else if (key == "gamma") c.gamma_mode = parse_enum(str(), kGammas, "gamma mode");
      else if (key == "poly_degree") c.poly_degree = value.get<int>();
      else if (key == "coef0") c.coef0 = value.get<double>();
      else if (key == "class_weight") c.class_weight = parse_enum(str(), kWeights, "class weight");
      else if (key == "C") c.C = value.get<double>();
      else if (key == "penalty") c.penalty = parse_enum(str(), kPenalties, "penalty");
      else if (key == "solver") c.solver = parse_enum(str(), kSolvers, "solver");
      else if (key == "criterion") c.criterion = parse_enum(str(), kCriteria, "criterion");
      else if (key == "max_depth") c.max_depth = value.get<int>();
      else if (key == "min_samples_leaf") c.min_samples_leaf = value.get<int>();
      else if (key == "min_samples_split") c.min_samples_split = value.get<int>();
      else if (key == "n_estimators") c.n_estimators = value.get<int>();
      else if (key == "bootstrap") c.bootstrap = value.get<bool>();
      else if (key == "max_features") c.max_features = parse_enum(str(), kMaxFeatures, "max_features");
      else if (key == "n_neighbors") c.n_neighbors = value.get<int>();
      else if (key == "metric") c.metric = parse_enum(str(), kMetrics, "metric");
      else if (key == "weights") c.weights = parse_enum(str(), kNeighborWeights, "weights");
      else throw ConfigError("unknown config field '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed model config: ") + e.what());
  }
  validate(c);
  return c;
}

std::string describe(const ModelConfig& c) {
  std::string out;
  auto add = [&](std::string_view k, const std::string& v) {
    if (!out.empty()) out.push_back(' ');
    out += std::string(k) + "=" + v;
  };
  if (c.kernel) add("kernel", std::string(to_string(*c.kernel)));
  if (c.gamma_mode) add("gamma", std::string(to_string(*c.gamma_mode)));
  if (c.C) add("C", fmt_double(*c.C));
  if (c.class_weight) add("class_weight", std::string(to_string(*c.class_weight)));
  if (c.penalty) add("penalty", std::string(to_string(*c.penalty)));
  if (c.solver) add("solver", std::string(to_string(*c.solver)));
  if (c.criterion) add("criterion", std::string(to_string(*c.criterion)));
  if (c.max_depth) add("max_depth", std::to_string(*c.max_depth));
  if (c.min_samples_leaf) add("min_samples_leaf", std::to_string(*c.min_samples_leaf));
  if (c.min_samples_split) add("min_samples_split", std::to_string(*c.min_samples_split));
  if (c.n_estimators) add("n_estimators", std::to_string(*c.n_estimators));
  if (c.bootstrap) add("bootstrap", *c.bootstrap ? "true" : "false");
  if (c.max_features) add("max_features", std::string(to_string(*c.max_features)));
  if (c.metric) add("metric", std::string(to_string(*c.metric)));
  if (c.n_neighbors) add("n_neighbors", std::to_string(*c.n_neighbors));
  if (c.weights) add("weights", std::string(to_string(*c.weights)));
  if (c.poly_degree && c.kernel == Kernel::Poly) add("degree", std::to_string(*c.poly_degree));
  return out;
}

std::array<double, 2> class_weights(std::optional<ClassWeightMode> mode, std::span<const int> labels) {
  std::size_t n1 = 0;
  for (int y : labels) n1 += y != 0;
  const std::size_t n0 = labels.size() - n1;
  if (n0 == 0 || n1 == 0) throw WeightError("class weights need both classes present");
  if (!mode) return {1.0, 1.0};
  switch (*mode) {
    case ClassWeightMode::Balanced: {
      const double n = static_cast<double>(labels.size());
      return {n / (2.0 * static_cast<double>(n0)), n / (2.0 * static_cast<double>(n1))};
    }
    case ClassWeightMode::Intrinsic60:
      return {0.4, 0.6};
    case ClassWeightMode::Intrinsic40:
      return {0.6, 0.4};
  }
  return {1.0, 1.0};
}

}  // namespace buggin
