#include "buggin/learners.hpp"

#include <numeric>

#include "buggin/error.hpp"
#include "buggin/logreg.hpp"
#include "buggin/svm.hpp"

namespace buggin {

namespace {

void check_training_set(const FeatureMatrix& m) {
  std::size_t pos = 0;
  for (int y : m.labels()) pos += y != 0 ? 1 : 0;
  const std::size_t neg = m.n_rows() - pos;
  if (pos < 2 || neg < 2) {
    throw TrainingError("training needs at least 2 rows per class, got " + std::to_string(neg) + " NonIntrinsic / " +
                        std::to_string(pos) + " Intrinsic");
  }
}

void check_width(const TrainedModel& model, const FeatureMatrix& m) {
  if (m.n_rows() > 0 && m.n_cols() != model.n_features) {
    throw DimensionError("model expects " + std::to_string(model.n_features) + " features, matrix has " +
                         std::to_string(m.n_cols()));
  }
}

TreeOptions tree_options(const ModelConfig& c) {
  TreeOptions o;
  o.criterion = *c.criterion;
  o.max_depth = c.max_depth;
  o.min_samples_leaf = *c.min_samples_leaf;
  o.min_samples_split = *c.min_samples_split;
  return o;
}

KnnOptions knn_options(const ModelConfig& c) {
  return {*c.n_neighbors, *c.metric, *c.weights};
}

}  // namespace

std::vector<double> sample_weights(const ModelConfig& config, std::span<const int> labels) {
  return normalized_sample_weights(class_weights(config.class_weight, labels), labels);
}

std::vector<double> normalized_sample_weights(std::array<double, 2> cw, std::span<const int> labels) {
  if (!(cw[0] > 0) || !(cw[1] > 0)) throw WeightError("class weights must be positive");
  std::vector<double> s(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) s[i] = cw[labels[i] != 0 ? 1 : 0];
  const double total = std::accumulate(s.begin(), s.end(), 0.0);
  if (!(total > 0)) throw WeightError("class weights sum to zero");
  const double scale = static_cast<double>(labels.size()) / total;
  for (double& v : s) v *= scale;
  return s;
}

TrainedModel train(const ModelConfig& config, const FeatureMatrix& matrix, std::uint64_t seed) {
  validate(config);
  const ModelConfig c = with_defaults(config);
  check_training_set(matrix);
  TrainedModel model;
  model.config = c;
  model.n_features = matrix.n_cols();
  model.seed = seed;

  switch (c.family) {
    case Family::Svm: {
      KernelSpec k;
      k.kind = *c.kernel;
      k.gamma = resolve_gamma(*c.gamma_mode, matrix);
      k.degree = *c.poly_degree;
      k.coef0 = *c.coef0;
      auto s = sample_weights(c, matrix.labels());
      for (double& v : s) v *= *c.C;
      const auto sol = solve_svm_dual(matrix, s, k);
      SvmModel m;
      m.kernel = k;
      m.bias = sol.bias;
      m.kkt_residual = sol.kkt_residual;
      m.iterations = sol.iterations;
      std::vector<std::size_t> sv;
      for (std::size_t i = 0; i < sol.alpha.size(); ++i) {
        if (sol.alpha[i] > 0) {
          sv.push_back(i);
          m.dual_coef.push_back(sol.alpha[i] * sol.y[i]);
        }
      }
      m.support_vectors = matrix.select_rows(sv);
      model.params = std::move(m);
      break;
    }
    case Family::LogReg: {
      const auto s = sample_weights(c, matrix.labels());
      LogregProblem p{&matrix, s, *c.C, *c.penalty};
      LogregOptions o;
      o.solver = *c.solver;
      auto fit = fit_logreg(p, o);
      model.params = LogregModel{std::move(fit.w), fit.b, fit.iterations};
      break;
    }
    case Family::DTree: {
      const std::vector<double> w(matrix.n_rows(), 1.0);
      model.params = TreeModel{fit_tree(matrix, w, tree_options(c))};
      break;
    }
    case Family::RForest: {
      ForestOptions o;
      o.tree = tree_options(c);
      o.n_estimators = *c.n_estimators;
      o.bootstrap = *c.bootstrap;
      o.max_features = *c.max_features;
      o.seed = seed;
      model.params = ForestModel{fit_forest(matrix, o)};
      break;
    }
    case Family::Knn:
      if (*c.n_neighbors < 1) throw ConfigError("n_neighbors must be >= 1");
      model.params = KnnModel{matrix};
      break;
  }
  return model;
}

std::vector<double> decision_scores(const TrainedModel& model, const FeatureMatrix& matrix) {
  check_width(model, matrix);
  const std::size_t n = matrix.n_rows();
  std::vector<double> out(n);
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        for (std::size_t i = 0; i < n; ++i) {
          const RowView x = matrix.row(i);
          if constexpr (std::is_same_v<T, SvmModel>) {
            double f = m.bias;
            for (std::size_t s = 0; s < m.dual_coef.size(); ++s) {
              f += m.dual_coef[s] * kernel_eval(m.kernel, m.support_vectors.row(s), x);
            }
            out[i] = f;
          } else if constexpr (std::is_same_v<T, LogregModel>) {
            out[i] = sigmoid(dot(x, RowView{{}, m.w, true}) + m.b);
          } else if constexpr (std::is_same_v<T, TreeModel>) {
            out[i] = m.tree.score(x);
          } else if constexpr (std::is_same_v<T, ForestModel>) {
            out[i] = m.forest.score(x);
          } else {
            out[i] = knn_vote(m.train, x, knn_options(model.config)).score;
          }
        }
      },
      model.params);
  return out;
}

std::vector<int> predict(const TrainedModel& model, const FeatureMatrix& matrix) {
  check_width(model, matrix);
  std::vector<int> out(matrix.n_rows());
  if (const auto* k = std::get_if<KnnModel>(&model.params)) {
    const auto opt = knn_options(model.config);
    for (std::size_t i = 0; i < matrix.n_rows(); ++i) out[i] = knn_vote(k->train, matrix.row(i), opt).label();
    return out;
  }
  const auto s = decision_scores(model, matrix);
  const double threshold = model.family() == Family::Svm ? 0.0 : 0.5;
  for (std::size_t i = 0; i < s.size(); ++i) out[i] = s[i] >= threshold ? 1 : 0;
  return out;
}

nlohmann::json to_json(const TrainedModel& model) {
  nlohmann::json j;
  j["schema"] = kModelSchema;
  j["family"] = family_name(model.family());
  j["config"] = to_json(model.config);
  j["n_features"] = model.n_features;
  j["seed"] = model.seed;
  auto& p = j["parameters"];
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, SvmModel>) {
          p["kernel"] = to_string(m.kernel.kind);
          p["gamma"] = m.kernel.gamma;
          p["degree"] = m.kernel.degree;
          p["coef0"] = m.kernel.coef0;
          p["support_vectors"] = m.support_vectors.to_json();
          p["dual_coef"] = m.dual_coef;
          p["bias"] = m.bias;
          p["kkt_residual"] = m.kkt_residual;
          p["iterations"] = m.iterations;
        } else if constexpr (std::is_same_v<T, LogregModel>) {
          p["w"] = m.w;
          p["b"] = m.b;
          p["iterations"] = m.iterations;
        } else if constexpr (std::is_same_v<T, TreeModel>) {
          p["tree"] = to_json(m.tree);
        } else if constexpr (std::is_same_v<T, ForestModel>) {
          auto& trees = p["trees"] = nlohmann::json::array();
          for (const auto& t : m.forest.trees) trees.push_back(to_json(t));
          p["seeds"] = m.forest.seeds;
        } else {
          p["train"] = m.train.to_json();
        }
      },
      model.params);
  return j;
}

TrainedModel model_from_json(const nlohmann::json& j) {
  try {
    if (j.at("schema").get<std::string>() != kModelSchema) {
      throw FormatError("unsupported model schema '" + j.at("schema").get<std::string>() + "'");
    }
    TrainedModel m;
    m.config = with_defaults(config_from_json(j.at("config")));
    validate(m.config);
    m.n_features = j.at("n_features").get<std::size_t>();
    m.seed = j.at("seed").get<std::uint64_t>();
    const auto& p = j.at("parameters");
    switch (m.config.family) {
      case Family::Svm: {
        SvmModel s;
        s.kernel.kind = *m.config.kernel;
        s.kernel.gamma = p.at("gamma").get<double>();
        s.kernel.degree = p.at("degree").get<int>();
        s.kernel.coef0 = p.at("coef0").get<double>();
        s.support_vectors = FeatureMatrix::from_json(p.at("support_vectors"));
        s.dual_coef = p.at("dual_coef").get<std::vector<double>>();
        s.bias = p.at("bias").get<double>();
        s.kkt_residual = p.at("kkt_residual").get<double>();
        s.iterations = p.at("iterations").get<long>();
        if (s.dual_coef.size() != s.support_vectors.n_rows()) throw FormatError("svm: one coefficient per support vector");
        m.params = std::move(s);
        break;
      }
      case Family::LogReg: {
        LogregModel l{p.at("w").get<std::vector<double>>(), p.at("b").get<double>(), p.at("iterations").get<int>()};
        if (l.w.size() != m.n_features) throw FormatError("logreg: weight vector length differs from n_features");
        m.params = std::move(l);
        break;
      }
      case Family::DTree:
        m.params = TreeModel{tree_from_json(p.at("tree"))};
        break;
      case Family::RForest: {
        ForestModel f;
        for (const auto& t : p.at("trees")) f.forest.trees.push_back(tree_from_json(t));
        f.forest.seeds = p.at("seeds").get<std::vector<std::uint64_t>>();
        m.params = std::move(f);
        break;
      }
      case Family::Knn:
        m.params = KnnModel{FeatureMatrix::from_json(p.at("train"))};
        break;
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed model file: ") + e.what());
  }
}

}  // namespace buggin
