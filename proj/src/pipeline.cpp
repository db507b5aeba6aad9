#include "buggin/pipeline.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <map>
#include <sstream>

#include "buggin/error.hpp"
#include "buggin/io.hpp"
#include "buggin/random.hpp"
#include "buggin/smote.hpp"

namespace buggin {

namespace fs = std::filesystem;

namespace {

std::vector<ModelConfig> configs_for(Family family, const std::vector<GridSpec>& overrides,
                                     std::vector<std::string>& skipped) {
  std::vector<ModelConfig> out;
  bool overridden = false;
  for (const auto& spec : overrides) {
    if (spec.family != family) continue;
    overridden = true;
    auto e = expand(spec);
    out.insert(out.end(), e.configs.begin(), e.configs.end());
    skipped.insert(skipped.end(), e.skipped.begin(), e.skipped.end());
  }
  if (!overridden) {
    auto e = expand(default_grid(family));
    out = std::move(e.configs);
    skipped = std::move(e.skipped);
  }
  if (out.empty()) throw ConfigError("grid for " + std::string(family_name(family)) + " has no valid config");
  return out;
}

std::vector<GridSpec> load_overrides(const RunConfig& c) {
  if (!c.grid_override) return {};
  try {
    return parse_grid_override(nlohmann::json::parse(read_file(*c.grid_override)));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("grid override " + c.grid_override->string() + ": " + e.what());
  }
}

Preprocessor make_preprocessor(const RunConfig& c) {
  const fs::path dir = c.fixture_dir ? *c.fixture_dir : default_fixture_dir();
  return c.projects_file ? Preprocessor::from_fixtures(dir, *c.projects_file) : Preprocessor::from_fixtures(dir);
}

std::optional<fs::path> cache_dir(const RunConfig& c) {
  if (c.cache_dir) return c.cache_dir;
  if (const char* env = std::getenv("BUGGIN_CACHE"); env && *env) return fs::path(env);
  return std::nullopt;
}

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

nlohmann::json split_json(const SplitPlan& s) {
  return {{"train", s.train_indices}, {"test", s.test_indices}, {"ratio", s.ratio}, {"seed", s.seed}};
}

}  // namespace

std::string_view to_string(EmbeddingKind k) { return k == EmbeddingKind::Tfidf ? "tfidf" : "dense"; }
std::string_view to_string(FitScope s) { return s == FitScope::Full ? "full" : "train"; }

EmbeddingKind parse_embedding_kind(std::string_view s) {
  if (s == "tfidf") return EmbeddingKind::Tfidf;
  if (s == "dense") return EmbeddingKind::Dense;
  throw ConfigError("embedding must be tfidf or dense, got '" + std::string(s) + "'");
}

FitScope parse_fit_scope(std::string_view s) {
  if (s == "full") return FitScope::Full;
  if (s == "train") return FitScope::Train;
  throw ConfigError("fit scope must be full or train, got '" + std::string(s) + "'");
}

void validate_run_config(const RunConfig& c) {
  auto need_file = [](const fs::path& p, const char* what) {
    if (!fs::is_regular_file(p)) throw ConfigError(std::string(what) + " not found: " + p.string());
  };
  need_file(c.corpus, "corpus");
  if (c.embedding == EmbeddingKind::Dense) {
    if (!c.manifest) throw ConfigError("embedding dense requires --manifest");
    need_file(*c.manifest, "embedding manifest");
  } else if (c.manifest) {
    throw ConfigError("--manifest only applies to embedding dense");
  }
  if (c.projects_file) need_file(*c.projects_file, "projects file");
  if (c.grid_override) need_file(*c.grid_override, "grid override");
  if (c.fixture_dir && !fs::is_directory(*c.fixture_dir)) {
    throw ConfigError("fixture directory not found: " + c.fixture_dir->string());
  }
  if (c.families.empty()) throw ConfigError("no model family selected");
  if (c.folds < 2) throw ConfigError("folds must be >= 2");
  if (c.smote_k < 1) throw ConfigError("smote k must be >= 1");
  if (!(c.holdout_ratio > 0.0 && c.holdout_ratio < 1.0)) throw ConfigError("holdout ratio must be in (0, 1)");
  if (c.jobs < 0) throw ConfigError("jobs must be >= 0");
  if (c.smote_per_fold && !c.smote) throw ConfigError("per-fold oversampling needs oversampling enabled");
  load_overrides(c);
}

nlohmann::json run_config_echo(const RunConfig& c) {
  nlohmann::json j;
  j["corpus"] = c.corpus.string();
  j["format"] = c.format ? (*c.format == CorpusFormat::Csv ? "csv" : "jsonl") : "auto";
  j["text_field"] = text_field_name(c.text_field);
  j["embedding"] = to_string(c.embedding);
  j["manifest"] = c.manifest ? nlohmann::json(c.manifest->string()) : nlohmann::json(nullptr);
  auto& fams = j["families"] = nlohmann::json::array();
  for (auto f : c.families) fams.push_back(family_name(f));
  j["folds"] = c.folds;
  j["seed"] = c.seed;
  j["smote"] = c.smote;
  j["smote_k"] = c.smote_k;
  j["smote_per_fold"] = c.smote_per_fold;
  j["fit_scope"] = to_string(c.fit_scope);
  j["select_metric"] = metric_name(c.select);
  j["holdout_ratio"] = c.holdout_ratio;
  j["projects_file"] = c.projects_file ? nlohmann::json(c.projects_file->string()) : nlohmann::json(nullptr);
  j["grid_override"] = c.grid_override ? nlohmann::json(c.grid_override->string()) : nlohmann::json(nullptr);
  return j;
}

Corpus load_stage(const RunConfig& c) {
  return load_corpus(c.corpus, c.format ? *c.format : guess_corpus_format(c.corpus));
}

std::vector<Document> preprocess_stage(const RunConfig& c, const Corpus& corpus) {
  const Preprocessor prep = make_preprocessor(c);
  const auto dir = cache_dir(c);
  fs::path cached;
  if (dir) {
    const auto key = sha256_hex(corpus.fingerprint() + "\n" + std::string(text_field_name(c.text_field)) + "\n" +
                                prep.fingerprint());
    cached = *dir / ("preprocess-" + key + ".jsonl");
    if (fs::is_regular_file(cached)) {
      try {
        auto docs = load_documents(cached);
        if (docs.size() == corpus.size()) return docs;
      } catch (const Error&) {
        // stale or damaged entry; recompute below
      }
    }
  }
  std::vector<Document> docs;
  docs.reserve(corpus.size());
  for (const auto& r : corpus.reports()) docs.push_back(prep(r, c.text_field));
  if (dir) save_documents(docs, cached);
  return docs;
}

Features embed_stage(const RunConfig& c, const Corpus& corpus, const std::vector<Document>& docs) {
  if (docs.size() != corpus.size()) throw DimensionError("one document per corpus record required");
  Features f;
  f.split = stratified_holdout(corpus, c.holdout_ratio, c.seed);
  const auto labels = corpus.encoded_labels();
  if (c.embedding == EmbeddingKind::Tfidf) {
    std::vector<Document> fit_docs;
    if (c.fit_scope == FitScope::Full) {
      fit_docs = docs;
    } else {
      for (auto i : f.split.train_indices) fit_docs.push_back(docs[i]);
    }
    const auto model = TfidfModel::fit(fit_docs);
    f.matrix = assemble_matrix(model, docs, labels);
    f.embedding = "tfidf";
  } else {
    const auto table = import_dense(*c.manifest);
    std::vector<std::string> ids;
    for (const auto& r : corpus.reports()) ids.push_back(r.bug_id);
    f.matrix = assemble_matrix(table, ids, labels);
    f.embedding = "dense:" + table.model_name;
  }
  return f;
}

void search_stage(const RunConfig& c, const Features& features, SearchOutcome& out) {
  const auto overrides = load_overrides(c);
  const FeatureMatrix train_m = features.matrix.select_rows(features.split.train_indices);
  const SmoteConfig sc{c.smote_k, derive_seed(c.seed, "smote")};
  const FeatureMatrix refit_m = c.smote ? smote(train_m, sc) : train_m;
  const FeatureMatrix& search_m = c.smote_per_fold ? train_m : refit_m;
  out.n_train = train_m.n_rows();
  out.n_train_balanced = refit_m.n_rows();

  const FoldPlan plan = stratified_kfold(search_m.labels(), c.folds, derive_seed(c.seed, "kfold"));
  SearchOptions opt;
  opt.select = c.select;
  opt.jobs = c.jobs;
  opt.seed = derive_seed(c.seed, "search");
  if (c.smote_per_fold) opt.smote_per_fold = sc;

  for (auto family : c.families) {
    FamilyReport fr;
    fr.family = family;
    const auto configs = configs_for(family, overrides, fr.skipped_configs);
    fr.grid = grid_search(search_m, configs, plan, opt);
    out.models.push_back(train(fr.grid.best_config(), refit_m, derive_seed(c.seed, "refit")));
    out.families.push_back(std::move(fr));
  }
}

void evaluate_stage(const Features& features, const std::vector<TrainedModel>& models,
                    std::vector<FamilyReport>& families) {
  if (models.size() != families.size()) throw DimensionError("one model per family required");
  const FeatureMatrix test = features.matrix.select_rows(features.split.test_indices);
  for (std::size_t k = 0; k < models.size(); ++k) {
    if (models[k].family() != families[k].family) throw ConfigError("model and family order differ");
    const auto scores = decision_scores(models[k], test);
    const auto pred = predict(models[k], test);
    auto& fr = families[k];
    fr.predictions.clear();
    for (std::size_t i = 0; i < test.n_rows(); ++i) {
      fr.predictions.push_back({test.row_ids()[i], test.labels()[i], scores[i], pred[i]});
    }
    fr.holdout = holdout_metrics(fr.predictions);
  }
}

EvalReport run_experiment(const RunConfig& config) {
  const auto t0 = std::chrono::steady_clock::now();
  EvalReport report;
  report.run_config = run_config_echo(config);
  report.text_field = text_field_name(config.text_field);
  report.evaluation_note =
      "holdout metrics: best cross-validated config refit on the whole training split" +
      std::string(config.smote ? " after oversampling" : "") + ", scored on the untouched test split";
  report.runtime["started_at"] = utc_now();
  report.runtime["out"] = config.out.string();
  report.runtime["jobs"] = config.jobs;
  auto& stage_seconds = report.runtime["stage_seconds"];

  SearchOutcome search;
  auto quarantine = [&](const std::string& stage, const std::string& what) {
    const fs::path q = config.out / "quarantine";
    try {
      nlohmann::json err = {{"stage", stage}, {"error", what}, {"run_config", report.run_config}};
      write_file_atomic(q / "error.json", err.dump(2) + "\n");
      EvalReport partial = report;
      partial.families = search.families;
      write_file_atomic(q / "report.partial.json", to_json(partial).dump(2) + "\n");
      for (const auto& m : search.models) {
        write_file_atomic(q / "models" / (std::string(family_name(m.family())) + ".json"), to_json(m).dump() + "\n");
      }
    } catch (const std::exception&) {
      // best effort; the original error matters more
    }
  };
  auto stage = [&](const std::string& name, auto&& fn) {
    const auto s0 = std::chrono::steady_clock::now();
    try {
      fn();
    } catch (const std::exception& e) {
      quarantine(name, e.what());
      throw StageError(name, e.what());
    }
    stage_seconds[name] = std::chrono::duration<double>(std::chrono::steady_clock::now() - s0).count();
  };

  stage("validate", [&] { validate_run_config(config); });
  Corpus corpus;
  stage("load", [&] { corpus = load_stage(config); });
  report.corpus_fingerprint = corpus.fingerprint();
  std::vector<Document> docs;
  stage("preprocess", [&] { docs = preprocess_stage(config, corpus); });
  Features features;
  stage("embed", [&] { features = embed_stage(config, corpus, docs); });
  report.embedding = features.embedding;
  report.n_features = features.matrix.n_cols();
  report.n_test = features.split.test_indices.size();
  stage("search", [&] { search_stage(config, features, search); });
  report.n_train = search.n_train;
  report.n_train_balanced = search.n_train_balanced;
  stage("evaluate", [&] { evaluate_stage(features, search.models, search.families); });
  report.families = search.families;
  report.runtime["wall_clock_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  stage("write", [&] {
    write_report_files(report, config.out);
    for (const auto& m : search.models) {
      write_file_atomic(config.out / "models" / (std::string(family_name(m.family())) + ".json"),
                        to_json(m).dump() + "\n");
    }
  });
  return report;
}

void save_documents(const std::vector<Document>& docs, const fs::path& path) {
  std::string out;
  for (const auto& d : docs) {
    nlohmann::json j = {{"bug_id", d.bug_id}, {"field", text_field_name(d.source_field)}, {"tokens", d.tokens}};
    out += j.dump() + "\n";
  }
  write_file_atomic(path, out);
}

std::vector<Document> load_documents(const fs::path& path) {
  const std::string text = read_file(path);
  std::vector<Document> docs;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      Document d;
      d.bug_id = j.at("bug_id").get<std::string>();
      d.source_field = parse_text_field(j.at("field").get<std::string>());
      d.tokens = j.at("tokens").get<std::vector<std::string>>();
      docs.push_back(std::move(d));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return docs;
}

nlohmann::json features_to_json(const Features& f) {
  return {{"schema", "buggin.features/1"},
          {"embedding", f.embedding},
          {"split", split_json(f.split)},
          {"matrix", f.matrix.to_json()}};
}

Features features_from_json(const nlohmann::json& j) {
  try {
    if (j.at("schema").get<std::string>() != "buggin.features/1") throw FormatError("unsupported features schema");
    Features f;
    f.embedding = j.at("embedding").get<std::string>();
    const auto& s = j.at("split");
    f.split.train_indices = s.at("train").get<std::vector<std::size_t>>();
    f.split.test_indices = s.at("test").get<std::vector<std::size_t>>();
    f.split.ratio = s.at("ratio").get<double>();
    f.split.seed = s.at("seed").get<std::uint64_t>();
    f.matrix = FeatureMatrix::from_json(j.at("matrix"));
    for (auto i : f.split.train_indices) {
      if (i >= f.matrix.n_rows()) throw FormatError("split index out of range");
    }
    for (auto i : f.split.test_indices) {
      if (i >= f.matrix.n_rows()) throw FormatError("split index out of range");
    }
    return f;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed features file: ") + e.what());
  }
}

nlohmann::json search_to_json(const SearchOutcome& s) {
  nlohmann::json j;
  j["schema"] = "buggin.search/1";
  j["n_train"] = s.n_train;
  j["n_train_balanced"] = s.n_train_balanced;
  auto& fams = j["families"] = nlohmann::json::array();
  for (const auto& f : s.families) {
    fams.push_back({{"family", family_name(f.family)}, {"grid", to_json(f.grid)}, {"skipped_configs", f.skipped_configs}});
  }
  return j;
}

SearchOutcome search_from_json(const nlohmann::json& j) {
  try {
    if (j.at("schema").get<std::string>() != "buggin.search/1") throw FormatError("unsupported search schema");
    SearchOutcome s;
    s.n_train = j.at("n_train").get<std::size_t>();
    s.n_train_balanced = j.at("n_train_balanced").get<std::size_t>();
    for (const auto& e : j.at("families")) {
      FamilyReport f;
      f.family = parse_family(e.at("family").get<std::string>());
      f.grid = grid_result_from_json(e.at("grid"), f.family);
      f.skipped_configs = e.at("skipped_configs").get<std::vector<std::string>>();
      s.families.push_back(std::move(f));
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed search file: ") + e.what());
  }
}

}  // namespace buggin
