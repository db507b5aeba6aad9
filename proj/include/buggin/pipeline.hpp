#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "buggin/corpus.hpp"
#include "buggin/features.hpp"
#include "buggin/learners.hpp"
#include "buggin/report.hpp"
#include "buggin/textprep.hpp"
#include "buggin/tuning.hpp"

namespace buggin {

enum class EmbeddingKind { Tfidf, Dense };
// full: the vectorizer sees every document; train: only the training split.
enum class FitScope { Full, Train };

struct RunConfig {
  std::filesystem::path corpus;
  std::optional<CorpusFormat> format;  // unset: guessed from the extension
  TextField text_field = TextField::Title;
  EmbeddingKind embedding = EmbeddingKind::Tfidf;
  std::optional<std::filesystem::path> manifest;  // dense only
  std::vector<Family> families{kAllFamilies.begin(), kAllFamilies.end()};
  int folds = 5;
  std::uint64_t seed = 42;
  bool smote = true;
  int smote_k = 5;
  bool smote_per_fold = false;
  FitScope fit_scope = FitScope::Full;
  MetricId select = MetricId::F1;
  int jobs = 0;
  double holdout_ratio = 0.8;
  std::optional<std::filesystem::path> projects_file;
  std::optional<std::filesystem::path> grid_override;
  std::optional<std::filesystem::path> fixture_dir;  // unset: default_fixture_dir()
  std::optional<std::filesystem::path> cache_dir;    // unset: $BUGGIN_CACHE, if any
  std::filesystem::path out = "out";
};

// Checks every referenced file and numeric bound without touching the data.
// Throws ConfigError.
void validate_run_config(const RunConfig& config);

// Settings that influence results; paths are echoed as given.
nlohmann::json run_config_echo(const RunConfig& config);

std::string_view to_string(EmbeddingKind k);
std::string_view to_string(FitScope s);
EmbeddingKind parse_embedding_kind(std::string_view s);
FitScope parse_fit_scope(std::string_view s);

// ---- stages ----------------------------------------------------------------

Corpus load_stage(const RunConfig& config);

// Honours the preprocessing cache: documents are stored under a key built
// from the corpus fingerprint, the field and the preprocessor fingerprint.
std::vector<Document> preprocess_stage(const RunConfig& config, const Corpus& corpus);

struct Features {
  FeatureMatrix matrix;  // one row per corpus record, corpus order
  std::string embedding;  // "tfidf" or "dense:<model>"
  SplitPlan split;
};

Features embed_stage(const RunConfig& config, const Corpus& corpus, const std::vector<Document>& docs);

struct SearchOutcome {
  std::size_t n_train = 0;
  std::size_t n_train_balanced = 0;
  std::vector<FamilyReport> families;  // grid filled, holdout empty
  std::vector<TrainedModel> models;    // best config refit on the full training set
};

// Oversampling, per-family grid search and refit. Families are appended to
// `out` as they finish, so a failure leaves the completed ones in place.
void search_stage(const RunConfig& config, const Features& features, SearchOutcome& out);

// Fills holdout metrics and predictions from the refit models.
void evaluate_stage(const Features& features, const std::vector<TrainedModel>& models,
                    std::vector<FamilyReport>& families);

// Everything end to end; writes report.json, report.md, predictions.csv and
// models/<family>.json under config.out. A failing stage raises StageError
// after whatever was produced so far lands in config.out/quarantine.
EvalReport run_experiment(const RunConfig& config);

// ---- persisted stage outputs --------------------------------------------------

void save_documents(const std::vector<Document>& docs, const std::filesystem::path& path);
std::vector<Document> load_documents(const std::filesystem::path& path);

nlohmann::json features_to_json(const Features& f);
Features features_from_json(const nlohmann::json& j);

nlohmann::json search_to_json(const SearchOutcome& s);
// Models are read separately from their own files.
SearchOutcome search_from_json(const nlohmann::json& j);

}  // namespace buggin
