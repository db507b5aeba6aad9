#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "buggin/model_config.hpp"
#include "buggin/tuning.hpp"

namespace buggin {

inline constexpr const char* kReportSchema = "buggin.report/1";
inline constexpr const char* kToolVersion = "0.3.0";

struct Prediction {
  std::string bug_id;
  int y_true = 0;
  double score = 0.0;
  int y_pred = 0;
};

struct HoldoutMetrics {
  std::array<double, 5> values{};       // indexed by MetricId
  std::array<bool, 5> degenerate{};

  double get(MetricId m) const { return values[static_cast<std::size_t>(m)]; }
};

struct FamilyReport {
  Family family = Family::Svm;
  GridResult grid;
  std::vector<std::string> skipped_configs;
  HoldoutMetrics holdout;
  std::vector<Prediction> predictions;  // holdout rows, in corpus order
};

struct EvalReport {
  nlohmann::json run_config;  // echo of the run's settings, seed included
  std::string corpus_fingerprint;
  std::string text_field;
  std::string embedding;  // "tfidf" or "dense:<model_name>"
  std::size_t n_train = 0;
  std::size_t n_train_balanced = 0;  // after oversampling, when applied
  std::size_t n_test = 0;
  std::size_t n_features = 0;
  std::string evaluation_note;
  std::vector<FamilyReport> families;
  std::string tool_version = kToolVersion;
  // Wall-clock fields; left out of the determinism canon.
  nlohmann::json runtime = nlohmann::json::object();
};

// Holdout metrics from raw predictions. AUC is 0 and flagged degenerate when
// the holdout has one class only.
HoldoutMetrics holdout_metrics(const std::vector<Prediction>& predictions);

nlohmann::json to_json(const GridResult& grid);
GridResult grid_result_from_json(const nlohmann::json& j, Family family);

nlohmann::json to_json(const EvalReport& report);
EvalReport report_from_json(const nlohmann::json& j);
// to_json without the runtime block; the basis for run-to-run comparison.
nlohmann::json canonical_json(const EvalReport& report);

// Metric in [0, 1] as a percentage with one decimal, rounding the shortest
// decimal form of the value half-to-even: 0.6385 -> "63.8".
std::string format_percent(double value);

// One table per (text field, embedding) pair; one row per family with
// Precision / Recall / F1 / AUC-ROC, then the chosen configurations.
std::string render_markdown(const std::vector<EvalReport>& reports);

// bug_id,family,y_true,score,y_pred
std::string predictions_csv(const EvalReport& report);

// report.json, report.md and predictions.csv under `dir`, each written
// atomically.
void write_report_files(const EvalReport& report, const std::filesystem::path& dir);

}  // namespace buggin
