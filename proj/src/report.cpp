#include "buggin/report.hpp"

#include <charconv>
#include <map>
#include <sstream>

#include "buggin/csv.hpp"
#include "buggin/error.hpp"
#include "buggin/io.hpp"
#include "buggin/metrics.hpp"

namespace buggin {

namespace {

std::string shortest(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

nlohmann::json summary_json(const MetricSummary& s) {
  return {{"mean", s.mean}, {"std", s.std}, {"per_fold", s.per_fold}, {"degenerate_folds", s.degenerate_folds}};
}

MetricSummary summary_from(const nlohmann::json& j) {
  MetricSummary s;
  s.mean = j.at("mean").get<double>();
  s.std = j.at("std").get<double>();
  s.per_fold = j.at("per_fold").get<std::vector<double>>();
  s.degenerate_folds = j.at("degenerate_folds").get<int>();
  return s;
}

}  // namespace

nlohmann::json to_json(const GridResult& g) {
  nlohmann::json j;
  j["select_metric"] = metric_name(g.select);
  j["best_index"] = g.best_index;
  auto& rs = j["results"] = nlohmann::json::array();
  for (const auto& r : g.results) {
    nlohmann::json e;
    e["config"] = to_json(r.config);
    e["failed"] = r.failed;
    if (r.failed) {
      e["error"] = r.error;
    } else {
      for (auto m : kAllMetrics) e["metrics"][std::string(metric_name(m))] = summary_json(r.metric(m));
    }
    rs.push_back(std::move(e));
  }
  return j;
}

GridResult grid_result_from_json(const nlohmann::json& j, Family family) {
  GridResult g;
  g.family = family;
  const auto sel = j.at("select_metric").get<std::string>();
  g.select = parse_select_metric(sel);
  g.best_index = j.at("best_index").get<std::size_t>();
  for (const auto& e : j.at("results")) {
    ConfigResult r;
    r.config = config_from_json(e.at("config"));
    r.failed = e.at("failed").get<bool>();
    if (r.failed) {
      r.error = e.at("error").get<std::string>();
    } else {
      for (auto m : kAllMetrics) {
        r.metrics[static_cast<std::size_t>(m)] = summary_from(e.at("metrics").at(std::string(metric_name(m))));
      }
    }
    g.results.push_back(std::move(r));
  }
  if (!g.results.empty() && g.best_index >= g.results.size()) throw FormatError("best_index out of range");
  return g;
}

HoldoutMetrics holdout_metrics(const std::vector<Prediction>& predictions) {
  std::vector<int> yt, yp;
  std::vector<double> sc;
  for (const auto& p : predictions) {
    yt.push_back(p.y_true);
    yp.push_back(p.y_pred);
    sc.push_back(p.score);
  }
  HoldoutMetrics h;
  const auto c = confusion(yt, yp);
  const std::array<MetricValue, 4> mv = {precision(c), recall(c), f1(c), accuracy(c)};
  for (std::size_t m = 0; m < 4; ++m) {
    h.values[m] = mv[m].value;
    h.degenerate[m] = mv[m].degenerate;
  }
  try {
    h.values[4] = auc_roc(yt, sc);
  } catch (const UndefinedMetricError&) {
    h.values[4] = 0.0;
    h.degenerate[4] = true;
  }
  return h;
}

nlohmann::json canonical_json(const EvalReport& r) {
  nlohmann::json j;
  j["schema"] = kReportSchema;
  j["tool_version"] = r.tool_version;
  j["run_config"] = r.run_config;
  j["corpus_fingerprint"] = r.corpus_fingerprint;
  j["text_field"] = r.text_field;
  j["embedding"] = r.embedding;
  j["n_train"] = r.n_train;
  j["n_train_balanced"] = r.n_train_balanced;
  j["n_test"] = r.n_test;
  j["n_features"] = r.n_features;
  j["evaluation_note"] = r.evaluation_note;
  auto& fams = j["families"] = nlohmann::json::array();
  for (const auto& f : r.families) {
    nlohmann::json e;
    e["family"] = family_name(f.family);
    e["best_config"] = to_json(f.grid.best_config());
    e["grid"] = to_json(f.grid);
    e["skipped_configs"] = f.skipped_configs;
    for (auto m : kAllMetrics) {
      const auto k = static_cast<std::size_t>(m);
      e["holdout"][std::string(metric_name(m))] = {{"value", f.holdout.values[k]},
                                                   {"degenerate", f.holdout.degenerate[k]}};
    }
    auto& preds = e["predictions"] = nlohmann::json::array();
    for (const auto& p : f.predictions) preds.push_back({p.bug_id, p.y_true, p.score, p.y_pred});
    fams.push_back(std::move(e));
  }
  return j;
}

nlohmann::json to_json(const EvalReport& r) {
  auto j = canonical_json(r);
  j["runtime"] = r.runtime;
  return j;
}

EvalReport report_from_json(const nlohmann::json& j) {
  try {
    if (j.at("schema").get<std::string>() != kReportSchema) {
      throw FormatError("unsupported report schema '" + j.at("schema").get<std::string>() + "'");
    }
    EvalReport r;
    r.tool_version = j.at("tool_version").get<std::string>();
    r.run_config = j.at("run_config");
    r.corpus_fingerprint = j.at("corpus_fingerprint").get<std::string>();
    r.text_field = j.at("text_field").get<std::string>();
    r.embedding = j.at("embedding").get<std::string>();
    r.n_train = j.at("n_train").get<std::size_t>();
    r.n_train_balanced = j.at("n_train_balanced").get<std::size_t>();
    r.n_test = j.at("n_test").get<std::size_t>();
    r.n_features = j.at("n_features").get<std::size_t>();
    r.evaluation_note = j.at("evaluation_note").get<std::string>();
    for (const auto& e : j.at("families")) {
      FamilyReport f;
      f.family = parse_family(e.at("family").get<std::string>());
      f.grid = grid_result_from_json(e.at("grid"), f.family);
      f.skipped_configs = e.at("skipped_configs").get<std::vector<std::string>>();
      for (auto m : kAllMetrics) {
        const auto& h = e.at("holdout").at(std::string(metric_name(m)));
        const auto k = static_cast<std::size_t>(m);
        f.holdout.values[k] = h.at("value").get<double>();
        f.holdout.degenerate[k] = h.at("degenerate").get<bool>();
      }
      for (const auto& p : e.at("predictions")) {
        f.predictions.push_back(
            {p.at(0).get<std::string>(), p.at(1).get<int>(), p.at(2).get<double>(), p.at(3).get<int>()});
      }
      r.families.push_back(std::move(f));
    }
    if (j.contains("runtime")) r.runtime = j.at("runtime");
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed report: ") + e.what());
  }
}

std::string format_percent(double value) {
  char buf[128];
  const auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::fixed);
  std::string s(buf, res.ptr);
  bool neg = false;
  if (!s.empty() && s[0] == '-') {
    neg = true;
    s.erase(0, 1);
  }
  const auto dot = s.find('.');
  std::string ip = dot == std::string::npos ? s : s.substr(0, dot);
  std::string fp = dot == std::string::npos ? "" : s.substr(dot + 1);
  while (fp.size() < 3) fp.push_back('0');
  // percent: move the point two places right; keep one more digit
  std::string digits = ip + fp.substr(0, 3);  // integer part of (percent * 10)
  const std::string rest = fp.substr(3);
  bool up = false;
  if (!rest.empty() && rest[0] > '5') {
    up = true;
  } else if (!rest.empty() && rest[0] == '5') {
    const bool tail = rest.find_first_not_of('0', 1) != std::string::npos;
    up = tail || ((digits.back() - '0') % 2 == 1);
  }
  unsigned long long tenths = std::stoull(digits) + (up ? 1 : 0);
  std::string out = std::to_string(tenths / 10) + "." + std::to_string(tenths % 10);
  if (neg && tenths != 0) out.insert(out.begin(), '-');
  return out;
}

std::string render_markdown(const std::vector<EvalReport>& reports) {
  std::map<std::pair<std::string, std::string>, std::vector<const EvalReport*>> groups;
  std::vector<std::pair<std::string, std::string>> order;
  for (const auto& r : reports) {
    const auto key = std::make_pair(r.text_field, r.embedding);
    if (!groups.count(key)) order.push_back(key);
    groups[key].push_back(&r);
  }
  std::ostringstream md;
  bool any_degenerate = false;
  for (const auto& key : order) {
    std::string field = key.first;
    if (!field.empty()) field[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(field[0])));
    md << "## " << field << " / " << key.second << "\n\n";
    md << "| Model | Precision | Recall | F1 | AUC-ROC |\n";
    md << "|---|---:|---:|---:|---:|\n";
    for (const auto* r : groups[key]) {
      for (const auto& f : r->families) {
        md << "| " << family_display_name(f.family);
        for (auto m : {MetricId::Precision, MetricId::Recall, MetricId::F1, MetricId::Auc}) {
          const auto k = static_cast<std::size_t>(m);
          md << " | " << format_percent(f.holdout.values[k]) << "%";
          if (f.holdout.degenerate[k]) {
            md << "*";
            any_degenerate = true;
          }
        }
        md << " |\n";
      }
    }
    md << "\nSelected configurations (cross-validated mean "
       << (groups[key].front()->families.empty() ? "f1"
                                                 : std::string(metric_name(groups[key].front()->families[0].grid.select)))
       << "):\n\n";
    for (const auto* r : groups[key]) {
      for (const auto& f : r->families) {
        const auto& best = f.grid.results[f.grid.best_index];
        md << "- " << family_display_name(f.family) << ": " << describe(best.config) << " ("
           << format_percent(best.metric(f.grid.select).mean) << "% +/- " << format_percent(best.metric(f.grid.select).std)
           << "%)\n";
      }
    }
    md << "\n";
  }
  if (any_degenerate) md << "\\* zero denominator; reported as 0.\n";
  return md.str();
}

std::string predictions_csv(const EvalReport& report) {
  std::string out = csv::format_row({"bug_id", "family", "y_true", "score", "y_pred"});
  for (const auto& f : report.families) {
    for (const auto& p : f.predictions) {
      out += csv::format_row({p.bug_id, std::string(family_name(f.family)), std::to_string(p.y_true),
                              shortest(p.score), std::to_string(p.y_pred)});
    }
  }
  return out;
}

void write_report_files(const EvalReport& report, const std::filesystem::path& dir) {
  write_file_atomic(dir / "report.json", to_json(report).dump(2) + "\n");
  write_file_atomic(dir / "report.md", render_markdown({report}));
  write_file_atomic(dir / "predictions.csv", predictions_csv(report));
}

}  // namespace buggin
