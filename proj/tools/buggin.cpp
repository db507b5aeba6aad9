// buggin: command-line front end.
#include <CLI11.hpp>

#include <iostream>

#include "buggin/corpus.hpp"
#include "buggin/error.hpp"
#include "buggin/features.hpp"
#include "buggin/io.hpp"
#include "buggin/pipeline.hpp"
#include "buggin/remote.hpp"
#include "buggin/report.hpp"
#include "buggin/synthetic.hpp"

namespace fs = std::filesystem;
using namespace buggin;

namespace {

struct RunFlags {
  std::string corpus;
  std::string format = "auto";
  std::string text_field = "title";
  std::string embedding = "tfidf";
  std::string manifest;
  std::vector<std::string> families{"all"};
  int folds = 5;
  std::uint64_t seed = 42;
  int smote_k = 5;
  bool no_smote = false;
  bool smote_per_fold = false;
  std::string fit_scope = "full";
  std::string select_metric = "f1";
  int jobs = 0;
  double holdout_ratio = 0.8;
  std::string projects_file;
  std::string grid_override;
  std::string fixtures;
  std::string out = "out";
};

void add_corpus_flags(CLI::App* app, RunFlags& f, bool required) {
  auto* o = app->add_option("--corpus", f.corpus, "labelled corpus (CSV or JSONL)");
  if (required) o->required();
  app->add_option("--format", f.format, "csv, jsonl or auto")->check(CLI::IsMember({"csv", "jsonl", "auto"}));
  app->add_option("--text-field", f.text_field, "title or description")
      ->check(CLI::IsMember({"title", "description"}));
  app->add_option("--projects-file", f.projects_file, "known project names, one per line");
  app->add_option("--fixtures", f.fixtures, "directory with stopwords/lemma/project fixtures");
}

void add_embed_flags(CLI::App* app, RunFlags& f) {
  app->add_option("--embedding", f.embedding, "tfidf or dense")->check(CLI::IsMember({"tfidf", "dense"}));
  app->add_option("--manifest", f.manifest, "dense embedding manifest");
  app->add_option("--fit-scope", f.fit_scope, "tfidf vocabulary from full corpus or training split")
      ->check(CLI::IsMember({"full", "train"}));
  app->add_option("--holdout-ratio", f.holdout_ratio, "training share of the stratified split");
  app->add_option("--seed", f.seed, "run seed");
}

void add_search_flags(CLI::App* app, RunFlags& f) {
  app->add_option("--family", f.families, "svm, lr, dt, rf, knn or all")->delimiter(',');
  app->add_option("--folds", f.folds, "cross-validation folds");
  app->add_option("--smote-k", f.smote_k, "SMOTE neighbours");
  app->add_flag("--no-smote", f.no_smote, "train without oversampling");
  app->add_flag("--smote-per-fold", f.smote_per_fold, "oversample inside each training fold instead");
  app->add_option("--select-metric", f.select_metric, "f1 or auc")->check(CLI::IsMember({"f1", "auc"}));
  app->add_option("--jobs", f.jobs, "parallel grid evaluations (0: all cores)");
  app->add_option("--grid-override", f.grid_override, "JSON grid replacement");
}

RunConfig to_run_config(const RunFlags& f) {
  RunConfig c;
  c.corpus = f.corpus;
  if (f.format != "auto") c.format = parse_corpus_format(f.format);
  c.text_field = parse_text_field(f.text_field);
  c.embedding = parse_embedding_kind(f.embedding);
  if (!f.manifest.empty()) c.manifest = f.manifest;
  c.families.clear();
  for (const auto& name : f.families) {
    if (name == "all") {
      c.families.assign(kAllFamilies.begin(), kAllFamilies.end());
      break;
    }
    const auto fam = parse_family(name);
    if (std::find(c.families.begin(), c.families.end(), fam) == c.families.end()) c.families.push_back(fam);
  }
  c.folds = f.folds;
  c.seed = f.seed;
  c.smote = !f.no_smote;
  c.smote_k = f.smote_k;
  c.smote_per_fold = f.smote_per_fold;
  c.fit_scope = parse_fit_scope(f.fit_scope);
  c.select = parse_select_metric(f.select_metric);
  c.jobs = f.jobs;
  c.holdout_ratio = f.holdout_ratio;
  if (!f.projects_file.empty()) c.projects_file = f.projects_file;
  if (!f.grid_override.empty()) c.grid_override = f.grid_override;
  if (!f.fixtures.empty()) c.fixture_dir = f.fixtures;
  c.out = f.out;
  return c;
}

nlohmann::json read_json(const fs::path& p) {
  try {
    return nlohmann::json::parse(read_file(p));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(p.string() + ": " + e.what());
  }
}

void print_summary(const EvalReport& r) {
  std::cout << render_markdown({r});
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"buggin: classify bug reports as intrinsic or extrinsic"};
  app.require_subcommand(1);
  RunFlags f;

  auto* run = app.add_subcommand("run", "load, preprocess, embed, search, refit and evaluate");
  add_corpus_flags(run, f, true);
  add_embed_flags(run, f);
  add_search_flags(run, f);
  run->add_option("--out", f.out, "output directory");

  std::string remote;
  int timeout_ms = 10000;
  auto* ingest = app.add_subcommand("ingest", "validate a corpus and write it as JSONL");
  add_corpus_flags(ingest, f, true);
  ingest->add_option("--remote", remote, "tracker base URL; fetch titles/descriptions for every record");
  ingest->add_option("--timeout-ms", timeout_ms, "per-request timeout");
  ingest->add_option("--out", f.out, "output directory");

  auto* prep = app.add_subcommand("preprocess", "clean, tokenize and lemmatize one text field");
  add_corpus_flags(prep, f, true);
  prep->add_option("--out", f.out, "output directory");

  std::string documents;
  auto* embed = app.add_subcommand("embed", "build the feature matrix and the holdout split");
  add_corpus_flags(embed, f, true);
  add_embed_flags(embed, f);
  embed->add_option("--documents", documents, "documents.jsonl from preprocess (else computed)");
  embed->add_option("--out", f.out, "output directory");

  std::string features_path;
  auto* train_cmd = app.add_subcommand("train", "grid search per family and refit the best configs");
  train_cmd->add_option("--features", features_path, "features.json from embed")->required();
  train_cmd->add_option("--seed", f.seed, "run seed");
  add_search_flags(train_cmd, f);
  train_cmd->add_option("--out", f.out, "output directory");

  std::string search_path, models_dir;
  auto* evaluate = app.add_subcommand("evaluate", "score refit models on the holdout split");
  evaluate->add_option("--features", features_path, "features.json from embed")->required();
  evaluate->add_option("--search", search_path, "search.json from train")->required();
  evaluate->add_option("--models", models_dir, "models directory from train")->required();
  evaluate->add_option("--out", f.out, "output directory");

  std::vector<std::string> inputs;
  std::string md_out;
  auto* report = app.add_subcommand("report", "render one or more report.json files as markdown");
  report->add_option("inputs", inputs, "report.json files")->required();
  report->add_option("--out", md_out, "markdown file (default: stdout)");

  std::size_t n_int = 240, n_non = 160, dim = 16;
  std::uint64_t synth_seed = 7;
  double separation = 3.0;
  std::string synth_corpus, synth_embed;
  auto* synth = app.add_subcommand("synth", "write the synthetic separable corpus and embeddings");
  synth->add_option("--corpus-out", synth_corpus, "CSV/JSONL path")->required();
  synth->add_option("--embeddings-out", synth_embed, "directory for manifest.json + vectors.jsonl");
  synth->add_option("--n-intrinsic", n_int);
  synth->add_option("--n-non-intrinsic", n_non);
  synth->add_option("--dimension", dim);
  synth->add_option("--separation", separation);
  synth->add_option("--seed", synth_seed);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      const auto r = run_experiment(to_run_config(f));
      print_summary(r);
      std::cerr << "wrote " << (fs::path(f.out) / "report.json").string() << "\n";
    } else if (ingest->parsed()) {
      RunConfig c = to_run_config(f);
      Corpus corpus = load_stage(c);
      if (!remote.empty()) {
        corpus = fetch_corpus_text(remote, corpus.reports(), std::chrono::milliseconds(timeout_ms), {},
                                   [](std::size_t done, std::size_t total) {
                                     if (done % 50 == 0 || done == total) std::cerr << done << "/" << total << "\n";
                                   });
      }
      save_corpus(corpus, c.out / "corpus.jsonl", CorpusFormat::Jsonl);
      nlohmann::json s = {{"count", corpus.size()},
                          {"intrinsic", corpus.count(Label::Intrinsic)},
                          {"non_intrinsic", corpus.count(Label::NonIntrinsic)},
                          {"fingerprint", corpus.fingerprint()}};
      write_file_atomic(c.out / "ingest.json", s.dump(2) + "\n");
      std::cout << s.dump(2) << "\n";
    } else if (prep->parsed()) {
      RunConfig c = to_run_config(f);
      const Corpus corpus = load_stage(c);
      const auto docs = preprocess_stage(c, corpus);
      save_documents(docs, c.out / "documents.jsonl");
      std::cout << docs.size() << " documents\n";
    } else if (embed->parsed()) {
      RunConfig c = to_run_config(f);
      if (c.embedding == EmbeddingKind::Dense && !c.manifest) throw ConfigError("embedding dense requires --manifest");
      const Corpus corpus = load_stage(c);
      const auto docs = documents.empty() ? preprocess_stage(c, corpus) : load_documents(documents);
      const auto feats = embed_stage(c, corpus, docs);
      auto j = features_to_json(feats);
      j["corpus_fingerprint"] = corpus.fingerprint();
      j["text_field"] = text_field_name(c.text_field);
      write_file_atomic(c.out / "features.json", j.dump() + "\n");
      std::cout << feats.matrix.n_rows() << " rows x " << feats.matrix.n_cols() << " features (" << feats.embedding
                << ")\n";
    } else if (train_cmd->parsed()) {
      RunConfig c = to_run_config(f);
      const auto feats = features_from_json(read_json(features_path));
      SearchOutcome s;
      search_stage(c, feats, s);
      write_file_atomic(c.out / "search.json", search_to_json(s).dump(2) + "\n");
      for (const auto& m : s.models) {
        write_file_atomic(c.out / "models" / (std::string(family_name(m.family())) + ".json"), to_json(m).dump() + "\n");
        std::cout << family_display_name(m.family()) << ": " << describe(m.config) << "\n";
      }
    } else if (evaluate->parsed()) {
      const auto fj = read_json(features_path);
      const auto feats = features_from_json(fj);
      auto s = search_from_json(read_json(search_path));
      std::vector<TrainedModel> models;
      for (const auto& fr : s.families) {
        models.push_back(model_from_json(read_json(fs::path(models_dir) / (std::string(family_name(fr.family)) + ".json"))));
      }
      evaluate_stage(feats, models, s.families);
      EvalReport r;
      r.run_config = {{"features", features_path}, {"search", search_path}, {"models", models_dir}};
      r.corpus_fingerprint = fj.value("corpus_fingerprint", "");
      r.text_field = fj.value("text_field", "");
      r.embedding = feats.embedding;
      r.n_train = s.n_train;
      r.n_train_balanced = s.n_train_balanced;
      r.n_test = feats.split.test_indices.size();
      r.n_features = feats.matrix.n_cols();
      r.evaluation_note = "holdout metrics of the models in " + models_dir;
      r.families = std::move(s.families);
      write_report_files(r, f.out);
      print_summary(r);
    } else if (report->parsed()) {
      std::vector<EvalReport> rs;
      for (const auto& p : inputs) rs.push_back(report_from_json(read_json(p)));
      const auto md = render_markdown(rs);
      if (md_out.empty()) {
        std::cout << md;
      } else {
        write_file_atomic(md_out, md);
      }
    } else if (synth->parsed()) {
      const Corpus corpus(synthetic_reports({n_int, n_non, synth_seed}));
      save_corpus(corpus, synth_corpus, guess_corpus_format(synth_corpus));
      if (!synth_embed.empty()) {
        const auto table = synthetic_embeddings(corpus, dim, separation, synth_seed);
        std::vector<std::string> ids;
        for (const auto& r : corpus.reports()) ids.push_back(r.bug_id);
        export_dense(table, fs::path(synth_embed) / "manifest.json", ids);
      }
      std::cout << corpus.size() << " reports (" << corpus.count(Label::Intrinsic) << " intrinsic)\n";
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const StageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.stage() == "validate" ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
