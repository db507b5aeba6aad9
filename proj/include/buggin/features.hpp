#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "buggin/matrix.hpp"
#include "buggin/textprep.hpp"

namespace buggin {

// Smoothed IDF: ln((1 + N) / (1 + df)) + 1. Kept in one place so that a
// different convention is a one-line change.
double smoothed_idf(std::size_t n_docs, std::size_t df);

class TfidfModel {
 public:
  // Vocabulary = every distinct token, columns in first-occurrence order.
  // Throws ValidationError on an empty document list and
  // EmptyVocabularyError when every document is empty.
  static TfidfModel fit(const std::vector<Document>& docs);

  std::size_t vocabulary_size() const { return terms_.size(); }
  const std::vector<std::string>& terms() const { return terms_; }
  const std::vector<double>& idf() const { return idf_; }
  std::size_t n_docs_fitted() const { return n_docs_; }
  const std::vector<std::string>& fitted_ids() const { return fitted_ids_; }
  // -1 when the term is out of vocabulary.
  long column_of(const std::string& term) const;

  // count * idf per in-vocabulary token, then L2-normalised; documents with
  // no in-vocabulary token map to the empty row.
  SparseEntries transform(const Document& doc) const;

  nlohmann::json to_json() const;
  static TfidfModel from_json(const nlohmann::json& j);

 private:
  std::vector<std::string> terms_;
  std::unordered_map<std::string, std::uint32_t> column_;
  std::vector<double> idf_;
  std::size_t n_docs_ = 0;
  std::vector<std::string> fitted_ids_;
};

// Dense vectors produced outside this toolkit. Every vector has exactly
// `dimension` finite components.
struct EmbeddingTable {
  std::string model_name;
  std::size_t dimension = 0;
  std::unordered_map<std::string, std::vector<double>> vectors;
  nlohmann::json manifest;  // full manifest as read, for provenance
};

// Reads a manifest {"model_name", "dimension", "count", optional "vectors"}
// and the JSONL vector file it names (default: vectors.jsonl next to the
// manifest), one {"id": ..., "v": [...]} per line.
// Errors: FormatError on dimension/count mismatch or malformed rows,
// ValidationError on NaN/Inf, UniquenessError on duplicate ids.
EmbeddingTable import_dense(const std::filesystem::path& manifest_path);

// Writes the manifest + vector file pair (used by tests and fixture tooling).
void export_dense(const EmbeddingTable& table, const std::filesystem::path& manifest_path,
                  const std::vector<std::string>& id_order);

// Builds a matrix with rows in the order of `docs`, labels aligned.
FeatureMatrix assemble_matrix(const TfidfModel& model, const std::vector<Document>& docs,
                              const std::vector<int>& labels);
// Rows in the order of `ids`. Throws LookupError listing every missing id.
FeatureMatrix assemble_matrix(const EmbeddingTable& table, const std::vector<std::string>& ids,
                              const std::vector<int>& labels);

}  // namespace buggin
