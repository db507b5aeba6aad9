#include "buggin/features.hpp"

#include <cmath>
#include <regex>
#include <sstream>
#include <unordered_set>

#include "buggin/error.hpp"
#include "buggin/io.hpp"

namespace buggin {

double smoothed_idf(std::size_t n_docs, std::size_t df) {
  return std::log((1.0 + static_cast<double>(n_docs)) / (1.0 + static_cast<double>(df))) + 1.0;
}

TfidfModel TfidfModel::fit(const std::vector<Document>& docs) {
  if (docs.empty()) throw ValidationError("cannot fit TF-IDF on zero documents");
  TfidfModel m;
  std::vector<std::size_t> df;
  for (const auto& doc : docs) {
    std::unordered_set<std::uint32_t> seen;
    for (const auto& tok : doc.tokens) {
      auto [it, inserted] = m.column_.try_emplace(tok, static_cast<std::uint32_t>(m.terms_.size()));
      if (inserted) {
        m.terms_.push_back(tok);
        df.push_back(0);
      }
      if (seen.insert(it->second).second) ++df[it->second];
    }
    m.fitted_ids_.push_back(doc.bug_id);
  }
  if (m.terms_.empty()) throw EmptyVocabularyError("all documents are empty; vocabulary would be empty");
  m.n_docs_ = docs.size();
  m.idf_.reserve(df.size());
  for (auto d : df) m.idf_.push_back(smoothed_idf(m.n_docs_, d));
  return m;
}

long TfidfModel::column_of(const std::string& term) const {
  auto it = column_.find(term);
  return it == column_.end() ? -1 : static_cast<long>(it->second);
}

SparseEntries TfidfModel::transform(const Document& doc) const {
  std::map<std::uint32_t, double> counts;
  for (const auto& tok : doc.tokens) {
    if (auto it = column_.find(tok); it != column_.end()) counts[it->second] += 1.0;
  }
  SparseEntries row;
  double norm2 = 0.0;
  for (auto [j, c] : counts) {
    const double w = c * idf_[j];
    row.emplace_back(j, w);
    norm2 += w * w;
  }
  if (norm2 > 0.0) {
    const double inv = 1.0 / std::sqrt(norm2);
    for (auto& e : row) e.second *= inv;
  }
  return row;
}

nlohmann::json TfidfModel::to_json() const {
  nlohmann::json j;
  j["schema"] = "buggin.tfidf/1";
  j["terms"] = terms_;
  j["idf"] = idf_;
  j["n_docs_fitted"] = n_docs_;
  j["fitted_ids"] = fitted_ids_;
  return j;
}

TfidfModel TfidfModel::from_json(const nlohmann::json& j) {
  try {
    TfidfModel m;
    if (j.at("schema").get<std::string>() != "buggin.tfidf/1") throw FormatError("unsupported TF-IDF schema");
    m.terms_ = j.at("terms").get<std::vector<std::string>>();
    m.idf_ = j.at("idf").get<std::vector<double>>();
    m.n_docs_ = j.at("n_docs_fitted").get<std::size_t>();
    m.fitted_ids_ = j.at("fitted_ids").get<std::vector<std::string>>();
    if (m.terms_.size() != m.idf_.size()) throw FormatError("TF-IDF terms/idf length mismatch");
    for (std::size_t i = 0; i < m.terms_.size(); ++i) {
      if (!m.column_.emplace(m.terms_[i], static_cast<std::uint32_t>(i)).second) {
        throw FormatError("duplicate TF-IDF term '" + m.terms_[i] + "'");
      }
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed TF-IDF JSON: ") + e.what());
  }
}

EmbeddingTable import_dense(const std::filesystem::path& manifest_path) {
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(read_file(manifest_path));
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(manifest_path.string() + ": manifest is not valid JSON: " + e.what());
  }
  EmbeddingTable table;
  std::size_t count = 0;
  std::filesystem::path vectors_path = manifest_path.parent_path() / "vectors.jsonl";
  try {
    table.model_name = manifest.at("model_name").get<std::string>();
    const auto dim = manifest.at("dimension").get<long long>();
    if (dim <= 0) throw FormatError("manifest dimension must be positive");
    table.dimension = static_cast<std::size_t>(dim);
    count = manifest.at("count").get<std::size_t>();
    if (manifest.contains("vectors")) {
      vectors_path = manifest_path.parent_path() / manifest["vectors"].get<std::string>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(manifest_path.string() + ": bad manifest: " + e.what());
  }
  table.manifest = manifest;

  std::istringstream in(read_file(vectors_path));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json row;
    try {
      row = nlohmann::json::parse(line);
    } catch (const nlohmann::json::out_of_range&) {
      throw ValidationError(vectors_path.string() + ":" + std::to_string(line_no) + ": non-finite component");
    } catch (const nlohmann::json::parse_error&) {
      // Python's json module writes NaN / Infinity as bare tokens
      static const std::regex non_finite(R"((-?Infinity|NaN)\s*[,\]])");
      if (std::regex_search(line, non_finite)) {
        throw ValidationError(vectors_path.string() + ":" + std::to_string(line_no) + ": non-finite component");
      }
      throw FormatError(vectors_path.string() + ":" + std::to_string(line_no) + ": invalid JSON");
    }
    if (!row.is_object() || !row.contains("id") || !row.contains("v") || !row["v"].is_array()) {
      throw FormatError(vectors_path.string() + ":" + std::to_string(line_no) + ": expected {\"id\", \"v\"}");
    }
    const auto id = row["id"].is_string() ? row["id"].get<std::string>() : row["id"].dump();
    const auto& v = row["v"];
    if (v.size() != table.dimension) {
      throw FormatError("bug_id " + id + ": vector has " + std::to_string(v.size()) + " components, expected " +
                        std::to_string(table.dimension));
    }
    std::vector<double> vec;
    vec.reserve(v.size());
    for (const auto& x : v) {
      if (!x.is_number()) {
        throw ValidationError("bug_id " + id + ": non-numeric component " + x.dump());
      }
      const double d = x.get<double>();
      if (!std::isfinite(d)) throw ValidationError("bug_id " + id + ": non-finite component");
      vec.push_back(d);
    }
    if (!table.vectors.emplace(id, std::move(vec)).second) {
      throw UniquenessError("bug_id " + id + ": duplicate embedding row");
    }
  }
  if (table.vectors.size() != count) {
    throw FormatError(manifest_path.string() + ": manifest count " + std::to_string(count) + " but " +
                      std::to_string(table.vectors.size()) + " rows in " + vectors_path.string());
  }
  return table;
}

void export_dense(const EmbeddingTable& table, const std::filesystem::path& manifest_path,
                  const std::vector<std::string>& id_order) {
  nlohmann::json manifest = table.manifest.is_object() ? table.manifest : nlohmann::json::object();
  manifest["model_name"] = table.model_name;
  manifest["dimension"] = table.dimension;
  manifest["count"] = id_order.size();
  if (!manifest.contains("vectors")) manifest["vectors"] = "vectors.jsonl";
  std::string rows;
  for (const auto& id : id_order) {
    nlohmann::json row;
    row["id"] = id;
    row["v"] = table.vectors.at(id);
    rows += row.dump() + "\n";
  }
  write_file_atomic(manifest_path.parent_path() / manifest["vectors"].get<std::string>(), rows);
  write_file_atomic(manifest_path, manifest.dump(2) + "\n");
}

FeatureMatrix assemble_matrix(const TfidfModel& model, const std::vector<Document>& docs,
                              const std::vector<int>& labels) {
  if (docs.size() != labels.size()) throw DimensionError("documents and labels differ in length");
  FeatureMatrix m(Storage::Sparse, model.vocabulary_size());
  for (std::size_t i = 0; i < docs.size(); ++i) m.append_sparse(docs[i].bug_id, labels[i], model.transform(docs[i]));
  return m;
}

FeatureMatrix assemble_matrix(const EmbeddingTable& table, const std::vector<std::string>& ids,
                              const std::vector<int>& labels) {
  if (ids.size() != labels.size()) throw DimensionError("ids and labels differ in length");
  std::vector<std::string> missing;
  for (const auto& id : ids) {
    if (!table.vectors.count(id)) missing.push_back(id);
  }
  if (!missing.empty()) {
    std::string list;
    for (std::size_t i = 0; i < missing.size() && i < 20; ++i) list += (i ? ", " : "") + missing[i];
    if (missing.size() > 20) list += ", ...";
    throw LookupError(std::to_string(missing.size()) + " id(s) missing from embedding table '" +
                      table.model_name + "': " + list);
  }
  FeatureMatrix m(Storage::Dense, table.dimension);
  for (std::size_t i = 0; i < ids.size(); ++i) m.append_dense(ids[i], labels[i], table.vectors.at(ids[i]));
  return m;
}

}  // namespace buggin
