#include "buggin/corpus.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "buggin/csv.hpp"
#include "buggin/error.hpp"
#include "buggin/io.hpp"
#include "buggin/random.hpp"

namespace buggin {

namespace {

constexpr std::array<std::string_view, 6> kFields = {"bug_id", "project", "is_bug",
                                                     "has_bic", "title", "description"};

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool require_flag(std::string_view text, std::size_t row, std::string_view field) {
  auto v = parse_flag(text);
  if (!v) {
    throw ParseError("row " + std::to_string(row) + ": field '" + std::string(field) +
                     "' is not a boolean: '" + std::string(text) + "'");
  }
  return *v;
}

std::vector<BugReport> parse_csv_records(std::string_view text) {
  auto rows = csv::parse(text);
  std::vector<BugReport> out;
  if (rows.empty()) return out;

  const auto& header = rows.front().fields;
  std::array<std::size_t, kFields.size()> column{};
  for (std::size_t f = 0; f < kFields.size(); ++f) {
    auto it = std::find(header.begin(), header.end(), kFields[f]);
    if (it == header.end()) {
      throw SchemaError("header: missing field '" + std::string(kFields[f]) + "'");
    }
    column[f] = static_cast<std::size_t>(it - header.begin());
  }

  out.reserve(rows.size() - 1);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& fields = rows[r].fields;
    const std::size_t row_no = r;  // data rows are numbered from 1
    auto get = [&](std::size_t f) -> const std::string& {
      if (column[f] >= fields.size()) {
        throw SchemaError("row " + std::to_string(row_no) + " (line " + std::to_string(rows[r].line) +
                          "): missing field '" + std::string(kFields[f]) + "'");
      }
      return fields[column[f]];
    };
    BugReport rep;
    rep.bug_id = get(0);
    rep.project = get(1);
    const auto& is_bug = get(2);
    const auto& has_bic = get(3);
    if (is_bug.empty()) throw SchemaError("row " + std::to_string(row_no) + ": missing field 'is_bug'");
    if (has_bic.empty()) throw SchemaError("row " + std::to_string(row_no) + ": missing field 'has_bic'");
    rep.is_bug = require_flag(is_bug, row_no, "is_bug");
    rep.has_bic = require_flag(has_bic, row_no, "has_bic");
    rep.title = get(4);
    rep.description = get(5);
    out.push_back(std::move(rep));
  }
  return out;
}

bool json_flag(const nlohmann::json& v, std::size_t row, std::string_view field) {
  if (v.is_boolean()) return v.get<bool>();
  if (v.is_number_integer()) {
    const auto i = v.get<long long>();
    if (i == 0 || i == 1) return i == 1;
  }
  if (v.is_string()) return require_flag(v.get<std::string>(), row, field);
  throw ParseError("row " + std::to_string(row) + ": field '" + std::string(field) +
                   "' is not a boolean: " + v.dump());
}

std::vector<BugReport> parse_jsonl_records(std::string_view text) {
  std::vector<BugReport> out;
  std::size_t row = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(start, end - start);
    start = end + 1;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) {
      if (end == text.size()) break;
      continue;
    }
    ++row;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError("row " + std::to_string(row) + ": invalid JSON: " + e.what());
    }
    if (!obj.is_object()) throw ParseError("row " + std::to_string(row) + ": expected a JSON object");
    for (auto f : kFields) {
      if (!obj.contains(f) || obj[std::string(f)].is_null()) {
        throw SchemaError("row " + std::to_string(row) + ": missing field '" + std::string(f) + "'");
      }
    }
    auto str = [&](std::string_view f) {
      const auto& v = obj[std::string(f)];
      if (v.is_string()) return v.get<std::string>();
      if (v.is_number_integer()) return std::to_string(v.get<long long>());
      throw ParseError("row " + std::to_string(row) + ": field '" + std::string(f) + "' must be a string");
    };
    BugReport rep;
    rep.bug_id = str("bug_id");
    rep.project = str("project");
    rep.is_bug = json_flag(obj["is_bug"], row, "is_bug");
    rep.has_bic = json_flag(obj["has_bic"], row, "has_bic");
    rep.title = str("title");
    rep.description = str("description");
    out.push_back(std::move(rep));
    if (end == text.size()) break;
  }
  return out;
}

}  // namespace

std::string_view label_name(Label l) {
  return l == Label::Intrinsic ? "Intrinsic" : "NonIntrinsic";
}

CorpusFormat parse_corpus_format(std::string_view s) {
  const auto v = lower(s);
  if (v == "csv") return CorpusFormat::Csv;
  if (v == "jsonl") return CorpusFormat::Jsonl;
  throw ConfigError("unknown corpus format '" + std::string(s) + "' (expected csv or jsonl)");
}

CorpusFormat guess_corpus_format(const std::filesystem::path& path) {
  const auto ext = lower(path.extension().string());
  return (ext == ".jsonl" || ext == ".json") ? CorpusFormat::Jsonl : CorpusFormat::Csv;
}

std::optional<bool> parse_flag(std::string_view text) {
  auto b = text.find_first_not_of(" \t");
  auto e = text.find_last_not_of(" \t");
  if (b == std::string_view::npos) return std::nullopt;
  const auto v = lower(text.substr(b, e - b + 1));
  if (v == "1" || v == "true" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "no") return false;
  return std::nullopt;
}

Corpus::Corpus(std::vector<BugReport> reports) : reports_(std::move(reports)) {
  std::unordered_set<std::string> seen;
  labels_.reserve(reports_.size());
  for (std::size_t i = 0; i < reports_.size(); ++i) {
    const auto& r = reports_[i];
    const auto row = std::to_string(i + 1);
    if (r.bug_id.empty()) throw SchemaError("row " + row + ": missing field 'bug_id'");
    if (!seen.insert(r.bug_id).second) {
      throw UniquenessError("row " + row + ": duplicate bug_id '" + r.bug_id + "'");
    }
    if (!r.is_bug) throw SchemaError("row " + row + ": missing field 'is_bug'");
    if (!r.has_bic) throw SchemaError("row " + row + ": missing field 'has_bic'");
    labels_.push_back(derive_label(*r.is_bug, *r.has_bic));
  }
  fingerprint_ = sha256_hex(serialize_corpus(reports_, CorpusFormat::Csv));
}

std::vector<int> Corpus::encoded_labels() const {
  std::vector<int> out;
  out.reserve(labels_.size());
  for (auto l : labels_) out.push_back(encode(l));
  return out;
}

std::size_t Corpus::count(Label l) const {
  return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), l));
}

Corpus parse_corpus(std::string_view text, CorpusFormat format) {
  return Corpus(format == CorpusFormat::Csv ? parse_csv_records(text) : parse_jsonl_records(text));
}

Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format) {
  return parse_corpus(read_file(path), format);
}

std::string serialize_corpus(const std::vector<BugReport>& reports, CorpusFormat format) {
  auto flag = [](const std::optional<bool>& f) -> std::string { return f ? (*f ? "1" : "0") : ""; };
  std::string out;
  if (format == CorpusFormat::Csv) {
    out += std::string(kCorpusHeader) + "\r\n";
    for (const auto& r : reports) {
      out += csv::format_row({r.bug_id, r.project, flag(r.is_bug), flag(r.has_bic), r.title, r.description});
    }
    return out;
  }
  for (const auto& r : reports) {
    nlohmann::ordered_json obj;
    obj["bug_id"] = r.bug_id;
    obj["project"] = r.project;
    obj["is_bug"] = r.is_bug ? nlohmann::ordered_json(*r.is_bug ? 1 : 0) : nlohmann::ordered_json(nullptr);
    obj["has_bic"] = r.has_bic ? nlohmann::ordered_json(*r.has_bic ? 1 : 0) : nlohmann::ordered_json(nullptr);
    obj["title"] = r.title;
    obj["description"] = r.description;
    out += obj.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
    out.push_back('\n');
  }
  return out;
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path, CorpusFormat format) {
  write_file_atomic(path, serialize_corpus(corpus.reports(), format));
}

SplitPlan stratified_holdout(const std::vector<int>& labels, double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) {
    throw ValidationError("holdout ratio must lie in (0, 1), got " + std::to_string(ratio));
  }
  std::array<std::vector<std::size_t>, 2> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i] != 0 ? 1 : 0].push_back(i);
  for (int c = 0; c < 2; ++c) {
    if (by_class[c].empty()) {
      throw StratificationError(std::string("cannot stratify: class ") +
                                std::string(label_name(static_cast<Label>(c))) + " has no samples");
    }
  }

  const std::size_t n = labels.size();
  const auto total = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n)));
  std::array<std::size_t, 2> take{};
  std::array<double, 2> frac{};
  std::size_t assigned = 0;
  for (int c = 0; c < 2; ++c) {
    const double share = ratio * static_cast<double>(by_class[c].size());
    take[c] = static_cast<std::size_t>(std::floor(share));
    frac[c] = share - std::floor(share);
    assigned += take[c];
  }
  // Hand the rounding remainder to the classes with the largest fractional
  // share; on equal fractions the larger class goes first.
  std::array<int, 2> order = {0, 1};
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (frac[a] != frac[b]) return frac[a] > frac[b];
    if (by_class[a].size() != by_class[b].size()) return by_class[a].size() > by_class[b].size();
    return a > b;
  });
  for (int c : order) {
    if (assigned >= total) break;
    if (frac[c] > 0.0 && take[c] < by_class[c].size()) {
      ++take[c];
      ++assigned;
    }
  }

  SplitPlan plan;
  plan.ratio = ratio;
  plan.seed = seed;
  for (int c = 0; c < 2; ++c) {
    Pcg32 rng(derive_seed(seed, "holdout", static_cast<std::uint64_t>(c)));
    auto idx = by_class[c];
    shuffle(std::span(idx), rng);
    plan.train_indices.insert(plan.train_indices.end(), idx.begin(), idx.begin() + static_cast<long>(take[c]));
    plan.test_indices.insert(plan.test_indices.end(), idx.begin() + static_cast<long>(take[c]), idx.end());
  }
  std::sort(plan.train_indices.begin(), plan.train_indices.end());
  std::sort(plan.test_indices.begin(), plan.test_indices.end());
  return plan;
}

SplitPlan stratified_holdout(const Corpus& corpus, double ratio, std::uint64_t seed) {
  return stratified_holdout(corpus.encoded_labels(), ratio, seed);
}

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xf]);
  }
  return out;
}

}  // namespace buggin
