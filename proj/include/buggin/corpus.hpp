#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace buggin {

// One issue-tracker record. The two manual flags are optional only so that
// records fetched from a remote tracker can exist before they are labeled;
// a validated Corpus always has both set.
struct BugReport {
  std::string bug_id;
  std::string project;
  std::string title;
  std::string description;
  std::optional<bool> is_bug;
  std::optional<bool> has_bic;

  friend bool operator==(const BugReport&, const BugReport&) = default;
};

// Intrinsic is the positive class everywhere downstream.
enum class Label : int { NonIntrinsic = 0, Intrinsic = 1 };

constexpr int encode(Label l) { return static_cast<int>(l); }

// Intrinsic iff the report is a bug and it has a bug-inducing commit.
constexpr Label derive_label(bool is_bug, bool has_bic) {
  return (is_bug && has_bic) ? Label::Intrinsic : Label::NonIntrinsic;
}

std::string_view label_name(Label l);

enum class CorpusFormat { Csv, Jsonl };

CorpusFormat parse_corpus_format(std::string_view s);
// Picks the format from the file extension (.jsonl/.json -> jsonl, else csv).
CorpusFormat guess_corpus_format(const std::filesystem::path& path);

// Immutable after construction.
class Corpus {
 public:
  Corpus() = default;
  // Validates the records (nonempty unique ids, both flags present) and
  // derives labels and the fingerprint.
  explicit Corpus(std::vector<BugReport> reports);

  const std::vector<BugReport>& reports() const { return reports_; }
  const std::vector<Label>& labels() const { return labels_; }
  std::vector<int> encoded_labels() const;
  const std::string& fingerprint() const { return fingerprint_; }
  std::size_t size() const { return reports_.size(); }
  bool empty() const { return reports_.empty(); }
  std::size_t count(Label l) const;

 private:
  std::vector<BugReport> reports_;
  std::vector<Label> labels_;
  std::string fingerprint_;
};

inline constexpr std::string_view kCorpusHeader = "bug_id,project,is_bug,has_bic,title,description";

// Row order is preserved. Throws SchemaError (missing field, names row and
// field), UniquenessError (duplicate bug_id) or ParseError (non-boolean flag).
Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format);
Corpus parse_corpus(std::string_view text, CorpusFormat format);

std::string serialize_corpus(const std::vector<BugReport>& reports, CorpusFormat format);
void save_corpus(const Corpus& corpus, const std::filesystem::path& path, CorpusFormat format);

// Accepts 0/1, true/false, yes/no (case-insensitive).
std::optional<bool> parse_flag(std::string_view text);

struct SplitPlan {
  std::vector<std::size_t> train_indices;  // ascending
  std::vector<std::size_t> test_indices;   // ascending
  double ratio = 0.8;
  std::uint64_t seed = 0;
};

// Seeded, per-class stratified holdout. Each class contributes floor or ceil
// of ratio * class size to the training set; the total is round(ratio * n).
// Throws StratificationError when a class is absent, ValidationError when
// ratio is outside (0, 1).
SplitPlan stratified_holdout(const std::vector<int>& labels, double ratio, std::uint64_t seed);
SplitPlan stratified_holdout(const Corpus& corpus, double ratio, std::uint64_t seed);

// Hex SHA-256 of a byte string.
std::string sha256_hex(std::string_view data);

}  // namespace buggin
