#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "buggin/corpus.hpp"

namespace buggin {

inline constexpr std::string_view kUrlToken = "<url>";
inline constexpr std::string_view kInternalProjectToken = "<internal_project>";
inline constexpr std::string_view kExternalProjectToken = "<external_project>";

bool is_sentinel(std::string_view token);

// own_project is always a member of known_projects (the constructor inserts
// it). Names are compared case-insensitively.
class ProjectContext {
 public:
  ProjectContext() = default;
  ProjectContext(std::string own_project, std::set<std::string> known_projects);

  const std::string& own_project() const { return own_; }
  const std::set<std::string>& known_projects() const { return known_; }

 private:
  std::string own_;
  std::set<std::string> known_;
};

struct CleanOptions {
  // A line containing any of these starts a traceback block; the block also
  // swallows every following line that starts with a space or tab.
  std::vector<std::string> traceback_headers = {"Traceback (most recent call last):"};
};

// Cleanup, in order: traceback blocks, URLs -> <URL>, hex ids (7-40 hex chars
// with at least one digit), project names -> <internal project> /
// <external project>, remaining non-letters and numerals, lowercase.
// Whitespace is collapsed to single spaces and trimmed.
std::string clean_text(std::string_view raw, const ProjectContext& ctx, const CleanOptions& opts = {});

// Splits on whitespace; "<internal project>" and "<external project>" become
// single tokens with the space replaced by an underscore.
std::vector<std::string> tokenize(std::string_view cleaned);

using Stoplist = std::unordered_set<std::string>;

std::vector<std::string> remove_stopwords(const std::vector<std::string>& tokens, const Stoplist& stoplist);

enum class LemmaRepair { None, Verb };

struct LemmaRule {
  std::string suffix;
  std::string replacement;
  std::size_t min_length = 0;
  bool stem_needs_vowel = false;
  LemmaRepair repair = LemmaRepair::None;
};

// Rule-based English lemmatizer: exception lookup, then the first matching
// suffix rule. Rules are applied until a fixed point so that lemmatizing a
// lemma never changes it.
class Lemmatizer {
 public:
  Lemmatizer() = default;
  Lemmatizer(std::unordered_map<std::string, std::string> exceptions, std::vector<LemmaRule> rules);

  std::string lemma(std::string_view word) const;
  std::vector<std::string> operator()(const std::vector<std::string>& tokens) const;

 private:
  std::string apply_once(const std::string& word) const;

  std::unordered_map<std::string, std::string> exceptions_;
  std::vector<LemmaRule> rules_;
};

// Fixture loaders. Lines starting with '#' and blank lines are ignored.
Stoplist load_stoplist(const std::filesystem::path& path);
std::unordered_map<std::string, std::string> load_lemma_exceptions(const std::filesystem::path& path);
std::vector<LemmaRule> load_lemma_rules(const std::filesystem::path& path);
std::set<std::string> load_projects(const std::filesystem::path& path);

// Directory holding the shipped fixtures. BUGGIN_DATA_DIR overrides the
// build-time default.
std::filesystem::path default_fixture_dir();

enum class TextField { Title, Description };

TextField parse_text_field(std::string_view s);
std::string_view text_field_name(TextField f);

struct Document {
  std::string bug_id;
  TextField source_field = TextField::Title;
  std::vector<std::string> tokens;

  friend bool operator==(const Document&, const Document&) = default;
};

// Everything preprocess needs besides the report.
struct Preprocessor {
  Stoplist stoplist;
  Lemmatizer lemmatizer;
  std::set<std::string> known_projects;
  CleanOptions clean;
  std::string fixture_digest;  // SHA-256 of the fixture files it was built from

  static Preprocessor from_fixtures(const std::filesystem::path& dir);
  static Preprocessor from_fixtures(const std::filesystem::path& dir, const std::filesystem::path& projects_file);

  ProjectContext context_for(const BugReport& report) const;
  Document operator()(const BugReport& report, TextField field) const;
  // Stable digest of the fixture contents, used to key the preprocessing cache.
  std::string fingerprint() const;
};

// clean -> tokenize -> drop stopwords -> lemmatize -> drop stopwords again
// (a lemma can itself be a stopword, e.g. "doing" -> "do") -> mark tokens that
// are project names.
Document preprocess(const BugReport& report, TextField field, const ProjectContext& ctx,
                    const Stoplist& stoplist, const Lemmatizer& lemmatizer, const CleanOptions& opts = {});

std::string detokenize(const std::vector<std::string>& tokens);

}  // namespace buggin
