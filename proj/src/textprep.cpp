#include "buggin/textprep.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdlib>
#include <sstream>

#include "buggin/error.hpp"
#include "buggin/io.hpp"

namespace buggin {

namespace {

bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_alnum(char c) { return is_alpha(c) || is_digit(c); }
bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }
bool is_hex(char c) { return is_digit(c) || (c >= 'a' && c <= 'f') || (c >= 'A' && c <= 'F'); }
bool is_word(char c) { return is_alnum(c) || c == '_' || c == '-'; }
char to_lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = to_lower(c);
  return out;
}

bool istarts_with(std::string_view text, std::size_t pos, std::string_view prefix) {
  if (pos + prefix.size() > text.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (to_lower(text[pos + i]) != to_lower(prefix[i])) return false;
  }
  return true;
}

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string strip_tracebacks(std::string_view text, const CleanOptions& opts) {
  std::string out;
  bool in_block = false;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    const bool last = end == std::string_view::npos;
    if (last) end = text.size();
    auto line = text.substr(start, end - start);
    bool header = false;
    for (const auto& h : opts.traceback_headers) {
      if (!h.empty() && line.find(h) != std::string_view::npos) header = true;
    }
    if (header) {
      in_block = true;
    } else if (in_block && !line.empty() && (line.front() == ' ' || line.front() == '\t')) {
      // still inside the traceback
    } else {
      in_block = false;
      out.append(line);
      if (!last) out.push_back('\n');
    }
    if (last) break;
    start = end + 1;
  }
  return out;
}

std::string replace_urls(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    const bool boundary = i == 0 || !is_alnum(text[i - 1]);
    if (boundary && (istarts_with(text, i, "http://") || istarts_with(text, i, "https://") ||
                     istarts_with(text, i, "www."))) {
      while (i < text.size() && !is_space(text[i])) ++i;
      out += "<URL>";
      continue;
    }
    out.push_back(text[i++]);
  }
  return out;
}

std::string drop_hex_ids(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (!is_alnum(text[i])) {
      out.push_back(text[i++]);
      continue;
    }
    std::size_t j = i;
    bool all_hex = true;
    bool has_digit = false;
    while (j < text.size() && is_alnum(text[j])) {
      all_hex = all_hex && is_hex(text[j]);
      has_digit = has_digit || is_digit(text[j]);
      ++j;
    }
    const auto len = j - i;
    if (!(all_hex && has_digit && len >= 7 && len <= 40)) out.append(text.substr(i, len));
    i = j;
  }
  return out;
}

std::string replace_projects(std::string_view text, const ProjectContext& ctx) {
  std::string out;
  out.reserve(text.size());
  const auto own = lower(ctx.own_project());
  std::size_t i = 0;
  while (i < text.size()) {
    if (!is_word(text[i])) {
      out.push_back(text[i++]);
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && is_word(text[j])) ++j;
    const auto word = lower(text.substr(i, j - i));
    if (!own.empty() && word == own) {
      out += "<internal project>";
    } else if (ctx.known_projects().count(word)) {
      out += "<external project>";
    } else {
      out.append(text.substr(i, j - i));
    }
    i = j;
  }
  return out;
}

// Sentinel spellings recognised while stripping special characters, with
// their canonical cleaned form.
constexpr std::array<std::pair<std::string_view, std::string_view>, 5> kSentinelForms = {{
    {"<url>", "<url>"},
    {"<internal project>", "<internal project>"},
    {"<external project>", "<external project>"},
    {"<internal_project>", "<internal project>"},
    {"<external_project>", "<external project>"},
}};

std::string strip_specials(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  auto last_out_alpha = [&] { return !out.empty() && is_alpha(out.back()); };
  while (i < text.size()) {
    const char c = text[i];
    if (c == '<') {
      bool matched = false;
      for (const auto& [form, canon] : kSentinelForms) {
        if (istarts_with(text, i, form)) {
          out.push_back(' ');
          out.append(canon);
          out.push_back(' ');
          i += form.size();
          matched = true;
          break;
        }
      }
      if (matched) continue;
    }
    if (is_alpha(c)) {
      out.push_back(c);
    } else if (is_digit(c) || c == '\'') {
      // numerals and apostrophes are deleted outright
    } else if ((c == '-' || c == '_') && last_out_alpha() && i + 1 < text.size() && is_alpha(text[i + 1])) {
      out.push_back(c);
    } else {
      out.push_back(' ');
    }
    ++i;
  }
  return out;
}

std::string collapse_whitespace(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    if (is_space(c)) {
      if (!out.empty() && out.back() != ' ') out.push_back(' ');
    } else {
      out.push_back(c);
    }
  }
  if (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

bool is_vowel_at(std::string_view w, std::size_t i) {
  switch (w[i]) {
    case 'a': case 'e': case 'i': case 'o': case 'u':
      return true;
    case 'y':
      return i > 0 && !is_vowel_at(w, i - 1);
    default:
      return false;
  }
}

bool has_vowel(std::string_view w) {
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (is_vowel_at(w, i)) return true;
  }
  return false;
}

// Number of vowel-consonant sequences.
int measure(std::string_view w) {
  int m = 0;
  bool prev_vowel = false;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const bool v = is_vowel_at(w, i);
    if (prev_vowel && !v) ++m;
    prev_vowel = v;
  }
  return m;
}

bool ends_cvc(std::string_view w) {
  if (w.size() < 3) return false;
  const auto n = w.size();
  const char last = w[n - 1];
  return !is_vowel_at(w, n - 3) && is_vowel_at(w, n - 2) && !is_vowel_at(w, n - 1) && last != 'w' &&
         last != 'x' && last != 'y';
}

std::string verb_repair(std::string stem) {
  const auto n = stem.size();
  auto ends = [&](std::string_view s) { return n >= s.size() && stem.compare(n - s.size(), s.size(), s) == 0; };
  if (ends("at") || ends("bl") || ends("iz")) return stem + "e";
  if (n >= 2 && stem[n - 1] == stem[n - 2] && !is_vowel_at(stem, n - 1) && stem[n - 1] != 'l' &&
      stem[n - 1] != 's' && stem[n - 1] != 'z') {
    stem.pop_back();
    return stem;
  }
  if (measure(stem) == 1 && ends_cvc(stem)) return stem + "e";
  return stem;
}

std::vector<std::string> fixture_lines(const std::filesystem::path& path) {
  std::vector<std::string> out;
  std::istringstream in(read_file(path));
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    out.push_back(line);
  }
  return out;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    auto tab = line.find('\t', start);
    out.push_back(trim(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start)));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return out;
}

}  // namespace

bool is_sentinel(std::string_view token) {
  return token == kUrlToken || token == kInternalProjectToken || token == kExternalProjectToken;
}

ProjectContext::ProjectContext(std::string own_project, std::set<std::string> known_projects)
    : own_(lower(own_project)) {
  for (const auto& p : known_projects) {
    if (!p.empty()) known_.insert(lower(p));
  }
  if (!own_.empty()) known_.insert(own_);
}

std::string clean_text(std::string_view raw, const ProjectContext& ctx, const CleanOptions& opts) {
  // Bytes outside ASCII never survive strip_specials, so invalid UTF-8 needs
  // no separate repair pass.
  auto text = strip_tracebacks(raw, opts);
  text = replace_urls(text);
  text = drop_hex_ids(text);
  text = replace_projects(text, ctx);
  text = strip_specials(text);
  for (auto& c : text) c = to_lower(c);
  return collapse_whitespace(text);
}

std::vector<std::string> tokenize(std::string_view cleaned) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < cleaned.size()) {
    if (is_space(cleaned[i])) {
      ++i;
      continue;
    }
    if (istarts_with(cleaned, i, "<internal project>")) {
      tokens.emplace_back(kInternalProjectToken);
      i += 18;
      continue;
    }
    if (istarts_with(cleaned, i, "<external project>")) {
      tokens.emplace_back(kExternalProjectToken);
      i += 18;
      continue;
    }
    std::size_t j = i;
    while (j < cleaned.size() && !is_space(cleaned[j])) ++j;
    tokens.emplace_back(cleaned.substr(i, j - i));
    i = j;
  }
  return tokens;
}

std::vector<std::string> remove_stopwords(const std::vector<std::string>& tokens, const Stoplist& stoplist) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) {
    if (is_sentinel(t) || !stoplist.count(t)) out.push_back(t);
  }
  return out;
}

Lemmatizer::Lemmatizer(std::unordered_map<std::string, std::string> exceptions, std::vector<LemmaRule> rules)
    : exceptions_(std::move(exceptions)), rules_(std::move(rules)) {}

std::string Lemmatizer::apply_once(const std::string& word) const {
  if (auto it = exceptions_.find(word); it != exceptions_.end()) return it->second;
  for (const auto& rule : rules_) {
    if (word.size() < rule.min_length || word.size() < rule.suffix.size()) continue;
    if (word.compare(word.size() - rule.suffix.size(), rule.suffix.size(), rule.suffix) != 0) continue;
    if (rule.replacement == rule.suffix) return word;
    auto stem = word.substr(0, word.size() - rule.suffix.size());
    if (rule.stem_needs_vowel && !has_vowel(stem)) continue;
    if (stem.empty()) continue;
    if (rule.repair == LemmaRepair::Verb) stem = verb_repair(std::move(stem));
    return stem + rule.replacement;
  }
  return word;
}

std::string Lemmatizer::lemma(std::string_view word) const {
  std::string current(word);
  if (is_sentinel(current)) return current;
  for (int i = 0; i < 16; ++i) {
    auto next = apply_once(current);
    if (next == current) break;
    current = std::move(next);
  }
  return current;
}

std::vector<std::string> Lemmatizer::operator()(const std::vector<std::string>& tokens) const {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(lemma(t));
  return out;
}

Stoplist load_stoplist(const std::filesystem::path& path) {
  Stoplist out;
  for (const auto& line : fixture_lines(path)) {
    auto w = lower(trim(line));
    if (!w.empty()) out.insert(std::move(w));
  }
  return out;
}

std::unordered_map<std::string, std::string> load_lemma_exceptions(const std::filesystem::path& path) {
  std::unordered_map<std::string, std::string> out;
  for (const auto& line : fixture_lines(path)) {
    auto cols = split_tabs(line);
    if (cols.size() < 2 || cols[0].empty() || cols[1].empty()) {
      throw FormatError(path.string() + ": malformed exception line '" + line + "'");
    }
    out[cols[0]] = cols[1];
  }
  return out;
}

std::vector<LemmaRule> load_lemma_rules(const std::filesystem::path& path) {
  std::vector<LemmaRule> out;
  for (const auto& line : fixture_lines(path)) {
    auto cols = split_tabs(line);
    if (cols.size() != 5) throw FormatError(path.string() + ": expected 5 columns in '" + line + "'");
    LemmaRule r;
    r.suffix = cols[0];
    r.replacement = cols[1] == "-" ? "" : cols[1];
    try {
      r.min_length = static_cast<std::size_t>(std::stoul(cols[2]));
    } catch (const std::exception&) {
      throw FormatError(path.string() + ": bad min length in '" + line + "'");
    }
    r.stem_needs_vowel = cols[3] == "1";
    if (cols[4] == "verb") {
      r.repair = LemmaRepair::Verb;
    } else if (cols[4] != "none") {
      throw FormatError(path.string() + ": unknown repair '" + cols[4] + "'");
    }
    if (r.suffix.empty()) throw FormatError(path.string() + ": empty suffix");
    out.push_back(std::move(r));
  }
  return out;
}

std::set<std::string> load_projects(const std::filesystem::path& path) {
  std::set<std::string> out;
  for (const auto& line : fixture_lines(path)) {
    auto p = lower(trim(line));
    if (!p.empty()) out.insert(std::move(p));
  }
  return out;
}

std::filesystem::path default_fixture_dir() {
  if (const char* env = std::getenv("BUGGIN_DATA_DIR"); env && *env) {
    return std::filesystem::path(env) / "fixtures";
  }
  return std::filesystem::path(BUGGIN_DEFAULT_DATA_DIR) / "fixtures";
}

TextField parse_text_field(std::string_view s) {
  const auto v = lower(s);
  if (v == "title") return TextField::Title;
  if (v == "description") return TextField::Description;
  throw ConfigError("unknown text field '" + std::string(s) + "' (expected title or description)");
}

std::string_view text_field_name(TextField f) { return f == TextField::Title ? "title" : "description"; }

Preprocessor Preprocessor::from_fixtures(const std::filesystem::path& dir) {
  return from_fixtures(dir, dir / "projects.txt");
}

Preprocessor Preprocessor::from_fixtures(const std::filesystem::path& dir,
                                         const std::filesystem::path& projects_file) {
  Preprocessor p;
  p.stoplist = load_stoplist(dir / "stopwords.txt");
  p.lemmatizer = Lemmatizer(load_lemma_exceptions(dir / "lemma_exceptions.tsv"),
                            load_lemma_rules(dir / "lemma_rules.tsv"));
  p.known_projects = load_projects(projects_file);
  std::string all;
  for (const auto& f : {dir / "stopwords.txt", dir / "lemma_exceptions.tsv", dir / "lemma_rules.tsv", projects_file}) {
    all += read_file(f) + "\x1f";
  }
  p.fixture_digest = sha256_hex(all);
  return p;
}

ProjectContext Preprocessor::context_for(const BugReport& report) const {
  return ProjectContext(report.project, known_projects);
}

Document Preprocessor::operator()(const BugReport& report, TextField field) const {
  return preprocess(report, field, context_for(report), stoplist, lemmatizer, clean);
}

std::string Preprocessor::fingerprint() const {
  std::string canon = fixture_digest + "|tb:";
  for (const auto& s : clean.traceback_headers) canon += s + "\n";
  return sha256_hex(canon);
}

Document preprocess(const BugReport& report, TextField field, const ProjectContext& ctx,
                    const Stoplist& stoplist, const Lemmatizer& lemmatizer, const CleanOptions& opts) {
  const auto& text = field == TextField::Title ? report.title : report.description;
  Document doc;
  doc.bug_id = report.bug_id;
  doc.source_field = field;
  doc.tokens = remove_stopwords(lemmatizer(remove_stopwords(tokenize(clean_text(text, ctx, opts)), stoplist)),
                                stoplist);
  // A project name can surface only after cleanup ("1234567nova", "nova-")
  // or lemmatization ("novas"); mark it like a whole-word match.
  const auto own = lower(ctx.own_project());
  for (auto& t : doc.tokens) {
    if (!own.empty() && t == own) {
      t = "<internal_project>";
    } else if (ctx.known_projects().count(t)) {
      t = "<external_project>";
    }
  }
  return doc;
}

std::string detokenize(const std::vector<std::string>& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

}  // namespace buggin
