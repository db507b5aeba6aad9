#include <gtest/gtest.h>

#include <cctype>
#include <regex>

#include "buggin/textprep.hpp"
#include "test_util.hpp"

using namespace buggin;
using namespace buggin::testing;

namespace {

const Preprocessor& prep() {
  static const Preprocessor p = Preprocessor::from_fixtures(default_fixture_dir());
  return p;
}

ProjectContext nova() { return ProjectContext("nova", {"nova", "keystone", "neutron"}); }

std::vector<std::string> toks(std::initializer_list<const char*> v) { return {v.begin(), v.end()}; }

std::string noisy_text(Pcg32& rng) {
  static const std::vector<std::string> pieces = {
      "Fix",        "the",       "failures",        "FAILING",     "is",           "nova",     "Keystone",
      "neutron's",  "42",        "3.14",            "a1b2c3d4e5f", "deadbeef99",   "decade",   "cafe",
      "https://bugs.launchpad.net/nova/+bug/1",     "www.example.org/nova", "http://x.y/z?q=1",
      "(boom)",     "--flag",    "snake_case_name", "x-y",         "don't",        "e.g.",     "<url>",
      "<internal project>", "\n", "\t", "  ", "Traceback (most recent call last):\n  File \"a.py\", line 3\n    x()\n",
      "errors:",    "re-run",    "1234567",         "caching",     "stopped",      "__init__", "Ünïcode", "tries"};
  std::string s;
  const auto n = rng.bounded(14);
  for (std::uint64_t i = 0; i < n; ++i) {
    s += pieces[rng.bounded(pieces.size())];
    s += rng.bounded(4) ? " " : "";
  }
  return s;
}

BugReport report(std::string title, std::string desc = "") {
  BugReport r;
  r.bug_id = "1";
  r.project = "nova";
  r.title = std::move(title);
  r.description = std::move(desc);
  r.is_bug = true;
  r.has_bic = true;
  return r;
}

}  // namespace

TEST(CleanText, UrlRuleRunsBeforeProjectNames) {
  EXPECT_EQ(clean_text("Fix https://bugs.launchpad.net/nova/+bug/1 now", nova()), "fix <url> now");
}

TEST(CleanText, HexIdsWithADigitAreDeleted) {
  EXPECT_EQ(clean_text("commit a1b2c3d4e5f broke the gate", nova()), "commit broke the gate");
  // no digit, or too short: ordinary words survive
  EXPECT_EQ(clean_text("decade cafe abc123", nova()), "decade cafe abc");
}

TEST(CleanText, ProjectsBecomeInternalOrExternalMarkers) {
  EXPECT_EQ(clean_text("nova fails after keystone upgrade", nova()),
            "<internal project> fails after <external project> upgrade");
  EXPECT_EQ(clean_text("Nova-compute and NEUTRON", nova()), "nova-compute and <external project>");
}

TEST(CleanText, TracebackBlockIsDropped) {
  const std::string raw =
      "Boot fails\nTraceback (most recent call last):\n  File \"x.py\", line 1, in <module>\n    boom()\n"
      "ValueError: nope\nafter";
  EXPECT_EQ(clean_text(raw, nova()), "boot fails valueerror nope after");
}

TEST(CleanText, NumeralsAndSpecialsGo) {
  EXPECT_EQ(clean_text("Error 500: it's (really) broken!!", nova()), "error its really broken");
}

TEST(Tokenize, Examples) {
  EXPECT_EQ(tokenize("fix <url> now"), toks({"fix", "<url>", "now"}));
  EXPECT_TRUE(tokenize("").empty());
  EXPECT_EQ(tokenize("<internal project> down"), toks({"<internal_project>", "down"}));
  EXPECT_EQ(tokenize("<external project>"), toks({"<external_project>"}));
}

TEST(Stopwords, Examples) {
  const auto& sl = prep().stoplist;
  const Stoplist small = {"the", "is"};
  EXPECT_EQ(remove_stopwords(toks({"the", "gate", "is", "down"}), small), toks({"gate", "down"}));
  // the shipped list also drops "down"
  EXPECT_EQ(remove_stopwords(toks({"the", "gate", "is", "down"}), sl), toks({"gate"}));
  EXPECT_TRUE(remove_stopwords({}, sl).empty());
  Stoplist evil = sl;
  evil.insert("<url>");
  EXPECT_EQ(remove_stopwords(toks({"<url>"}), evil), toks({"<url>"}));
}

TEST(Lemmatize, Examples) {
  const auto& lm = prep().lemmatizer;
  EXPECT_EQ(lm(toks({"failures", "failing"})), toks({"failure", "fail"}));
  EXPECT_EQ(lm(toks({"gas"})), toks({"gas"}));
  EXPECT_EQ(lm(toks({"<url>"})), toks({"<url>"}));
  EXPECT_EQ(lm.lemma("ran"), "run");
}

TEST(Lemmatize, SuffixRulesAndRepairs) {
  const auto& lm = prep().lemmatizer;
  EXPECT_EQ(lm.lemma("classes"), "class");
  EXPECT_EQ(lm.lemma("policies"), "policy");
  EXPECT_EQ(lm.lemma("boxes"), "box");
  EXPECT_EQ(lm.lemma("patches"), "patch");
  EXPECT_EQ(lm.lemma("stopped"), "stop");    // doubled consonant
  EXPECT_EQ(lm.lemma("running"), "run");
  EXPECT_EQ(lm.lemma("hoping"), "hope");     // silent e
  EXPECT_EQ(lm.lemma("created"), "create");  // -at + e
  EXPECT_EQ(lm.lemma("installed"), "install");
  EXPECT_EQ(lm.lemma("status"), "status");
  EXPECT_EQ(lm.lemma("process"), "process");
  EXPECT_EQ(lm.lemma("analysis"), "analysis");
  EXPECT_EQ(lm.lemma("bed"), "bed");
  EXPECT_EQ(lm.lemma("sing"), "sing");
}

TEST(Lemmatize, LemmaOfALemmaIsStable) {
  const auto& lm = prep().lemmatizer;
  for (const char* w : {"failures", "classes", "stopped", "policies", "hoping", "buses", "addresses", "updates"}) {
    const auto once = lm.lemma(w);
    EXPECT_EQ(lm.lemma(once), once) << w;
  }
}

TEST(Preprocess, EmptyDescriptionGivesEmptyDocument) {
  const auto d = prep()(report("anything"), TextField::Description);
  EXPECT_TRUE(d.tokens.empty());
  EXPECT_EQ(d.source_field, TextField::Description);
}

TEST(Preprocess, TitleFromATypicalReport) {
  const auto d = prep()(report("Nova fails to boot instances after keystone token caching was enabled"),
                        TextField::Title);
  EXPECT_EQ(d.tokens, toks({"<internal_project>", "fail", "boot", "instance", "<external_project>", "token", "cache",
                            "enable"}));
  EXPECT_EQ(prep()(report("Nova fails to boot instances after keystone token caching was enabled"), TextField::Title),
            d);
}

TEST(Preprocess, ProjectNamesExposedByCleanupAreMarked) {
  const auto d = prep()(report("1234567nova keystones nova- fine"), TextField::Title);
  EXPECT_EQ(d.tokens, toks({"<internal_project>", "<external_project>", "<internal_project>", "fine"}));
}

TEST(Preprocess, FingerprintDependsOnFixturesAndTracebackHeaders) {
  Preprocessor a = prep();
  Preprocessor b = prep();
  EXPECT_EQ(a.fingerprint(), b.fingerprint());
  b.clean.traceback_headers.push_back("panic:");
  EXPECT_NE(a.fingerprint(), b.fingerprint());
}

TEST(PreprocessProperty, DocumentsAreCleanAndIdempotent) {
  const std::regex allowed("^[a-z_<>-]+$");
  const std::regex numeral("[0-9]");
  const std::regex url("(https?://|www\\.)");
  Pcg32 rng(99);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto text = noisy_text(rng);
    const auto r = report(text);
    const auto d = prep()(r, TextField::Title);
    for (const auto& t : d.tokens) {
      ASSERT_TRUE(std::regex_match(t, allowed)) << "token '" << t << "' from: " << text;
      ASSERT_FALSE(std::regex_search(t, numeral)) << t;
      ASSERT_FALSE(std::regex_search(t, url)) << t;
      ASSERT_FALSE(prep().stoplist.count(t)) << "stopword '" << t << "' from: " << text;
      if (t.front() == '<') {
        ASSERT_TRUE(is_sentinel(t)) << t;
      }
    }
    const auto again = prep()(report(detokenize(d.tokens)), TextField::Title);
    ASSERT_EQ(again.tokens, d.tokens) << "not idempotent on: " << text;
  }
}

TEST(PreprocessProperty, DelimitedHexIdsVanishCompletely) {
  Pcg32 rng(21);
  const std::string hexdigits = "0123456789abcdef";
  const std::vector<std::string> seps = {" ", ", ", " (", ": ", "\n"};
  for (int trial = 0; trial < 500; ++trial) {
    const auto len = uniform_int(rng, 7, 40);
    std::string id;
    for (std::size_t i = 0; i < len; ++i) id.push_back(hexdigits[rng.bounded(16)]);
    id[rng.bounded(len)] = static_cast<char>('0' + rng.bounded(10));
    if (rng.bounded(2)) {
      for (auto& c : id) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    }
    const auto text = "gate" + seps[rng.bounded(seps.size())] + id + seps[rng.bounded(seps.size())] + "broke";
    ASSERT_EQ(clean_text(text, nova()), "gate broke") << text;
  }
  // six characters, or no digit: kept (letters survive digit deletion)
  EXPECT_EQ(clean_text("gate a1b2c3 broke", nova()), "gate abc broke");
  EXPECT_EQ(clean_text("gate deadbeef broke", nova()), "gate deadbeef broke");
}

TEST(PreprocessProperty, UrlContainingAProjectNeverYieldsAProjectMarker) {
  Pcg32 rng(5);
  const std::vector<std::string> urls = {"https://review.opendev.org/nova/", "http://keystone.example.org",
                                         "www.neutron.io/x-nova_y"};
  for (int trial = 0; trial < 200; ++trial) {
    const auto& u = urls[rng.bounded(urls.size())];
    const auto out = clean_text("see " + u + "?id=" + std::to_string(trial) + " please", nova());
    EXPECT_EQ(out, "see <url> please");
  }
}
