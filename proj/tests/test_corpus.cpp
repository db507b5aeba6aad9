#include <gtest/gtest.h>

#include <atomic>
#include <thread>

#include <httplib.h>

#include "buggin/corpus.hpp"
#include "buggin/error.hpp"
#include "buggin/remote.hpp"
#include "test_util.hpp"

using namespace buggin;
using namespace buggin::testing;

namespace {

BugReport make(std::string id, bool is_bug, bool has_bic, std::string title = "t", std::string desc = "d") {
  BugReport r;
  r.bug_id = std::move(id);
  r.project = "nova";
  r.title = std::move(title);
  r.description = std::move(desc);
  r.is_bug = is_bug;
  r.has_bic = has_bic;
  return r;
}

std::string random_text(Pcg32& rng) {
  static const std::vector<std::string> pieces = {"a", "Nova", " ", ",", "\"", "\n", "\r\n", "é", "x y", "''", "0",
                                                  "\t", "{}", "\\"};
  std::string s;
  const auto n = rng.bounded(8);
  for (std::uint64_t i = 0; i < n; ++i) s += pieces[rng.bounded(pieces.size())];
  return s;
}

}  // namespace

TEST(Labels, TruthTableOfTheFourFlagCombinations) {
  EXPECT_EQ(derive_label(true, true), Label::Intrinsic);
  EXPECT_EQ(derive_label(true, false), Label::NonIntrinsic);
  EXPECT_EQ(derive_label(false, true), Label::NonIntrinsic);
  EXPECT_EQ(derive_label(false, false), Label::NonIntrinsic);
  EXPECT_EQ(encode(Label::Intrinsic), 1);
  EXPECT_EQ(encode(Label::NonIntrinsic), 0);
}

TEST(Labels, DerivationIsIdempotentOverRecords) {
  const Corpus a({make("1", true, true), make("2", true, false), make("3", false, true), make("4", false, false)});
  const Corpus b(a.reports());
  EXPECT_EQ(a.labels(), b.labels());
  EXPECT_EQ(a.encoded_labels(), (std::vector<int>{1, 0, 0, 0}));
}

TEST(LoadCorpus, CsvPreservesRowOrderAndDerivesLabels) {
  const std::string text =
      "bug_id,project,is_bug,has_bic,title,description\n"
      "b2,nova,1,1,\"Crash, on boot\",\"line1\nline2\"\n"
      "a1,neutron,true,no,Title,\n";
  const auto c = parse_corpus(text, CorpusFormat::Csv);
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c.reports()[0].bug_id, "b2");
  EXPECT_EQ(c.reports()[0].title, "Crash, on boot");
  EXPECT_EQ(c.reports()[0].description, "line1\nline2");
  EXPECT_EQ(c.labels()[0], Label::Intrinsic);
  EXPECT_EQ(c.labels()[1], Label::NonIntrinsic);
  EXPECT_EQ(c.reports()[1].description, "");
}

TEST(LoadCorpus, ColumnsMayComeInAnyOrder) {
  const auto c = parse_corpus("title,description,has_bic,is_bug,project,bug_id\nT,D,1,1,nova,7\n", CorpusFormat::Csv);
  EXPECT_EQ(c.reports()[0].bug_id, "7");
  EXPECT_EQ(c.labels()[0], Label::Intrinsic);
}

TEST(LoadCorpus, HeaderOnlyFileIsAnEmptyCorpus) {
  EXPECT_EQ(parse_corpus(std::string(kCorpusHeader) + "\n", CorpusFormat::Csv).size(), 0u);
  EXPECT_EQ(parse_corpus("", CorpusFormat::Jsonl).size(), 0u);
}

TEST(LoadCorpus, NonBooleanFlagIsAParseErrorNamingTheRow) {
  const std::string text = std::string(kCorpusHeader) + "\n1,nova,1,1,t,d\n2,nova,1,maybe,t,d\n";
  try {
    parse_corpus(text, CorpusFormat::Csv);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("row 2"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("has_bic"), std::string::npos) << e.what();
  }
}

TEST(LoadCorpus, MissingFieldIsASchemaErrorNamingRowAndField) {
  try {
    parse_corpus("bug_id,project,is_bug,title,description\n1,nova,1,t,d\n", CorpusFormat::Csv);
    FAIL() << "expected SchemaError";
  } catch (const SchemaError& e) {
    EXPECT_NE(std::string(e.what()).find("has_bic"), std::string::npos) << e.what();
  }
  try {
    parse_corpus(R"({"bug_id":"1","project":"p","is_bug":true,"has_bic":true,"title":"t"})"
                 "\n",
                 CorpusFormat::Jsonl);
    FAIL() << "expected SchemaError";
  } catch (const SchemaError& e) {
    EXPECT_NE(std::string(e.what()).find("description"), std::string::npos) << e.what();
  }
}

TEST(LoadCorpus, DuplicateIdIsAUniquenessError) {
  const std::string text = std::string(kCorpusHeader) + "\n1,nova,1,1,t,d\n1,nova,0,0,t,d\n";
  EXPECT_THROW(parse_corpus(text, CorpusFormat::Csv), UniquenessError);
}

TEST(LoadCorpus, JsonlAcceptsBooleansAndIntegers) {
  const std::string text =
      R"({"bug_id":"1","project":"p","is_bug":true,"has_bic":1,"title":"t","description":"d"})"
      "\n"
      R"({"bug_id":"2","project":"p","is_bug":0,"has_bic":false,"title":"t","description":"d"})"
      "\n";
  const auto c = parse_corpus(text, CorpusFormat::Jsonl);
  EXPECT_EQ(c.encoded_labels(), (std::vector<int>{1, 0}));
}

TEST(LoadCorpus, FileRoundTripIsIdentityForBothFormats) {
  TempDir dir;
  Pcg32 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<BugReport> rs;
    const auto n = uniform_int(rng, 1, 12);
    for (std::size_t i = 0; i < n; ++i) {
      auto r = make("id-" + std::to_string(i) + "-" + random_text(rng), rng.bounded(2), rng.bounded(2), random_text(rng),
                    random_text(rng));
      r.project = random_text(rng);
      rs.push_back(r);
    }
    const Corpus c(rs);
    for (auto fmt : {CorpusFormat::Csv, CorpusFormat::Jsonl}) {
      const auto path = dir / (fmt == CorpusFormat::Csv ? "c.csv" : "c.jsonl");
      save_corpus(c, path, fmt);
      const auto back = load_corpus(path, fmt);
      ASSERT_EQ(back.reports(), c.reports()) << "trial " << trial;
      EXPECT_EQ(back.fingerprint(), c.fingerprint());
    }
  }
}

TEST(LoadCorpus, FingerprintTracksContent) {
  const Corpus a({make("1", true, true), make("2", false, false)});
  auto rs = a.reports();
  rs[1].title += "!";
  const Corpus b(rs);
  EXPECT_NE(a.fingerprint(), b.fingerprint());
  EXPECT_EQ(a.fingerprint(), Corpus(a.reports()).fingerprint());
  EXPECT_EQ(a.fingerprint().size(), 64u);
}

TEST(Holdout, ReferenceSizedCorpusSplitsIntoExactClassCounts) {
  std::vector<int> labels(1120, 1);
  labels.insert(labels.end(), 760, 0);
  for (std::uint64_t seed : {0ull, 1ull, 12345ull}) {
    const auto plan = stratified_holdout(labels, 0.8, seed);
    ASSERT_EQ(plan.train_indices.size(), 1504u);
    ASSERT_EQ(plan.test_indices.size(), 376u);
    std::size_t pos = 0;
    for (auto i : plan.train_indices) pos += static_cast<std::size_t>(labels[i]);
    EXPECT_EQ(pos, 896u);
    EXPECT_EQ(plan.train_indices.size() - pos, 608u);
  }
}

TEST(Holdout, TenBalancedReportsAtHalf) {
  const std::vector<int> labels = {1, 1, 1, 1, 1, 0, 0, 0, 0, 0};
  const auto plan = stratified_holdout(labels, 0.5, 3);
  ASSERT_EQ(plan.train_indices.size(), 5u);
  std::size_t pos = 0;
  for (auto i : plan.train_indices) pos += static_cast<std::size_t>(labels[i]);
  EXPECT_TRUE(pos == 2 || pos == 3);
}

TEST(Holdout, RejectsMissingClassAndBadRatio) {
  EXPECT_THROW(stratified_holdout(std::vector<int>{1, 1, 1}, 0.8, 0), StratificationError);
  EXPECT_THROW(stratified_holdout(std::vector<int>{1, 0}, 0.0, 0), ValidationError);
  EXPECT_THROW(stratified_holdout(std::vector<int>{1, 0}, 1.0, 0), ValidationError);
}

TEST(HoldoutProperty, PartitionAndPerClassBoundOverRandomCorpora) {
  Pcg32 meta(2024);
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto n = uniform_int(meta, 2, 500);
    const auto labels = random_labels(meta, n, 1);
    const double ratio = uniform(meta, 0.05, 0.95);
    const auto plan = stratified_holdout(labels, ratio, seed);
    const auto again = stratified_holdout(labels, ratio, seed);
    ASSERT_EQ(plan.train_indices, again.train_indices);

    std::vector<int> seen(n, 0);
    for (auto i : plan.train_indices) ++seen[i];
    for (auto i : plan.test_indices) ++seen[i];
    for (std::size_t i = 0; i < n; ++i) ASSERT_EQ(seen[i], 1) << "index " << i << " seed " << seed;
    ASSERT_TRUE(std::is_sorted(plan.train_indices.begin(), plan.train_indices.end()));

    for (int c = 0; c <= 1; ++c) {
      std::size_t nc = 0, tc = 0;
      for (std::size_t i = 0; i < n; ++i) nc += labels[i] == c;
      for (auto i : plan.train_indices) tc += labels[i] == c;
      const double target = ratio * static_cast<double>(nc);
      ASSERT_LE(std::abs(static_cast<double>(tc) - target), 1.0) << "seed " << seed << " class " << c;
    }
  }
}

// ---- remote client against a local mock tracker ------------------------------

class MockTracker : public ::testing::Test {
 protected:
  void SetUp() override {
    server_.Get(R"(/api/bugs/(\w+))", [this](const httplib::Request& req, httplib::Response& res) {
      const std::string id = req.matches[1];
      ++hits_;
      if (id == "42") {
        res.set_content(R"({"title": "Boot fails", "description": null, "target_name": "nova"})",
                        "application/json");
      } else if (id == "truncated") {
        res.set_content(R"({"title": "Boot fa)", "application/json");
      } else if (id == "flaky") {
        if (hits_ < 3) {
          res.status = 503;
        } else {
          res.set_content(R"({"title": "ok", "description": "later"})", "application/json");
        }
      } else if (id == "down") {
        res.status = 500;
      } else if (id == "slow") {
        std::this_thread::sleep_for(std::chrono::milliseconds(400));
        res.set_content(R"({"title": "late", "description": ""})", "application/json");
      } else {
        res.status = 404;
      }
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  void TearDown() override {
    server_.stop();
    thread_.join();
  }
  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_) + "/api"; }

  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> hits_{0};
  const RetryPolicy fast_{3, std::chrono::milliseconds(1)};
};

TEST_F(MockTracker, FetchesTitleAndDescriptionWithFlagsUnset) {
  const auto r = fetch_remote_report(endpoint(), "42", std::chrono::milliseconds(2000), fast_);
  EXPECT_EQ(r.bug_id, "42");
  EXPECT_EQ(r.title, "Boot fails");
  EXPECT_EQ(r.description, "");
  EXPECT_EQ(r.project, "nova");
  EXPECT_FALSE(r.is_bug.has_value());
  EXPECT_FALSE(r.has_bic.has_value());
}

TEST_F(MockTracker, UnknownIdIsNotFound) {
  EXPECT_THROW(fetch_remote_report(endpoint(), "nope", std::chrono::milliseconds(2000), fast_), NotFoundError);
  EXPECT_EQ(hits_, 1);
}

TEST_F(MockTracker, TruncatedBodyIsADecodeError) {
  EXPECT_THROW(fetch_remote_report(endpoint(), "truncated", std::chrono::milliseconds(2000), fast_), DecodeError);
}

TEST_F(MockTracker, ServerErrorsAreRetriedThenSucceed) {
  const auto r = fetch_remote_report(endpoint(), "flaky", std::chrono::milliseconds(2000), fast_);
  EXPECT_EQ(r.title, "ok");
  EXPECT_EQ(hits_, 3);
}

TEST_F(MockTracker, PersistentServerErrorExhaustsThreeRetries) {
  EXPECT_THROW(fetch_remote_report(endpoint(), "down", std::chrono::milliseconds(2000), fast_), TransportError);
  EXPECT_EQ(hits_, 4);
}

TEST_F(MockTracker, TimeoutIsARetriedTransportError) {
  EXPECT_THROW(fetch_remote_report(endpoint(), "slow", std::chrono::milliseconds(100), fast_), TransportError);
  EXPECT_EQ(hits_, 4);
}

TEST_F(MockTracker, CorpusTextFetchKeepsLabels) {
  BugReport a;
  a.bug_id = "42";
  a.is_bug = true;
  a.has_bic = true;
  const auto c = fetch_corpus_text(endpoint(), {a}, std::chrono::milliseconds(2000), fast_);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c.reports()[0].title, "Boot fails");
  EXPECT_EQ(c.labels()[0], Label::Intrinsic);
}

TEST(Remote, RejectsEmptyIdAndSchemelessEndpoint) {
  EXPECT_THROW(fetch_remote_report("http://127.0.0.1:1", "", std::chrono::milliseconds(10)), ValidationError);
  EXPECT_THROW(fetch_remote_report("localhost", "1", std::chrono::milliseconds(10)), ConfigError);
}
