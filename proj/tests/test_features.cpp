#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include "buggin/error.hpp"
#include "buggin/features.hpp"
#include "buggin/io.hpp"
#include "test_util.hpp"

using namespace buggin;
using namespace buggin::testing;

namespace {

Document doc(std::string id, std::vector<std::string> tokens) {
  Document d;
  d.bug_id = std::move(id);
  d.tokens = std::move(tokens);
  return d;
}

// Independent recount: tf * (ln((1+N)/(1+df)) + 1), normalised.
std::map<std::string, double> oracle_row(const std::vector<Document>& fit, const Document& d) {
  std::map<std::string, std::size_t> df;
  for (const auto& f : fit) {
    for (const auto& t : std::set<std::string>(f.tokens.begin(), f.tokens.end())) ++df[t];
  }
  std::map<std::string, double> w;
  for (const auto& t : d.tokens) {
    if (!df.count(t)) continue;
    w[t] += std::log((1.0 + fit.size()) / (1.0 + df[t])) + 1.0;
  }
  double norm = 0.0;
  for (auto& [t, v] : w) norm += v * v;
  norm = std::sqrt(norm);
  for (auto& [t, v] : w) v /= norm;
  return w;
}

void write(const std::filesystem::path& p, const std::string& s) { write_file_atomic(p, s); }

}  // namespace

TEST(Tfidf, IdfOfTwoDocuments) {
  const auto m = TfidfModel::fit({doc("1", {"a", "b"}), doc("2", {"a"})});
  ASSERT_EQ(m.terms(), (std::vector<std::string>{"a", "b"}));
  EXPECT_DOUBLE_EQ(m.idf()[0], 1.0);
  EXPECT_NEAR(m.idf()[1], 1.405465, 1e-6);
  EXPECT_EQ(m.n_docs_fitted(), 2u);
  EXPECT_EQ(m.fitted_ids(), (std::vector<std::string>{"1", "2"}));
}

TEST(Tfidf, SingleDocumentAndRepeatedTokens) {
  EXPECT_DOUBLE_EQ(TfidfModel::fit({doc("1", {"x"})}).idf()[0], 1.0);
  const auto m = TfidfModel::fit({doc("1", {"a", "a", "a"}), doc("2", {"b"})});
  EXPECT_DOUBLE_EQ(m.idf()[0], m.idf()[1]);
}

TEST(Tfidf, TransformExamples) {
  const auto m = TfidfModel::fit({doc("1", {"a", "b"}), doc("2", {"a"})});
  const auto r = m.transform(doc("q", {"a", "b", "b"}));
  ASSERT_EQ(r.size(), 2u);
  // (1, 2 * idf_b) / |.|, recomputed by hand: 1 / sqrt(1 + 2.810930^2)
  const double idf_b = std::log(1.5) + 1.0;
  const double norm = std::sqrt(1.0 + 4.0 * idf_b * idf_b);
  EXPECT_NEAR(r[0].second, 1.0 / norm, 1e-12);
  EXPECT_NEAR(r[1].second, 2.0 * idf_b / norm, 1e-12);
  EXPECT_NEAR(r[0].second, 0.335176, 1e-6);
  EXPECT_NEAR(r[1].second, 0.942155, 1e-6);
  EXPECT_TRUE(m.transform(doc("z", {"z"})).empty());
  const auto a = m.transform(doc("a", {"a"}));
  ASSERT_EQ(a.size(), 1u);
  EXPECT_EQ(a[0].first, 0u);
  EXPECT_DOUBLE_EQ(a[0].second, 1.0);
}

TEST(Tfidf, Errors) {
  EXPECT_THROW(TfidfModel::fit({}), ValidationError);
  EXPECT_THROW(TfidfModel::fit({doc("1", {}), doc("2", {})}), EmptyVocabularyError);
}

TEST(Tfidf, JsonRoundTrip) {
  const auto m = TfidfModel::fit({doc("1", {"a", "b"}), doc("2", {"a", "c"})});
  const auto back = TfidfModel::from_json(m.to_json());
  EXPECT_EQ(back.terms(), m.terms());
  EXPECT_EQ(back.idf(), m.idf());
  EXPECT_EQ(back.transform(doc("q", {"c", "a"})), m.transform(doc("q", {"c", "a"})));
}

TEST(TfidfProperty, MatchesBruteForceAndIsNormalised) {
  Pcg32 rng(77);
  for (int trial = 0; trial < 300; ++trial) {
    const auto n_docs = uniform_int(rng, 1, 20);
    const auto n_terms = uniform_int(rng, 1, 15);
    std::vector<Document> docs;
    for (std::size_t i = 0; i < n_docs; ++i) {
      std::vector<std::string> t;
      const auto len = uniform_int(rng, 0, 8);
      for (std::size_t k = 0; k < len; ++k) t.push_back("t" + std::to_string(rng.bounded(n_terms)));
      docs.push_back(doc(std::to_string(i), t));
    }
    docs[0].tokens.push_back("t0");  // at least one token overall
    const auto m = TfidfModel::fit(docs);
    for (const auto& d : docs) {
      const auto row = m.transform(d);
      const auto expect = oracle_row(docs, d);
      ASSERT_EQ(row.size(), expect.size());
      double norm = 0.0;
      for (const auto& [col, v] : row) {
        ASSERT_NEAR(v, expect.at(m.terms()[col]), 1e-12);
        norm += v * v;
      }
      if (!row.empty()) {
        ASSERT_NEAR(std::sqrt(norm), 1.0, 1e-12);
      }
    }
  }
}

TEST(TfidfProperty, PermutingDocumentsOnlyPermutesColumns) {
  Pcg32 rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Document> docs;
    for (int i = 0; i < 8; ++i) {
      std::vector<std::string> t;
      for (int k = 0; k < 5; ++k) t.push_back("w" + std::to_string(rng.bounded(10)));
      docs.push_back(doc(std::to_string(i), t));
    }
    auto perm = docs;
    shuffle(std::span<Document>(perm), rng);
    const auto m1 = TfidfModel::fit(docs);
    const auto m2 = TfidfModel::fit(perm);
    for (const auto& d : docs) {
      std::map<std::string, double> a, b;
      for (auto [c, v] : m1.transform(d)) a[m1.terms()[c]] = v;
      for (auto [c, v] : m2.transform(d)) b[m2.terms()[c]] = v;
      ASSERT_EQ(a.size(), b.size());
      for (const auto& [t, v] : a) ASSERT_NEAR(v, b.at(t), 1e-12);
    }
  }
}

TEST(Assemble, TfidfRowsFollowDocumentOrder) {
  const std::vector<Document> docs = {doc("x", {"a"}), doc("y", {}), doc("z", {"b", "a"})};
  const auto m = TfidfModel::fit(docs);
  const auto fm = assemble_matrix(m, docs, {1, 0, 1});
  EXPECT_EQ(fm.storage(), Storage::Sparse);
  EXPECT_EQ(fm.row_ids(), (std::vector<std::string>{"x", "y", "z"}));
  EXPECT_EQ(fm.labels(), (std::vector<int>{1, 0, 1}));
  EXPECT_EQ(fm.row(1).values.size(), 0u);
  EXPECT_EQ(assemble_matrix(m, {}, {}).n_rows(), 0u);
}

class DenseImport : public ::testing::Test {
 protected:
  std::filesystem::path manifest(const std::string& rows, int dim = 4, int count = 2) {
    write(dir_ / "vectors.jsonl", rows);
    write(dir_ / "manifest.json", "{\"model_name\": \"m\", \"dimension\": " + std::to_string(dim) +
                                      ", \"count\": " + std::to_string(count) + "}");
    return dir_ / "manifest.json";
  }
  TempDir dir_;
};

TEST_F(DenseImport, ReadsAValidTable) {
  const auto t = import_dense(manifest("{\"id\": \"1\", \"v\": [1, 2, 3, 4]}\n{\"id\": \"2\", \"v\": [0, 0, 0, 0.5]}\n"));
  EXPECT_EQ(t.dimension, 4u);
  EXPECT_EQ(t.model_name, "m");
  ASSERT_EQ(t.vectors.size(), 2u);
  EXPECT_EQ(t.vectors.at("2")[3], 0.5);
}

TEST_F(DenseImport, ShortRowIsAFormatErrorNamingTheId) {
  try {
    import_dense(manifest("{\"id\": \"1\", \"v\": [1, 2, 3, 4]}\n{\"id\": \"bad7\", \"v\": [1, 2, 3]}\n"));
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("bad7"), std::string::npos);
  }
}

TEST_F(DenseImport, NonFiniteComponentIsAValidationError) {
  EXPECT_THROW(import_dense(manifest("{\"id\": \"1\", \"v\": [1, 2, 3, 4]}\n{\"id\": \"2\", \"v\": [1, NaN, 3, 4]}\n")),
               Error);
  EXPECT_THROW(import_dense(manifest("{\"id\": \"1\", \"v\": [1, 2, 3, 1e999]}\n{\"id\": \"2\", \"v\": [1, 2, 3, 4]}\n")),
               ValidationError);
}

TEST_F(DenseImport, DuplicateIdIsRejected) {
  EXPECT_THROW(import_dense(manifest("{\"id\": \"1\", \"v\": [1, 2, 3, 4]}\n{\"id\": \"1\", \"v\": [1, 2, 3, 4]}\n")),
               UniquenessError);
}

TEST_F(DenseImport, CountMismatchIsAFormatError) {
  EXPECT_THROW(import_dense(manifest("{\"id\": \"1\", \"v\": [1, 2, 3, 4]}\n", 4, 2)), FormatError);
}

TEST_F(DenseImport, ExportThenImportIsLossless) {
  EmbeddingTable t;
  t.model_name = "roundtrip";
  t.dimension = 3;
  t.vectors = {{"a", {0.1, -2.5, 1e-300}}, {"b", {1.0 / 3.0, 0, 7}}};
  export_dense(t, dir_ / "out" / "manifest.json", {"b", "a"});
  const auto back = import_dense(dir_ / "out" / "manifest.json");
  EXPECT_EQ(back.vectors, t.vectors);
  EXPECT_EQ(back.model_name, "roundtrip");
}

TEST_F(DenseImport, AssemblyListsEveryMissingId) {
  const auto t = import_dense(manifest("{\"id\": \"1\", \"v\": [1, 2, 3, 4]}\n{\"id\": \"2\", \"v\": [0, 0, 0, 0.5]}\n"));
  const auto m = assemble_matrix(t, {"2", "1"}, {0, 1});
  EXPECT_EQ(m.storage(), Storage::Dense);
  EXPECT_EQ(m.dense_row(1), (std::vector<double>{1, 2, 3, 4}));
  try {
    assemble_matrix(t, {"1", "x9", "y8"}, {0, 1, 0});
    FAIL();
  } catch (const LookupError& e) {
    const std::string w = e.what();
    EXPECT_NE(w.find("x9"), std::string::npos);
    EXPECT_NE(w.find("y8"), std::string::npos);
  }
}

TEST(Matrix, SparseAndDenseAgreeOnDistances) {
  Pcg32 rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::vector<double>> rows(2, std::vector<double>(6));
    for (auto& r : rows) {
      for (auto& v : r) v = rng.bounded(3) ? 0.0 : uniform(rng, -2, 2);
    }
    const auto d = dense_matrix(rows, {0, 1});
    const auto s = to_sparse(d);
    double dd = 0, dm = 0, dp = 0;
    for (int j = 0; j < 6; ++j) {
      dd += (rows[0][j] - rows[1][j]) * (rows[0][j] - rows[1][j]);
      dm += std::abs(rows[0][j] - rows[1][j]);
      dp += rows[0][j] * rows[1][j];
    }
    ASSERT_NEAR(squared_distance(s.row(0), s.row(1)), dd, 1e-12);
    ASSERT_NEAR(squared_distance(d.row(0), s.row(1)), dd, 1e-12);
    ASSERT_NEAR(manhattan_distance(s.row(0), d.row(1)), dm, 1e-12);
    ASSERT_NEAR(dot(s.row(0), d.row(1)), dp, 1e-12);
    ASSERT_EQ(squared_distance(s.row(0), s.row(0)), 0.0);
  }
}

TEST(Matrix, JsonRoundTripAndSelection) {
  FeatureMatrix m(Storage::Sparse, 5);
  m.append_sparse("a", 1, {{3, 0.5}, {0, 1.0}, {4, 0.0}});
  m.append_sparse("b", 0, {});
  EXPECT_EQ(m.nnz(), 2u);
  EXPECT_EQ(m.at(0, 3), 0.5);
  EXPECT_THROW(m.append_sparse("c", 0, {{1, 1.0}, {1, 2.0}}), Error);
  EXPECT_EQ(FeatureMatrix::from_json(m.to_json()), m);
  const std::vector<std::size_t> pick = {1};
  const auto sel = m.select_rows(pick);
  EXPECT_EQ(sel.row_ids(), (std::vector<std::string>{"b"}));
}
