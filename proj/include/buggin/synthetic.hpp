#pragma once

#include <cstdint>
#include <vector>

#include "buggin/corpus.hpp"
#include "buggin/features.hpp"

namespace buggin {

// Every Intrinsic title carries "regression" or "typo"; no NonIntrinsic
// title carries either, so a single title token separates the classes.
// Descriptions mix URLs, hex ids, tracebacks and project names and are not
// separable.
struct SyntheticCorpusSpec {
  std::size_t n_intrinsic = 240;
  std::size_t n_non_intrinsic = 160;
  std::uint64_t seed = 7;
};

std::vector<BugReport> synthetic_reports(const SyntheticCorpusSpec& spec);

// Gaussian clouds, one per class, centres `separation` apart along the
// first axis.
EmbeddingTable synthetic_embeddings(const Corpus& corpus, std::size_t dimension, double separation,
                                    std::uint64_t seed);

}  // namespace buggin
