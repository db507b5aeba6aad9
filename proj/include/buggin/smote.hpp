#pragma once

#include <cstdint>

#include "buggin/matrix.hpp"

namespace buggin {

struct SmoteConfig {
  int k_neighbors = 5;
  std::uint64_t seed = 0;
  // Only "equalize" exists: oversample the minority until counts match.
};

// Appends synthetic minority rows x + u * (x_nn - x), u ~ U[0, 1), x_nn one
// of the k nearest minority neighbours of x (Euclidean; k clamped to
// minority - 1). Base samples are cycled round-robin in row order, and each
// synthetic row draws from its own stream derived from (seed, index).
// Original rows come first, unchanged; synthetic ids are "smote:<n>".
// Sparse rows are interpolated on the union of supports and not
// re-normalised.
//
// Throws BalanceError for single-class input, InsufficientMinorityError when
// the minority has fewer than 2 rows, ConfigError when k_neighbors < 1.
FeatureMatrix smote(const FeatureMatrix& matrix, const SmoteConfig& config);

}  // namespace buggin
