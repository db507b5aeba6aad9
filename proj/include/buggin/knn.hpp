#pragma once

#include "buggin/matrix.hpp"
#include "buggin/model_config.hpp"

namespace buggin {

struct KnnOptions {
  int n_neighbors = 5;
  DistanceMetric metric = DistanceMetric::Euclidean;
  NeighborWeights weights = NeighborWeights::Uniform;
};

struct KnnVote {
  double score = 0.0;  // (weighted) Intrinsic fraction among the neighbours
  int nearest_label = 0;
  int label() const;   // > 0.5 -> 1, < 0.5 -> 0, exact 0.5 -> nearest_label
};

// Neighbours ordered by (distance, training row). k is clamped to the
// training size. Under distance weighting, neighbours at distance 0 take
// all the weight when present.
KnnVote knn_vote(const FeatureMatrix& train, RowView query, const KnnOptions& options);

double distance(DistanceMetric m, RowView a, RowView b);

}  // namespace buggin
