#include "buggin/knn.hpp"

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "buggin/error.hpp"

namespace buggin {

int KnnVote::label() const {
  if (score > 0.5) return 1;
  if (score < 0.5) return 0;
  return nearest_label;
}

double distance(DistanceMetric m, RowView a, RowView b) {
  return m == DistanceMetric::Euclidean ? std::sqrt(squared_distance(a, b)) : manhattan_distance(a, b);
}

KnnVote knn_vote(const FeatureMatrix& train, RowView query, const KnnOptions& options) {
  if (options.n_neighbors < 1) throw ConfigError("n_neighbors must be >= 1");
  const std::size_t n = train.n_rows();
  if (n == 0) throw TrainingError("knn has no training rows");
  std::vector<std::pair<double, std::size_t>> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = {distance(options.metric, query, train.row(i)), i};
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(options.n_neighbors), n);
  std::partial_sort(d.begin(), d.begin() + static_cast<long>(k), d.end());

  const auto& y = train.labels();
  KnnVote vote;
  vote.nearest_label = y[d[0].second] != 0 ? 1 : 0;
  double num = 0.0, den = 0.0;
  if (options.weights == NeighborWeights::Distance && d[0].first == 0.0) {
    for (std::size_t t = 0; t < k && d[t].first == 0.0; ++t) {
      num += y[d[t].second] != 0 ? 1.0 : 0.0;
      den += 1.0;
    }
  } else {
    for (std::size_t t = 0; t < k; ++t) {
      const double w = options.weights == NeighborWeights::Uniform ? 1.0 : 1.0 / d[t].first;
      num += y[d[t].second] != 0 ? w : 0.0;
      den += w;
    }
  }
  vote.score = num / den;
  return vote;
}

}  // namespace buggin
