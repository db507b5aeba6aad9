#include "buggin/smote.hpp"

#include <algorithm>
#include <numeric>

#include "buggin/error.hpp"
#include "buggin/random.hpp"

namespace buggin {

FeatureMatrix smote(const FeatureMatrix& matrix, const SmoteConfig& config) {
  if (config.k_neighbors < 1) throw ConfigError("SMOTE k_neighbors must be >= 1");
  const auto& labels = matrix.labels();
  std::vector<std::size_t> by_class[2];
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i] != 0 ? 1 : 0].push_back(i);
  if (by_class[0].empty() || by_class[1].empty()) {
    throw BalanceError("SMOTE needs both classes present (got " + std::to_string(by_class[0].size()) + "/" +
                       std::to_string(by_class[1].size()) + ")");
  }
  const int minority_label = by_class[1].size() < by_class[0].size() ? 1 : 0;
  const auto& minority = by_class[minority_label];
  const auto& majority = by_class[1 - minority_label];
  if (minority.size() < 2) {
    throw InsufficientMinorityError("SMOTE needs at least 2 minority rows, got " + std::to_string(minority.size()));
  }

  FeatureMatrix out = matrix;
  const std::size_t needed = majority.size() - minority.size();
  if (needed == 0) return out;

  const std::size_t m = minority.size();
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(config.k_neighbors), m - 1);
  const std::size_t bases = std::min(m, needed);

  // neighbours[b] = k nearest other minority rows of minority[b]; ties by row order.
  std::vector<std::vector<std::size_t>> neighbours(bases);
  std::vector<std::pair<double, std::size_t>> dist(m);
  for (std::size_t b = 0; b < bases; ++b) {
    const auto xb = matrix.row(minority[b]);
    dist.clear();
    for (std::size_t o = 0; o < m; ++o) {
      if (o == b) continue;
      dist.emplace_back(squared_distance(xb, matrix.row(minority[o])), o);
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<long>(k), dist.end());
    for (std::size_t t = 0; t < k; ++t) neighbours[b].push_back(minority[dist[t].second]);
  }

  const bool dense = matrix.storage() == Storage::Dense;
  std::vector<double> buf;
  for (std::size_t s = 0; s < needed; ++s) {
    const std::size_t b = s % m;
    Pcg32 rng(derive_seed(config.seed, "smote", s));
    const auto nn = neighbours[b][rng.bounded(k)];
    const double u = rng.next_double();
    const auto x = matrix.row(minority[b]);
    const auto y = matrix.row(nn);
    std::string id = "smote:" + std::to_string(s);
    if (dense) {
      buf.resize(matrix.n_cols());
      for (std::size_t j = 0; j < buf.size(); ++j) buf[j] = x.values[j] + u * (y.values[j] - x.values[j]);
      out.append_dense(std::move(id), minority_label, buf);
    } else {
      SparseEntries e;
      std::size_t i = 0, t = 0;
      while (i < x.indices.size() || t < y.indices.size()) {
        if (t >= y.indices.size() || (i < x.indices.size() && x.indices[i] < y.indices[t])) {
          e.emplace_back(x.indices[i], x.values[i] + u * (0.0 - x.values[i]));
          ++i;
        } else if (i >= x.indices.size() || y.indices[t] < x.indices[i]) {
          e.emplace_back(y.indices[t], u * y.values[t]);
          ++t;
        } else {
          e.emplace_back(x.indices[i], x.values[i] + u * (y.values[t] - x.values[i]));
          ++i;
          ++t;
        }
      }
      out.append_sparse(std::move(id), minority_label, std::move(e));
    }
  }
  return out;
}

}  // namespace buggin
