#include "buggin/tree.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "buggin/error.hpp"

namespace buggin {

namespace {

constexpr double kGainEpsilon = 1e-12;

double value_at(RowView r, std::size_t j) {
  if (r.dense) return j < r.values.size() ? r.values[j] : 0.0;
  const auto it = std::lower_bound(r.indices.begin(), r.indices.end(), static_cast<std::uint32_t>(j));
  if (it == r.indices.end() || *it != j) return 0.0;
  return r.values[static_cast<std::size_t>(it - r.indices.begin())];
}

struct Entry {
  double v;
  double w;
  int y;
};

// Per-node scratch: nonzero entries bucketed by feature.
class SplitSearch {
 public:
  SplitSearch(const FeatureMatrix& x, std::span<const double> weights, const TreeOptions& opt)
      : x_(x), weights_(weights), opt_(opt), buckets_(x.n_cols()) {}

  void gather(std::span<const std::size_t> rows) {
    for (auto f : touched_) buckets_[f].clear();
    touched_.clear();
    w_[0] = w_[1] = 0.0;
    for (auto i : rows) {
      const double w = weights_[i];
      if (w <= 0) continue;
      const int y = x_.labels()[i] != 0 ? 1 : 0;
      w_[y] += w;
      const RowView r = x_.row(i);
      auto push = [&](std::uint32_t f, double v) {
        if (v == 0.0) return;
        if (buckets_[f].empty()) touched_.push_back(f);
        buckets_[f].push_back({v, w, y});
      };
      if (r.dense) {
        for (std::size_t j = 0; j < r.values.size(); ++j) push(static_cast<std::uint32_t>(j), r.values[j]);
      } else {
        for (std::size_t k = 0; k < r.indices.size(); ++k) push(r.indices[k], r.values[k]);
      }
    }
    std::sort(touched_.begin(), touched_.end());
  }

  double w0() const { return w_[0]; }
  double w1() const { return w_[1]; }

  // Features with at least two distinct values among the node's rows.
  std::vector<std::uint32_t> non_constant() {
    std::vector<std::uint32_t> out;
    const double total = w_[0] + w_[1];
    for (auto f : touched_) {
      auto& b = buckets_[f];
      double bw = 0.0;
      for (const auto& e : b) bw += e.w;
      const bool has_zero = total - bw > 1e-12 * std::max(1.0, total);
      bool distinct = has_zero;
      for (std::size_t k = 1; !distinct && k < b.size(); ++k) distinct = b[k].v != b[0].v;
      if (distinct) out.push_back(f);
    }
    return out;
  }

  SplitChoice search(std::span<const std::uint32_t> features) {
    SplitChoice best;
    const double total = w_[0] + w_[1];
    if (total <= 0) return best;
    const double parent = impurity(opt_.criterion, w_[0], w_[1]);
    const double leaf = static_cast<double>(opt_.min_samples_leaf);
    bool found = false;
    for (auto f : features) {
      auto& b = buckets_[f];
      std::sort(b.begin(), b.end(), [](const Entry& a, const Entry& c) { return a.v < c.v; });
      // zero group: everything in the node not stored in the bucket
      double z0 = w_[0], z1 = w_[1];
      for (const auto& e : b) (e.y ? z1 : z0) -= e.w;
      if (z0 < 0) z0 = 0;
      if (z1 < 0) z1 = 0;
      const bool has_zero = (z0 + z1) > 1e-12 * std::max(1.0, total);

      // groups of equal value in ascending order, zero group merged in
      struct Group {
        double v, g0, g1;
      };
      std::vector<Group> groups;
      bool zero_done = !has_zero;
      for (std::size_t k = 0; k < b.size();) {
        if (!zero_done && b[k].v > 0) {
          groups.push_back({0.0, z0, z1});
          zero_done = true;
        }
        Group g{b[k].v, 0, 0};
        while (k < b.size() && b[k].v == g.v) {
          (b[k].y ? g.g1 : g.g0) += b[k].w;
          ++k;
        }
        groups.push_back(g);
      }
      if (!zero_done) groups.push_back({0.0, z0, z1});

      double l0 = 0, l1 = 0;
      for (std::size_t k = 0; k + 1 < groups.size(); ++k) {
        l0 += groups[k].g0;
        l1 += groups[k].g1;
        const double r0 = w_[0] - l0, r1 = w_[1] - l1;
        const double lw = l0 + l1, rw = r0 + r1;
        if (lw < leaf || rw < leaf) continue;
        const double gain =
            parent - (lw * impurity(opt_.criterion, l0, l1) + rw * impurity(opt_.criterion, r0, r1)) / total;
        if (!found || gain > best.gain + kGainEpsilon) {
          const double a = groups[k].v, c = groups[k + 1].v;
          double thr = a + (c - a) / 2.0;
          if (!(thr < c)) thr = a;
          best = {static_cast<int>(f), thr, gain};
          found = true;
        }
      }
    }
    return best;
  }

 private:
  const FeatureMatrix& x_;
  std::span<const double> weights_;
  const TreeOptions& opt_;
  std::vector<std::vector<Entry>> buckets_;
  std::vector<std::uint32_t> touched_;
  double w_[2] = {0, 0};
};

void check_options(const TreeOptions& o) {
  if (o.max_depth && *o.max_depth < 0) throw ConfigError("max_depth must be >= 0");
  if (o.min_samples_leaf < 1) throw ConfigError("min_samples_leaf must be >= 1");
  if (o.min_samples_split < 2) throw ConfigError("min_samples_split must be >= 2");
}

}  // namespace

double impurity(Criterion c, double w0, double w1) {
  const double t = w0 + w1;
  if (t <= 0) return 0.0;
  const double p0 = w0 / t, p1 = w1 / t;
  if (c == Criterion::Gini) return 1.0 - p0 * p0 - p1 * p1;
  double h = 0.0;
  if (p0 > 0) h -= p0 * std::log2(p0);
  if (p1 > 0) h -= p1 * std::log2(p1);
  return h;
}

SplitChoice best_split(const FeatureMatrix& x, std::span<const std::size_t> rows, std::span<const double> weights,
                       const TreeOptions& options, std::span<const std::uint32_t> features) {
  if (weights.size() != x.n_rows()) throw DimensionError("one weight per row required");
  SplitSearch s(x, weights, options);
  s.gather(rows);
  auto cand = s.non_constant();
  if (!features.empty()) {
    std::vector<std::uint32_t> keep;
    for (auto f : cand) {
      if (std::find(features.begin(), features.end(), f) != features.end()) keep.push_back(f);
    }
    cand.swap(keep);
  }
  return s.search(cand);
}

double DecisionTree::score(RowView x) const {
  if (nodes.empty()) throw TrainingError("empty tree");
  int k = 0;
  while (nodes[k].feature >= 0) {
    const auto& n = nodes[k];
    k = value_at(x, static_cast<std::size_t>(n.feature)) <= n.threshold ? n.left : n.right;
  }
  return nodes[k].value;
}

int DecisionTree::depth() const {
  int d = 0;
  for (const auto& n : nodes) d = std::max(d, n.depth);
  return d;
}

DecisionTree fit_tree(const FeatureMatrix& x, std::span<const double> weights, const TreeOptions& options,
                      Pcg32* rng) {
  check_options(options);
  if (weights.size() != x.n_rows()) throw DimensionError("one weight per row required");
  if (options.max_features > 0 && rng == nullptr) throw ConfigError("feature subsampling needs a generator");
  SplitSearch search(x, weights, options);
  DecisionTree tree;

  std::vector<std::size_t> all;
  for (std::size_t i = 0; i < x.n_rows(); ++i) {
    if (weights[i] > 0) all.push_back(i);
  }
  if (all.empty()) throw TrainingError("no rows with positive weight");

  std::function<int(std::vector<std::size_t>&, int)> build = [&](std::vector<std::size_t>& rows, int depth) -> int {
    search.gather(rows);
    const double w0 = search.w0(), w1 = search.w1();
    const int id = static_cast<int>(tree.nodes.size());
    TreeNode node;
    node.weight = w0 + w1;
    node.value = w1 / (w0 + w1);
    node.depth = depth;
    tree.nodes.push_back(node);

    const bool stop = (options.max_depth && depth >= *options.max_depth) ||
                      node.weight < static_cast<double>(options.min_samples_split) || w0 <= 0 || w1 <= 0;
    if (stop) return id;
    auto cand = search.non_constant();
    if (options.max_features > 0 && options.max_features < cand.size()) {
      for (std::size_t k = 0; k < options.max_features; ++k) {
        const auto r = k + static_cast<std::size_t>(rng->bounded(cand.size() - k));
        std::swap(cand[k], cand[r]);
      }
      cand.resize(options.max_features);
      std::sort(cand.begin(), cand.end());
    }
    const SplitChoice split = search.search(cand);
    if (split.feature < 0) return id;

    std::vector<std::size_t> left, right;
    for (auto i : rows) {
      (value_at(x.row(i), static_cast<std::size_t>(split.feature)) <= split.threshold ? left : right).push_back(i);
    }
    const int l = build(left, depth + 1);
    const int r = build(right, depth + 1);
    auto& n = tree.nodes[static_cast<std::size_t>(id)];
    n.feature = split.feature;
    n.threshold = split.threshold;
    n.left = l;
    n.right = r;
    return id;
  };
  build(all, 0);
  return tree;
}

double RandomForest::score(RowView x) const {
  if (trees.empty()) throw TrainingError("empty forest");
  double s = 0.0;
  for (const auto& t : trees) s += t.score(x);
  return s / static_cast<double>(trees.size());
}

RandomForest fit_forest(const FeatureMatrix& x, const ForestOptions& options) {
  if (options.n_estimators < 1) throw ConfigError("n_estimators must be >= 1");
  const std::size_t n = x.n_rows();
  if (n == 0) throw TrainingError("no training rows");
  TreeOptions topt = options.tree;
  topt.max_features = options.max_features == MaxFeatures::Sqrt
                          ? static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(x.n_cols()))))
                          : 0;
  RandomForest forest;
  for (int t = 0; t < options.n_estimators; ++t) {
    const auto seed = derive_seed(options.seed, "rforest", static_cast<std::uint64_t>(t));
    Pcg32 rng(seed);
    std::vector<double> w(n, options.bootstrap ? 0.0 : 1.0);
    if (options.bootstrap) {
      for (std::size_t k = 0; k < n; ++k) w[static_cast<std::size_t>(rng.bounded(n))] += 1.0;
    }
    forest.trees.push_back(fit_tree(x, w, topt, &rng));
    forest.seeds.push_back(seed);
  }
  return forest;
}

nlohmann::json to_json(const DecisionTree& t) {
  nlohmann::json j;
  auto& f = j["feature"] = nlohmann::json::array();
  auto& th = j["threshold"] = nlohmann::json::array();
  auto& l = j["left"] = nlohmann::json::array();
  auto& r = j["right"] = nlohmann::json::array();
  auto& v = j["value"] = nlohmann::json::array();
  auto& w = j["weight"] = nlohmann::json::array();
  auto& d = j["depth"] = nlohmann::json::array();
  for (const auto& n : t.nodes) {
    f.push_back(n.feature);
    th.push_back(n.threshold);
    l.push_back(n.left);
    r.push_back(n.right);
    v.push_back(n.value);
    w.push_back(n.weight);
    d.push_back(n.depth);
  }
  return j;
}

DecisionTree tree_from_json(const nlohmann::json& j) {
  DecisionTree t;
  const auto& f = j.at("feature");
  const std::size_t m = f.size();
  for (const char* key : {"threshold", "left", "right", "value", "weight", "depth"}) {
    if (j.at(key).size() != m) throw FormatError(std::string("tree column '") + key + "' has the wrong length");
  }
  for (std::size_t k = 0; k < m; ++k) {
    TreeNode n;
    n.feature = f[k].get<int>();
    n.threshold = j["threshold"][k].get<double>();
    n.left = j["left"][k].get<int>();
    n.right = j["right"][k].get<int>();
    n.value = j["value"][k].get<double>();
    n.weight = j["weight"][k].get<double>();
    n.depth = j["depth"][k].get<int>();
    const int lim = static_cast<int>(m);
    if (n.feature >= 0 && (n.left <= 0 || n.left >= lim || n.right <= 0 || n.right >= lim)) {
      throw FormatError("tree node " + std::to_string(k) + " has invalid children");
    }
    t.nodes.push_back(n);
  }
  if (t.nodes.empty()) throw FormatError("tree has no nodes");
  return t;
}

}  // namespace buggin
