#include "buggin/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

#include "buggin/error.hpp"

namespace buggin {

namespace {

MetricValue ratio(std::size_t num, std::size_t den) {
  if (den == 0) return {0.0, true};
  return {static_cast<double>(num) / static_cast<double>(den), false};
}

}  // namespace

ConfusionCounts confusion(std::span<const int> y_true, std::span<const int> y_pred) {
  if (y_true.size() != y_pred.size()) {
    throw DimensionError("confusion: " + std::to_string(y_true.size()) + " labels vs " +
                         std::to_string(y_pred.size()) + " predictions");
  }
  if (y_true.empty()) throw DimensionError("confusion: empty input");
  ConfusionCounts c;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const bool t = y_true[i] != 0;
    const bool p = y_pred[i] != 0;
    if (t && p) ++c.tp;
    else if (!t && p) ++c.fp;
    else if (!t && !p) ++c.tn;
    else ++c.fn;
  }
  return c;
}

MetricValue precision(const ConfusionCounts& c) { return ratio(c.tp, c.tp + c.fp); }
MetricValue recall(const ConfusionCounts& c) { return ratio(c.tp, c.tp + c.fn); }
MetricValue accuracy(const ConfusionCounts& c) { return ratio(c.tp + c.tn, c.total()); }
MetricValue f1(const ConfusionCounts& c) { return ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn); }

double auc_roc(std::span<const int> y_true, std::span<const double> scores) {
  if (y_true.size() != scores.size()) throw DimensionError("auc_roc: labels and scores differ in length");
  const std::size_t n = y_true.size();
  std::size_t n_pos = 0;
  for (int y : y_true) n_pos += y != 0;
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) throw UndefinedMetricError("AUC-ROC is undefined with a single class");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Sum of midranks of the positives; ranks are 1-based.
  double rank_sum = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double midrank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t t = i; t <= j; ++t) {
      if (y_true[order[t]] != 0) rank_sum += midrank;
    }
    i = j + 1;
  }
  const double np = static_cast<double>(n_pos);
  return (rank_sum - np * (np + 1.0) / 2.0) / (np * static_cast<double>(n_neg));
}

}  // namespace buggin
