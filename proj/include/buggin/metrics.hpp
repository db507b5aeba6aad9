#pragma once

#include <cstddef>
#include <span>

namespace buggin {

// Positive class is Intrinsic (label 1).
struct ConfusionCounts {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  std::size_t total() const { return tp + fp + tn + fn; }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

// Throws DimensionError on length mismatch or empty input.
ConfusionCounts confusion(std::span<const int> y_true, std::span<const int> y_pred);

// A metric whose denominator is zero evaluates to 0 with `degenerate` set.
struct MetricValue {
  double value = 0.0;
  bool degenerate = false;
};

MetricValue precision(const ConfusionCounts& c);
MetricValue recall(const ConfusionCounts& c);
MetricValue accuracy(const ConfusionCounts& c);
MetricValue f1(const ConfusionCounts& c);

// Midrank AUC: (R+ - n+(n+ + 1)/2) / (n+ n-). Throws UndefinedMetricError
// unless both classes are present.
double auc_roc(std::span<const int> y_true, std::span<const double> scores);

}  // namespace buggin
