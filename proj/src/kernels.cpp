#include "buggin/kernels.hpp"

#include <algorithm>
#include <cmath>

#include "buggin/error.hpp"

namespace buggin {

double kernel_eval(const KernelSpec& k, RowView x, RowView y) {
  if (x.dense && y.dense && x.values.size() != y.values.size()) {
    throw DimensionError("kernel_eval: rows of width " + std::to_string(x.values.size()) + " and " +
                         std::to_string(y.values.size()));
  }
  if (k.kind != Kernel::Linear && !(k.gamma > 0.0)) throw ConfigError("kernel gamma must be positive");
  switch (k.kind) {
    case Kernel::Linear:
      return dot(x, y);
    case Kernel::Rbf:
      return std::exp(-k.gamma * squared_distance(x, y));
    case Kernel::Poly:
      return std::pow(k.gamma * dot(x, y) + k.coef0, k.degree);
    case Kernel::Sigmoid:
      return std::tanh(k.gamma * dot(x, y) + k.coef0);
  }
  return 0.0;
}

double resolve_gamma(GammaMode mode, const FeatureMatrix& matrix) {
  const double d = static_cast<double>(std::max<std::size_t>(matrix.n_cols(), 1));
  if (mode == GammaMode::Auto || matrix.n_rows() == 0) return 1.0 / d;
  double sum = 0.0;
  double stored = 0.0;
  for (std::size_t i = 0; i < matrix.n_rows(); ++i) {
    for (double v : matrix.row(i).values) sum += v;
    stored += static_cast<double>(matrix.row(i).values.size());
  }
  const double count = static_cast<double>(matrix.n_rows()) * d;
  const double mean = sum / count;
  // Two passes; implicit zeros each contribute mean^2.
  double ss = (count - stored) * mean * mean;
  for (std::size_t i = 0; i < matrix.n_rows(); ++i) {
    for (double v : matrix.row(i).values) ss += (v - mean) * (v - mean);
  }
  const double var = ss / count;
  // Rounding leaves a constant matrix with a tiny nonzero variance.
  if (!(var > 1e-15 * std::max(1.0, mean * mean))) return 1.0 / d;
  return 1.0 / (d * var);
}

}  // namespace buggin
