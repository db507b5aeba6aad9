#include "buggin/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "buggin/error.hpp"

namespace buggin {

namespace {

constexpr double kTau = 1e-12;

class KernelRowCache {
 public:
  KernelRowCache(const FeatureMatrix& x, const std::vector<double>& y, const KernelSpec& k)
      : x_(x), y_(y), k_(k), rows_(x.n_rows()) {}

  // Row i of Q (labels folded in).
  const std::vector<double>& row(std::size_t i) {
    auto& r = rows_[i];
    if (r.empty()) {
      const std::size_t n = x_.n_rows();
      r.resize(n);
      const auto xi = x_.row(i);
      for (std::size_t t = 0; t < n; ++t) r[t] = y_[i] * y_[t] * kernel_eval(k_, xi, x_.row(t));
    }
    return r;
  }

 private:
  const FeatureMatrix& x_;
  const std::vector<double>& y_;
  KernelSpec k_;
  std::vector<std::vector<double>> rows_;
};

}  // namespace

SvmDualSolution solve_svm_dual(const FeatureMatrix& x, std::span<const double> upper_bounds,
                               const KernelSpec& kernel, const SvmSolverOptions& options) {
  const std::size_t n = x.n_rows();
  if (upper_bounds.size() != n) throw DimensionError("one upper bound per row required");
  SvmDualSolution sol;
  sol.y.resize(n);
  for (std::size_t i = 0; i < n; ++i) sol.y[i] = x.labels()[i] != 0 ? 1.0 : -1.0;
  sol.alpha.assign(n, 0.0);
  const auto& y = sol.y;
  auto& alpha = sol.alpha;
  const auto C = upper_bounds;

  std::vector<double> qd(n);
  for (std::size_t i = 0; i < n; ++i) qd[i] = kernel_eval(kernel, x.row(i), x.row(i));
  std::vector<double> grad(n, -1.0);
  KernelRowCache cache(x, y, kernel);

  auto at_upper = [&](std::size_t t) { return alpha[t] >= C[t]; };
  auto at_lower = [&](std::size_t t) { return alpha[t] <= 0.0; };

  const long max_iter = std::max(options.min_iterations, options.passes * static_cast<long>(n));
  double gap = std::numeric_limits<double>::infinity();
  for (;;) {
    double gmax = -std::numeric_limits<double>::infinity();
    double gmax2 = -std::numeric_limits<double>::infinity();
    std::size_t i = n, j = n;
    for (std::size_t t = 0; t < n; ++t) {
      if (y[t] > 0) {
        if (!at_upper(t) && -grad[t] >= gmax) { gmax = -grad[t]; i = t; }
        if (!at_lower(t) && grad[t] >= gmax2) { gmax2 = grad[t]; j = t; }
      } else {
        if (!at_lower(t) && grad[t] >= gmax) { gmax = grad[t]; i = t; }
        if (!at_upper(t) && -grad[t] >= gmax2) { gmax2 = -grad[t]; j = t; }
      }
    }
    gap = (i == n || j == n) ? 0.0 : gmax + gmax2;
    if (gap < options.tolerance) break;
    if (sol.iterations >= max_iter) {
      throw ConvergenceError("SVM solver hit its iteration cap of " + std::to_string(max_iter), gap);
    }
    ++sol.iterations;

    const auto& qi = cache.row(i);
    const auto& qj = cache.row(j);
    const double ci = C[i], cj = C[j];
    const double old_ai = alpha[i], old_aj = alpha[j];
    if (y[i] != y[j]) {
      double quad = qd[i] + qd[j] + 2.0 * qi[j];
      if (quad <= 0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0) {
        if (alpha[j] < 0) { alpha[j] = 0; alpha[i] = diff; }
      } else {
        if (alpha[i] < 0) { alpha[i] = 0; alpha[j] = -diff; }
      }
      if (diff > ci - cj) {
        if (alpha[i] > ci) { alpha[i] = ci; alpha[j] = ci - diff; }
      } else {
        if (alpha[j] > cj) { alpha[j] = cj; alpha[i] = cj + diff; }
      }
    } else {
      double quad = qd[i] + qd[j] - 2.0 * qi[j];
      if (quad <= 0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > ci) {
        if (alpha[i] > ci) { alpha[i] = ci; alpha[j] = sum - ci; }
      } else {
        if (alpha[j] < 0) { alpha[j] = 0; alpha[i] = sum; }
      }
      if (sum > cj) {
        if (alpha[j] > cj) { alpha[j] = cj; alpha[i] = sum - cj; }
      } else {
        if (alpha[i] < 0) { alpha[i] = 0; alpha[j] = sum; }
      }
    }
    const double dai = alpha[i] - old_ai;
    const double daj = alpha[j] - old_aj;
    for (std::size_t t = 0; t < n; ++t) grad[t] += qi[t] * dai + qj[t] * daj;
  }
  sol.kkt_residual = gap;

  // Bias: average over free vectors, else midpoint of the feasible interval.
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double sum_free = 0.0;
  std::size_t n_free = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * grad[t];
    if (at_upper(t)) {
      if (y[t] < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else if (at_lower(t)) {
      if (y[t] > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  double rho = 0.0;
  if (n_free > 0) {
    rho = sum_free / static_cast<double>(n_free);
  } else if (std::isfinite(ub) && std::isfinite(lb)) {
    rho = (ub + lb) / 2.0;
  } else if (std::isfinite(ub)) {
    rho = ub;
  } else if (std::isfinite(lb)) {
    rho = lb;
  }
  sol.bias = -rho;
  return sol;
}

}  // namespace buggin
