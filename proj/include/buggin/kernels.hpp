#pragma once

#include "buggin/matrix.hpp"
#include "buggin/model_config.hpp"

namespace buggin {

struct KernelSpec {
  Kernel kind = Kernel::Rbf;
  double gamma = 1.0;
  int degree = 3;
  double coef0 = 0.0;
};

// linear x.x'; rbf exp(-g |x - x'|^2); poly (g x.x' + c0)^d; sigmoid
// tanh(g x.x' + c0). Throws DimensionError on width mismatch (dense rows)
// and ConfigError when gamma <= 0 for a non-linear kernel.
double kernel_eval(const KernelSpec& k, RowView x, RowView y);

// auto: 1/d. scale: 1/(d * Var) with Var the population variance of all
// n*d entries, implicit zeros included; Var == 0 falls back to auto.
double resolve_gamma(GammaMode mode, const FeatureMatrix& matrix);

}  // namespace buggin
