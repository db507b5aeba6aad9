#pragma once

#include <span>
#include <vector>

#include "buggin/kernels.hpp"
#include "buggin/matrix.hpp"

namespace buggin {

struct SvmSolverOptions {
  double tolerance = 1e-3;
  // Cap on working-pair updates is max(min_iterations, passes * n).
  long min_iterations = 10000000;
  long passes = 100;
};

// Full dual solution over every training row.
struct SvmDualSolution {
  std::vector<double> alpha;  // 0 <= alpha_i <= C_i
  std::vector<double> y;      // +1 / -1
  double bias = 0.0;          // f(x) = sum alpha_i y_i k(x_i, x) + bias
  double kkt_residual = 0.0;  // max violating pair gap at exit
  long iterations = 0;
};

// SMO with maximal-violating-pair selection on
//   min 1/2 a'Qa - e'a  s.t. 0 <= a_i <= C_i, y'a = 0,  Q_ij = y_i y_j k(x_i, x_j).
// Kernel rows are computed on first use and cached. Throws ConvergenceError
// (carrying the KKT gap) when the iteration cap is reached.
SvmDualSolution solve_svm_dual(const FeatureMatrix& x, std::span<const double> upper_bounds,
                               const KernelSpec& kernel, const SvmSolverOptions& options = {});

}  // namespace buggin
