#pragma once

#include <span>
#include <vector>

#include "buggin/matrix.hpp"
#include "buggin/model_config.hpp"

namespace buggin {

// Weighted, penalised negative log-likelihood
//   F(w, b) = C * sum_i s_i * [log(1 + e^{z_i}) - y_i z_i] + R(w),  z_i = w.x_i + b
// with R = 1/2 |w|^2 (l2) or |w|_1 (l1). The intercept is not penalised.
struct LogregProblem {
  const FeatureMatrix* x = nullptr;
  std::span<const double> sample_weights;  // s_i
  double C = 1.0;
  Penalty penalty = Penalty::L2;
};

double logreg_objective(const LogregProblem& p, std::span<const double> w, double b);
// d+1 entries, the last one for the intercept. For l1 the subgradient
// sign(w_j) is used (0 at w_j = 0).
std::vector<double> logreg_gradient(const LogregProblem& p, std::span<const double> w, double b);

struct LogregOptions {
  Solver solver = Solver::Lbfgs;
  double tolerance = 1e-4;
  int max_iterations = 1000;
  int history = 10;  // lbfgs memory
};

struct LogregFit {
  std::vector<double> w;
  double b = 0.0;
  int iterations = 0;
};

// lbfgs (l2 only): stops once |grad|_inf <= tol * max(1, |grad_0|_inf).
// coordinate_descent: cyclic Newton coordinate steps with backtracking;
// stops when a sweep moves no coordinate by more than tol * max(1, |w|_inf).
// Throws ConvergenceError at the iteration cap, ConfigError for l1 + lbfgs.
LogregFit fit_logreg(const LogregProblem& p, const LogregOptions& options);

double sigmoid(double z);

}  // namespace buggin
