#include "buggin/logreg.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

#include "buggin/error.hpp"

namespace buggin {

namespace {

double log1pexp(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sample_loss(double z, int y) { return log1pexp(z) - (y != 0 ? z : 0.0); }

template <typename F>
void for_each_nonzero(RowView r, F&& f) {
  if (r.dense) {
    for (std::size_t j = 0; j < r.values.size(); ++j) {
      if (r.values[j] != 0.0) f(static_cast<std::size_t>(j), r.values[j]);
    }
  } else {
    for (std::size_t k = 0; k < r.indices.size(); ++k) f(static_cast<std::size_t>(r.indices[k]), r.values[k]);
  }
}

void check_problem(const LogregProblem& p, std::size_t w_size) {
  if (p.x == nullptr) throw ConfigError("logreg problem has no matrix");
  if (p.sample_weights.size() != p.x->n_rows()) throw DimensionError("one sample weight per row required");
  if (w_size != p.x->n_cols()) {
    throw DimensionError("weight vector has " + std::to_string(w_size) + " entries, matrix has " +
                         std::to_string(p.x->n_cols()) + " columns");
  }
}

std::vector<double> margins(const FeatureMatrix& x, std::span<const double> w, double b) {
  std::vector<double> z(x.n_rows());
  const RowView wv{{}, w, true};
  for (std::size_t i = 0; i < x.n_rows(); ++i) z[i] = dot(x.row(i), wv) + b;
  return z;
}

double penalty_value(Penalty pen, std::span<const double> w) {
  double r = 0.0;
  for (double v : w) r += pen == Penalty::L1 ? std::abs(v) : 0.5 * v * v;
  return r;
}

double inf_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// --- lbfgs -----------------------------------------------------------------

LogregFit fit_lbfgs(const LogregProblem& p, const LogregOptions& opt) {
  const std::size_t d = p.x->n_cols();
  std::vector<double> theta(d + 1, 0.0);
  auto f_of = [&](const std::vector<double>& t) {
    return logreg_objective(p, std::span<const double>(t.data(), d), t[d]);
  };
  auto g_of = [&](const std::vector<double>& t) {
    return logreg_gradient(p, std::span<const double>(t.data(), d), t[d]);
  };
  double f = f_of(theta);
  std::vector<double> g = g_of(theta);
  const double gtol = opt.tolerance * std::max(1.0, inf_norm(g));

  std::deque<std::vector<double>> s_hist, y_hist;
  std::deque<double> rho_hist;
  std::vector<double> dir(d + 1), next(d + 1);
  int it = 0;
  for (;;) {
    const double gn = inf_norm(g);
    if (gn <= gtol) break;
    if (it >= opt.max_iterations) throw ConvergenceError("lbfgs hit its iteration cap", gn);
    ++it;

    // two-loop recursion
    dir = g;
    std::vector<double> a(s_hist.size());
    for (std::size_t k = s_hist.size(); k-- > 0;) {
      a[k] = rho_hist[k] * std::inner_product(s_hist[k].begin(), s_hist[k].end(), dir.begin(), 0.0);
      for (std::size_t t = 0; t <= d; ++t) dir[t] -= a[k] * y_hist[k][t];
    }
    if (!s_hist.empty()) {
      const auto& sl = s_hist.back();
      const auto& yl = y_hist.back();
      const double yy = std::inner_product(yl.begin(), yl.end(), yl.begin(), 0.0);
      const double gamma = std::inner_product(sl.begin(), sl.end(), yl.begin(), 0.0) / yy;
      for (double& v : dir) v *= gamma;
    }
    for (std::size_t k = 0; k < s_hist.size(); ++k) {
      const double bk = rho_hist[k] * std::inner_product(y_hist[k].begin(), y_hist[k].end(), dir.begin(), 0.0);
      for (std::size_t t = 0; t <= d; ++t) dir[t] += s_hist[k][t] * (a[k] - bk);
    }
    for (double& v : dir) v = -v;
    double slope = std::inner_product(g.begin(), g.end(), dir.begin(), 0.0);
    if (!(slope < 0)) {
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      for (std::size_t t = 0; t <= d; ++t) dir[t] = -g[t];
      slope = -std::inner_product(g.begin(), g.end(), g.begin(), 0.0);
    }

    double step = s_hist.empty() ? std::min(1.0, 1.0 / gn) : 1.0;
    double f_next = f;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      for (std::size_t t = 0; t <= d; ++t) next[t] = theta[t] + step * dir[t];
      f_next = f_of(next);
      if (f_next <= f + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) throw ConvergenceError("lbfgs line search failed", gn);

    std::vector<double> g_next = g_of(next);
    std::vector<double> sv(d + 1), yv(d + 1);
    for (std::size_t t = 0; t <= d; ++t) {
      sv[t] = next[t] - theta[t];
      yv[t] = g_next[t] - g[t];
    }
    const double sy = std::inner_product(sv.begin(), sv.end(), yv.begin(), 0.0);
    if (sy > 1e-12) {
      s_hist.push_back(std::move(sv));
      y_hist.push_back(std::move(yv));
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > opt.history) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    theta.swap(next);
    g.swap(g_next);
    f = f_next;
  }
  LogregFit fit;
  fit.w.assign(theta.begin(), theta.begin() + static_cast<long>(d));
  fit.b = theta[d];
  fit.iterations = it;
  return fit;
}

// --- coordinate descent ------------------------------------------------------

LogregFit fit_cd(const LogregProblem& p, const LogregOptions& opt) {
  const FeatureMatrix& x = *p.x;
  const std::size_t n = x.n_rows();
  const std::size_t d = x.n_cols();
  const ColumnMajor cols(x);
  const auto& y = x.labels();
  std::vector<double> cs(n);
  for (std::size_t i = 0; i < n; ++i) cs[i] = p.C * p.sample_weights[i];
  const bool l1 = p.penalty == Penalty::L1;
  auto reg = [&](double v) { return l1 ? std::abs(v) : 0.5 * v * v; };

  LogregFit fit;
  fit.w.assign(d, 0.0);
  double& b = fit.b;
  std::vector<double> z(n, 0.0);

  constexpr double kSigma = 0.01;
  // Backtracking along one coordinate. rows/vals list the touched samples.
  auto line_search = [&](auto rows, auto vals, std::size_t count, double w_old, double dir, double decrease,
                         bool penalised) -> double {
    double lambda = 1.0;
    for (int ls = 0; ls < 30; ++ls) {
      const double step = lambda * dir;
      double change = penalised ? reg(w_old + step) - reg(w_old) : 0.0;
      for (std::size_t k = 0; k < count; ++k) {
        const std::size_t i = rows(k);
        change += cs[i] * (sample_loss(z[i] + step * vals(k), y[i]) - sample_loss(z[i], y[i]));
      }
      if (change <= kSigma * lambda * decrease) return step;
      lambda *= 0.5;
    }
    return 0.0;
  };

  int sweep = 0;
  for (;;) {
    double max_step = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const std::size_t lo = cols.colptr[j], hi = cols.colptr[j + 1];
      double g = 0.0, h = 0.0;
      for (std::size_t k = lo; k < hi; ++k) {
        const std::size_t i = cols.rows[k];
        const double sg = sigmoid(z[i]);
        const double v = cols.values[k];
        g += cs[i] * (sg - (y[i] != 0 ? 1.0 : 0.0)) * v;
        h += cs[i] * sg * (1.0 - sg) * v * v;
      }
      h = std::max(h, 1e-12);
      const double wj = fit.w[j];
      double dir = 0.0, decrease = 0.0;
      if (l1) {
        if (g + 1.0 <= h * wj) {
          dir = -(g + 1.0) / h;
        } else if (g - 1.0 >= h * wj) {
          dir = -(g - 1.0) / h;
        } else {
          dir = -wj;
        }
        decrease = g * dir + std::abs(wj + dir) - std::abs(wj);
      } else {
        dir = -(g + wj) / (h + 1.0);
        decrease = (g + wj) * dir;
      }
      if (std::abs(dir) < 1e-15) continue;
      const double step = line_search([&](std::size_t k) { return static_cast<std::size_t>(cols.rows[lo + k]); },
                                      [&](std::size_t k) { return cols.values[lo + k]; }, hi - lo, wj, dir,
                                      decrease, true);
      if (step == 0.0) continue;
      fit.w[j] = wj + step;
      for (std::size_t k = lo; k < hi; ++k) z[cols.rows[k]] += step * cols.values[k];
      max_step = std::max(max_step, std::abs(step));
    }
    // intercept
    {
      double g = 0.0, h = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double sg = sigmoid(z[i]);
        g += cs[i] * (sg - (y[i] != 0 ? 1.0 : 0.0));
        h += cs[i] * sg * (1.0 - sg);
      }
      h = std::max(h, 1e-12);
      const double dir = -g / h;
      if (std::abs(dir) >= 1e-15) {
        const double step = line_search([](std::size_t k) { return k; }, [](std::size_t) { return 1.0; }, n, b,
                                        dir, g * dir, false);
        if (step != 0.0) {
          b += step;
          for (double& zi : z) zi += step;
          max_step = std::max(max_step, std::abs(step));
        }
      }
    }
    ++sweep;
    if (max_step <= opt.tolerance * std::max(1.0, std::max(inf_norm(fit.w), std::abs(b)))) break;
    if (sweep >= opt.max_iterations) throw ConvergenceError("coordinate descent hit its sweep cap", max_step);
  }
  fit.iterations = sweep;
  return fit;
}

}  // namespace

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double logreg_objective(const LogregProblem& p, std::span<const double> w, double b) {
  check_problem(p, w.size());
  const auto z = margins(*p.x, w, b);
  const auto& y = p.x->labels();
  double loss = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) loss += p.sample_weights[i] * sample_loss(z[i], y[i]);
  return p.C * loss + penalty_value(p.penalty, w);
}

std::vector<double> logreg_gradient(const LogregProblem& p, std::span<const double> w, double b) {
  check_problem(p, w.size());
  const std::size_t d = w.size();
  const auto z = margins(*p.x, w, b);
  const auto& y = p.x->labels();
  std::vector<double> g(d + 1, 0.0);
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double r = p.C * p.sample_weights[i] * (sigmoid(z[i]) - (y[i] != 0 ? 1.0 : 0.0));
    for_each_nonzero(p.x->row(i), [&](std::size_t j, double v) { g[j] += r * v; });
    g[d] += r;
  }
  for (std::size_t j = 0; j < d; ++j) {
    if (p.penalty == Penalty::L2) {
      g[j] += w[j];
    } else if (w[j] != 0.0) {
      g[j] += w[j] > 0 ? 1.0 : -1.0;
    }
  }
  return g;
}

LogregFit fit_logreg(const LogregProblem& p, const LogregOptions& options) {
  check_problem(p, p.x ? p.x->n_cols() : 0);
  if (!(p.C > 0)) throw ConfigError("logreg C must be positive");
  if (options.solver == Solver::Lbfgs) {
    if (p.penalty == Penalty::L1) throw ConfigError("penalty l1 requires solver coordinate_descent");
    return fit_lbfgs(p, options);
  }
  return fit_cd(p, options);
}

}  // namespace buggin
