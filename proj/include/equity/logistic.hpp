#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "equity/errors.hpp"
#include "equity/split.hpp"

namespace equity {

struct LogisticParams {
  double ridge = 1e-8;
  double tolerance = 1e-6;  // on the max-norm of the objective gradient
  std::size_t max_iterations = 500;
};

struct LogisticModel {
  std::vector<double> weights;  // on standardized features
  double intercept = 0.0;
  std::vector<double> center;
  std::vector<double> scale;
  std::vector<double> impute;  // training median, substituted for missing values
  FeatureSet features;
  std::size_t iterations = 0;
  double gradient_norm = 0.0;
  bool converged = false;

  double standardized(std::size_t f, double v) const {
    if (is_missing(v)) v = impute[f];
    return (v - center[f]) / scale[f];
  }

  double linear(std::span<const double> x) const {
    double eta = intercept;
    for (std::size_t f = 0; f < weights.size(); ++f) eta += weights[f] * standardized(f, x[f]);
    return eta;
  }

  double score(std::span<const double> x) const {
    const double eta = linear(x);
    if (eta >= 0) return 1.0 / (1.0 + std::exp(-eta));
    const double e = std::exp(eta);
    return e / (1.0 + e);
  }
};

namespace detail {

inline double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

inline double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Solves A x = b for symmetric positive definite A (row-major, n x n) by
// Cholesky. Returns false when A is not numerically positive definite.
inline bool cholesky_solve(std::vector<double> a, std::vector<double> b, std::size_t n, std::vector<double>& x) {
  for (std::size_t j = 0; j < n; ++j) {
    double d = a[j * n + j];
    for (std::size_t k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
    if (!(d > 0)) return false;
    d = std::sqrt(d);
    a[j * n + j] = d;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a[i * n + j];
      for (std::size_t k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
      a[i * n + j] = s / d;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= a[i * n + k] * b[k];
    b[i] = s / a[i * n + i];
  }
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= a[k * n + i] * b[k];
    b[i] = s / a[i * n + i];
  }
  x = std::move(b);
  return true;
}

inline double median_of(std::vector<double> v) {
  const std::size_t n = v.size();
  std::sort(v.begin(), v.end());
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace detail

// Maximizes the ridge-penalized log-likelihood by damped Newton iterations.
// The intercept is not penalized.
inline LogisticModel fit_logistic(const Table& table, std::span<const std::size_t> rows, const FeatureSet& features,
                                  const LogisticParams& params = {}) {
  std::size_t n_good = 0;
  for (auto r : rows) n_good += table.label(r) == Label::kGood;
  if (n_good == 0 || n_good == rows.size()) throw TrainingError("logistic regression needs both classes");

  const std::size_t nf = table.cols();
  const std::size_t n = rows.size();
  LogisticModel m;
  m.features = features;
  m.weights.assign(nf, 0.0);
  m.center.assign(nf, 0.0);
  m.scale.assign(nf, 1.0);
  m.impute.assign(nf, 0.0);

  for (std::size_t f = 0; f < nf; ++f) {
    const auto col = table.column(f);
    std::vector<double> known;
    for (auto r : rows) {
      if (!is_missing(col[r])) known.push_back(col[r]);
    }
    if (known.empty()) continue;
    double mean = 0.0;
    for (double v : known) mean += v;
    mean /= static_cast<double>(known.size());
    double ss = 0.0;
    for (double v : known) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(known.size()));
    m.center[f] = mean;
    m.scale[f] = sd > 0 && std::isfinite(sd) ? sd : 1.0;
    m.impute[f] = detail::median_of(std::move(known));
  }

  // Design matrix with a leading intercept column, row-major.
  const std::size_t d = nf + 1;
  std::vector<double> x(n * d);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = rows[i];
    x[i * d] = 1.0;
    for (std::size_t f = 0; f < nf; ++f) x[i * d + f + 1] = m.standardized(f, table.at(r, f));
    y[i] = table.label(r) == Label::kGood ? 1.0 : 0.0;
  }

  std::vector<double> beta(d, 0.0);
  std::vector<double> eta(n, 0.0);
  auto objective = [&](const std::vector<double>& b, std::vector<double>& lin) {
    double j = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double e = 0.0;
      for (std::size_t k = 0; k < d; ++k) e += x[i * d + k] * b[k];
      lin[i] = e;
      j += detail::softplus(e) - y[i] * e;
    }
    for (std::size_t k = 1; k < d; ++k) j += params.ridge * b[k] * b[k];
    return j;
  };
  double current = objective(beta, eta);

  std::vector<double> grad(d), hess(d * d), step, trial(d), trial_eta(n);
  std::size_t iter = 0;
  for (;; ++iter) {
    std::fill(grad.begin(), grad.end(), 0.0);
    std::fill(hess.begin(), hess.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double p = detail::sigmoid(eta[i]);
      const double w = p * (1.0 - p);
      const double* xi = &x[i * d];
      for (std::size_t a = 0; a < d; ++a) {
        grad[a] += xi[a] * (p - y[i]);
        const double wa = w * xi[a];
        for (std::size_t b = 0; b <= a; ++b) hess[a * d + b] += wa * xi[b];
      }
    }
    for (std::size_t k = 1; k < d; ++k) {
      grad[k] += 2.0 * params.ridge * beta[k];
      hess[k * d + k] += 2.0 * params.ridge;
    }
    for (std::size_t a = 0; a < d; ++a) {
      for (std::size_t b = a + 1; b < d; ++b) hess[a * d + b] = hess[b * d + a];
    }
    double gnorm = 0.0;
    for (double g : grad) gnorm = std::max(gnorm, std::fabs(g));
    m.gradient_norm = gnorm;
    if (gnorm < params.tolerance) {
      m.converged = true;
      break;
    }
    if (iter >= params.max_iterations) break;

    std::vector<double> neg(d);
    for (std::size_t k = 0; k < d; ++k) neg[k] = -grad[k];
    double damping = 0.0;
    while (!detail::cholesky_solve(hess, neg, d, step)) {
      damping = damping == 0.0 ? 1e-10 : damping * 10.0;
      for (std::size_t k = 0; k < d; ++k) hess[k * d + k] += damping;
    }

    // Backtracking on the objective; accept the first decrease (or no worse
    // when already at machine precision).
    double t = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
      for (std::size_t k = 0; k < d; ++k) trial[k] = beta[k] + t * step[k];
      const double value = objective(trial, trial_eta);
      if (value <= current) {
        moved = value < current || t == 1.0;
        beta = trial;
        eta = trial_eta;
        current = value;
        break;
      }
    }
    if (!moved) {
      ++iter;
      break;
    }
  }
  // Final gradient at the returned weights.
  if (!m.converged) {
    std::fill(grad.begin(), grad.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double p = detail::sigmoid(eta[i]);
      for (std::size_t a = 0; a < d; ++a) grad[a] += x[i * d + a] * (p - y[i]);
    }
    for (std::size_t k = 1; k < d; ++k) grad[k] += 2.0 * params.ridge * beta[k];
    double gnorm = 0.0;
    for (double g : grad) gnorm = std::max(gnorm, std::fabs(g));
    m.gradient_norm = gnorm;
    m.converged = gnorm < params.tolerance;
  }
  m.iterations = iter;
  m.intercept = beta[0];
  for (std::size_t f = 0; f < nf; ++f) m.weights[f] = beta[f + 1];
  return m;
}

inline LogisticModel train_logistic(const LabeledDataset& dataset, const LogisticParams& params = {}) {
  Table table(dataset);
  return fit_logistic(table, detail::all_rows(table), dataset.features, params);
}

}  // namespace equity
