#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "equity/errors.hpp"
#include "equity/split.hpp"

namespace equity {

struct Gaussian {
  double mean = 0.0;
  double variance = 1.0;
  std::size_t count = 0;  // known values the estimate came from

  double log_density(double x) const {
    const double d = x - mean;
    return -0.5 * std::log(2.0 * std::numbers::pi * variance) - d * d / (2.0 * variance);
  }
  friend bool operator==(const Gaussian&, const Gaussian&) = default;
};

struct NaiveBayesModel {
  double prior_good = 0.5;
  double prior_bad = 0.5;
  std::vector<Gaussian> good;  // per feature
  std::vector<Gaussian> bad;
  double variance_floor = 1e-9;
  FeatureSet features;

  // Posterior probability of Good. Missing features, and features with no
  // estimate in either class, contribute nothing.
  double score(std::span<const double> x) const {
    double lg = std::log(prior_good);
    double lb = std::log(prior_bad);
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (is_missing(x[i]) || good[i].count == 0 || bad[i].count == 0) continue;
      lg += good[i].log_density(x[i]);
      lb += bad[i].log_density(x[i]);
    }
    // 1 / (1 + exp(lb - lg)) without overflow
    const double d = lb - lg;
    if (d > 0) {
      const double e = std::exp(-d);
      return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(d));
  }
};

inline NaiveBayesModel fit_naive_bayes(const Table& table, std::span<const std::size_t> rows,
                                       const FeatureSet& features, double variance_floor = 1e-9) {
  std::size_t n_good = 0;
  for (auto r : rows) n_good += table.label(r) == Label::kGood;
  const std::size_t n_bad = rows.size() - n_good;
  if (n_good == 0 || n_bad == 0) throw TrainingError("naive Bayes needs both classes in the training data");

  NaiveBayesModel m;
  m.features = features;
  m.variance_floor = variance_floor;
  m.prior_good = static_cast<double>(n_good) / static_cast<double>(rows.size());
  m.prior_bad = static_cast<double>(n_bad) / static_cast<double>(rows.size());
  m.good.resize(table.cols());
  m.bad.resize(table.cols());
  for (std::size_t f = 0; f < table.cols(); ++f) {
    const auto col = table.column(f);
    double sum[2] = {0, 0};
    std::size_t cnt[2] = {0, 0};
    for (auto r : rows) {
      if (is_missing(col[r])) continue;
      const int c = table.label(r) == Label::kGood;
      sum[c] += col[r];
      ++cnt[c];
    }
    double mean[2], ss[2] = {0, 0};
    for (int c = 0; c < 2; ++c) mean[c] = cnt[c] ? sum[c] / static_cast<double>(cnt[c]) : 0.0;
    for (auto r : rows) {
      if (is_missing(col[r])) continue;
      const int c = table.label(r) == Label::kGood;
      const double d = col[r] - mean[c];
      ss[c] += d * d;
    }
    for (int c = 0; c < 2; ++c) {
      Gaussian g;
      g.count = cnt[c];
      g.mean = mean[c];
      g.variance = std::max(cnt[c] ? ss[c] / static_cast<double>(cnt[c]) : 0.0, variance_floor);
      (c ? m.good : m.bad)[f] = g;
    }
  }
  return m;
}

inline NaiveBayesModel train_naive_bayes(const LabeledDataset& dataset, double variance_floor = 1e-9) {
  Table table(dataset);
  return fit_naive_bayes(table, detail::all_rows(table), dataset.features, variance_floor);
}

}  // namespace equity
