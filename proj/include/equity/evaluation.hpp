#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "equity/errors.hpp"
#include "equity/model.hpp"
#include "equity/parallel.hpp"
#include "equity/random.hpp"
#include "equity/stats.hpp"

namespace equity {

struct FoldAssignment {
  std::size_t k = 0;
  std::vector<std::size_t> fold_of;  // per example

  std::vector<std::size_t> test_rows(std::size_t fold) const {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < fold_of.size(); ++i) {
      if (fold_of[i] == fold) rows.push_back(i);
    }
    return rows;
  }

  std::vector<std::size_t> train_rows(std::size_t fold) const {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < fold_of.size(); ++i) {
      if (fold_of[i] != fold) rows.push_back(i);
    }
    return rows;
  }

  friend bool operator==(const FoldAssignment&, const FoldAssignment&) = default;
};

// Shuffles each class with the seed, then deals its members round-robin over
// the folds. The Bad class continues dealing where the Good class stopped, so
// fold sizes also differ by at most one.
inline FoldAssignment stratified_folds(std::span<const Label> labels, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw EvaluationError("cross-validation needs k >= 2");
  std::vector<std::size_t> good, bad;
  for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] == Label::kGood ? good : bad).push_back(i);
  if (good.size() < k || bad.size() < k) {
    throw EvaluationError("stratification needs at least " + std::to_string(k) + " examples per class (have " +
                          std::to_string(good.size()) + " Good, " + std::to_string(bad.size()) + " Bad)");
  }
  Rng rng(derive_seed(seed, "folds"));
  rng.shuffle(std::span<std::size_t>(good));
  rng.shuffle(std::span<std::size_t>(bad));
  FoldAssignment fa;
  fa.k = k;
  fa.fold_of.assign(labels.size(), 0);
  std::size_t slot = 0;
  for (auto* cls : {&good, &bad}) {
    for (auto i : *cls) fa.fold_of[i] = slot++ % k;
  }
  return fa;
}

inline FoldAssignment stratified_folds(const LabeledDataset& dataset, std::size_t k, std::uint64_t seed) {
  std::vector<Label> labels;
  labels.reserve(dataset.size());
  for (const auto& e : dataset.examples) labels.push_back(e.label);
  return stratified_folds(labels, k, seed);
}

// Good is the positive class.
struct ConfusionMatrix {
  std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0;

  std::uint64_t total() const noexcept { return tp + fp + fn + tn; }
  void add(Label truth, Label predicted) {
    if (truth == Label::kGood) {
      (predicted == Label::kGood ? tp : fn) += 1;
    } else {
      (predicted == Label::kGood ? fp : tn) += 1;
    }
  }
  ConfusionMatrix& operator+=(const ConfusionMatrix& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    tn += o.tn;
    return *this;
  }
  double accuracy() const { return total() ? static_cast<double>(tp + tn) / static_cast<double>(total()) : 0.0; }
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

struct PrecisionRecallF {
  double precision = 0.0;
  double recall = 0.0;
  double f_score = 0.0;
};

namespace detail {
inline double ratio_or_zero(double num, double den) { return den > 0 ? num / den : 0.0; }
inline double harmonic(double p, double r) { return p + r > 0 ? 2.0 * p * r / (p + r) : 0.0; }
}  // namespace detail

// Per-class precision, recall and F for Good and Bad, averaged with weights
// equal to each class's true support. A class never predicted has precision 0.
inline PrecisionRecallF weighted_prf(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw EvaluationError("confusion matrix is empty");
  const double tp = static_cast<double>(cm.tp), fp = static_cast<double>(cm.fp);
  const double fn = static_cast<double>(cm.fn), tn = static_cast<double>(cm.tn);
  const double n = tp + fp + fn + tn;

  const double p_good = detail::ratio_or_zero(tp, tp + fp);
  const double r_good = detail::ratio_or_zero(tp, tp + fn);
  const double p_bad = detail::ratio_or_zero(tn, tn + fn);
  const double r_bad = detail::ratio_or_zero(tn, tn + fp);
  const double w_good = (tp + fn) / n;
  const double w_bad = (tn + fp) / n;

  PrecisionRecallF out;
  out.precision = w_good * p_good + w_bad * p_bad;
  out.recall = w_good * r_good + w_bad * r_bad;
  out.f_score = w_good * detail::harmonic(p_good, r_good) + w_bad * detail::harmonic(p_bad, r_bad);
  return out;
}

struct EvalReport {
  LearnerSpec spec;
  std::uint64_t seed = 0;
  std::size_t k = 0;
  std::vector<ConfusionMatrix> folds;
  std::vector<double> fold_f_scores;
  ConfusionMatrix pooled;
  PrecisionRecallF metrics;  // weighted, over the pooled matrix
  double accuracy = 0.0;
};

// Seed used to train the model for one fold.
inline std::uint64_t fold_training_seed(const LearnerSpec& spec, std::size_t fold) {
  return derive_seed(spec.seed.value_or(0), fold);
}

// Trains on k-1 folds, predicts the held-out fold, for every fold.
inline EvalReport cross_validate(const LearnerSpec& spec, const Table& table, const FeatureSet& features,
                                 const FoldAssignment& folds, std::uint64_t seed = 0, unsigned threads = 1) {
  if (folds.fold_of.size() != table.rows()) throw EvaluationError("fold assignment does not match dataset size");
  EvalReport report;
  report.spec = spec;
  report.seed = seed;
  report.k = folds.k;
  report.folds.resize(folds.k);
  parallel_for(folds.k, threads, [&](std::size_t f) {
    LearnerSpec fold_spec = spec;
    if (spec.seed) fold_spec.seed = fold_training_seed(spec, f);
    Model model;
    try {
      model = train_on(fold_spec, table, folds.train_rows(f), features, threads);
    } catch (const TrainingError& e) {
      throw TrainingError("fold " + std::to_string(f) + ": " + e.what());
    }
    std::vector<double> x(table.cols());
    ConfusionMatrix cm;
    for (auto r : folds.test_rows(f)) {
      for (std::size_t c = 0; c < table.cols(); ++c) x[c] = table.at(r, c);
      cm.add(table.label(r), make_prediction(model.score(x)).label);
    }
    report.folds[f] = cm;
  });
  for (const auto& cm : report.folds) {
    report.fold_f_scores.push_back(weighted_prf(cm).f_score);
    report.pooled += cm;
  }
  report.metrics = weighted_prf(report.pooled);
  report.accuracy = report.pooled.accuracy();
  return report;
}

// Stratified k-fold cross-validation; `seed` fixes the fold assignment.
inline EvalReport cross_validate(const LearnerSpec& spec, const LabeledDataset& dataset, std::size_t k,
                                 std::uint64_t seed, unsigned threads = 1) {
  const auto folds = stratified_folds(dataset, k, seed);
  Table table(dataset);
  return cross_validate(spec, table, dataset.features, folds, seed, threads);
}

struct TestResult {
  double t = 0.0;
  double p = 1.0;
  double alpha = 0.05;
  std::size_t degrees_of_freedom = 0;
  bool significant = false;
};

struct PairedTTestOptions {
  double alpha = 0.05;
  // When set, applies the resampled-variance correction with this
  // test/train size ratio (1/(k-1) for k-fold).
  std::optional<double> corrected_test_train_ratio;
};

// Two-tailed paired t-test on a - b with n-1 degrees of freedom.
inline TestResult paired_t_test(std::span<const double> a, std::span<const double> b,
                                const PairedTTestOptions& options = {}) {
  if (a.size() != b.size()) throw std::invalid_argument("paired_t_test: samples differ in length");
  if (a.size() < 2) throw std::invalid_argument("paired_t_test: need at least two pairs");
  const std::size_t n = a.size();
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += a[i] - b[i];
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i] - mean;
    ss += d * d;
  }
  const double variance = ss / static_cast<double>(n - 1);
  double variance_factor = 1.0 / static_cast<double>(n);
  if (options.corrected_test_train_ratio) variance_factor += *options.corrected_test_train_ratio;

  TestResult r;
  r.alpha = options.alpha;
  r.degrees_of_freedom = n - 1;
  if (variance == 0.0) {
    if (mean == 0.0) {
      r.t = 0.0;
      r.p = 1.0;
    } else {
      r.t = mean > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
      r.p = 0.0;
    }
  } else {
    r.t = mean / std::sqrt(variance * variance_factor);
    r.p = stats::student_t_two_tailed(r.t, static_cast<double>(n - 1));
  }
  r.significant = r.p < options.alpha;
  return r;
}

}  // namespace equity
