#pragma once

// Independent reference computations used by both the unit and acceptance
// suites. Written from the textbook definitions, not from library code.

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "equity/equity.hpp"

namespace equity::oracle {

// -sum p log2 p over the labels in `labels`, by direct counting.
inline double entropy_bits(const std::vector<Label>& labels) {
  if (labels.empty()) return 0.0;
  double h = 0.0;
  for (Label cls : {Label::kGood, Label::kBad}) {
    double c = 0;
    for (Label l : labels) c += (l == cls);
    if (c > 0) {
      const double p = c / static_cast<double>(labels.size());
      h -= p * std::log(p) / std::log(2.0);
    }
  }
  return h;
}

struct SplitValues {
  double gain;
  double split_info;
  double ratio;
};

inline SplitValues split_values(const std::vector<std::pair<double, Label>>& rows, double threshold) {
  std::vector<Label> all, left, right;
  for (const auto& [v, l] : rows) {
    all.push_back(l);
    (v <= threshold ? left : right).push_back(l);
  }
  const double n = static_cast<double>(all.size());
  const double gain = entropy_bits(all) - static_cast<double>(left.size()) / n * entropy_bits(left) -
                      static_cast<double>(right.size()) / n * entropy_bits(right);
  double si = 0.0;
  for (double part : {static_cast<double>(left.size()), static_cast<double>(right.size())}) {
    if (part > 0) si -= part / n * std::log(part / n) / std::log(2.0);
  }
  return {gain, si, si > 0 ? gain / si : 0.0};
}

// Student t density with `df` degrees of freedom.
inline double t_density(double x, double df) {
  return std::exp(std::lgamma((df + 1) / 2) - std::lgamma(df / 2)) / std::sqrt(df * M_PI) *
         std::pow(1 + x * x / df, -(df + 1) / 2);
}

// Composite Gauss-Legendre (5-point) integral of f over [a, b] with `panels` panels.
inline double integrate(const std::function<double(double)>& f, double a, double b, int panels) {
  static const double xs[] = {0.0, -0.5384693101056831, 0.5384693101056831, -0.9061798459386640,
                              0.9061798459386640};
  static const double ws[] = {0.5688888888888889, 0.4786286704993665, 0.4786286704993665, 0.2369268850561891,
                              0.2369268850561891};
  const double h = (b - a) / panels;
  double sum = 0.0;
  for (int i = 0; i < panels; ++i) {
    const double mid = a + (i + 0.5) * h;
    for (int j = 0; j < 5; ++j) sum += ws[j] * f(mid + 0.5 * h * xs[j]) * 0.5 * h;
  }
  return sum;
}

// Two-tailed p for |T| >= |t|: 1 - 2 * integral of the density over [0, |t|].
// Central mass is integrated rather than the tail, which needs no truncation.
inline double t_two_tailed_p(double t, double df) {
  const double a = std::fabs(t);
  const int panels = 400 + static_cast<int>(40 * a);
  const double central = integrate([df](double x) { return t_density(x, df); }, 0.0, a, panels);
  return std::max(0.0, 1.0 - 2.0 * central);
}

struct TTest {
  double t;
  double p;
};

inline TTest paired_t(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  std::vector<double> d;
  for (std::size_t i = 0; i < a.size(); ++i) d.push_back(a[i] - b[i]);
  double mean = 0;
  for (double x : d) mean += x;
  mean /= n;
  double ss = 0;
  for (double x : d) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / (n - 1));
  const double t = mean / (sd / std::sqrt(n));
  return {t, t_two_tailed_p(t, n - 1)};
}

// Support-weighted precision, recall and F from the per-class tables.
inline PrecisionRecallF weighted(std::size_t tp, std::size_t fp, std::size_t fn, std::size_t tn) {
  struct Cls {
    double correct, predicted, actual;
  };
  const Cls good{double(tp), double(tp + fp), double(tp + fn)};
  const Cls bad{double(tn), double(tn + fn), double(tn + fp)};
  const double n = double(tp + fp + fn + tn);
  PrecisionRecallF out;
  for (const Cls& c : {good, bad}) {
    const double p = c.predicted == 0 ? 0.0 : c.correct / c.predicted;
    const double r = c.actual == 0 ? 0.0 : c.correct / c.actual;
    const double f = p + r == 0 ? 0.0 : 2 * p * r / (p + r);
    out.precision += c.actual / n * p;
    out.recall += c.actual / n * r;
    out.f_score += c.actual / n * f;
  }
  return out;
}

}  // namespace equity::oracle
