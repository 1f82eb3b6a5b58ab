#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <span>
#include <utility>
#include <vector>

#include "equity/dataset.hpp"
#include "equity/labeling.hpp"

namespace equity {

// Column-major copy of a labeled dataset, the working form for every learner.
class Table {
 public:
  Table() = default;

  explicit Table(const LabeledDataset& ds)
      : rows_(ds.size()), cols_(ds.features.size()), data_(rows_ * cols_), labels_(rows_) {
    for (std::size_t r = 0; r < rows_; ++r) {
      const auto& e = ds.examples[r];
      if (e.vector.size() != cols_) throw std::invalid_argument("example vector does not match feature set");
      for (std::size_t c = 0; c < cols_; ++c) data_[c * rows_ + r] = e.vector[c];
      labels_[r] = e.label;
    }
    order_.resize(rows_ * cols_);
    for (std::size_t c = 0; c < cols_; ++c) {
      const auto col = column(c);
      auto first = order_.begin() + static_cast<std::ptrdiff_t>(c * rows_);
      std::iota(first, first + static_cast<std::ptrdiff_t>(rows_), std::uint32_t{0});
      std::stable_sort(first, first + static_cast<std::ptrdiff_t>(rows_), [&](std::uint32_t a, std::uint32_t b) {
        const bool ma = is_missing(col[a]), mb = is_missing(col[b]);
        if (ma || mb) return !ma && mb;
        return col[a] < col[b];
      });
    }
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double at(std::size_t r, std::size_t c) const { return data_[c * rows_ + r]; }
  std::span<const double> column(std::size_t c) const { return {data_.data() + c * rows_, rows_}; }
  Label label(std::size_t r) const { return labels_[r]; }
  std::span<const Label> labels() const { return labels_; }
  // Row indices ordered by the column's value, missing values last.
  std::span<const std::uint32_t> sorted_rows(std::size_t c) const { return {order_.data() + c * rows_, rows_}; }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> data_;
  std::vector<Label> labels_;
  std::vector<std::uint32_t> order_;
};

namespace detail {

// c * log2(c) for c = 0..n, grown on demand per thread.
inline const std::vector<double>& xlog2x_table(std::size_t n) {
  thread_local std::vector<double> table{0.0};
  while (table.size() <= n) {
    const double c = static_cast<double>(table.size());
    table.push_back(c * std::log2(c));
  }
  return table;
}

inline std::vector<std::size_t> all_rows(const Table& t) {
  std::vector<std::size_t> rows(t.rows());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return rows;
}
}  // namespace detail

struct ClassCounts {
  double good = 0;
  double bad = 0;
  double total() const noexcept { return good + bad; }
  void add(Label l, double w = 1.0) { (l == Label::kGood ? good : bad) += w; }
};

// Binary entropy of a class-count pair, in bits.
inline double entropy(double good, double bad) {
  const double n = good + bad;
  if (n <= 0) return 0.0;
  double h = 0.0;
  if (good > 0) h -= good / n * std::log2(good / n);
  if (bad > 0) h -= bad / n * std::log2(bad / n);
  return h;
}

inline double entropy(const ClassCounts& c) { return entropy(c.good, c.bad); }

struct PartitionStats {
  ClassCounts left;   // value <= threshold
  ClassCounts right;  // value > threshold

  double total() const { return left.total() + right.total(); }

  double information_gain() const {
    const double n = total();
    if (n <= 0) return 0.0;
    const double parent = entropy(left.good + right.good, left.bad + right.bad);
    return parent - (left.total() / n) * entropy(left) - (right.total() / n) * entropy(right);
  }

  double split_information() const { return entropy(left.total(), right.total()); }

  double gain_ratio() const {
    const double si = split_information();
    return si > 0 ? information_gain() / si : 0.0;
  }
};

inline PartitionStats partition(std::span<const std::pair<double, Label>> labels_and_values, double threshold) {
  PartitionStats s;
  for (const auto& [v, l] : labels_and_values) (v <= threshold ? s.left : s.right).add(l);
  return s;
}

// Information gain of the partition (value <= threshold vs >) divided by its
// split information; 0 when the split information is 0.
inline double gain_ratio(std::span<const std::pair<double, Label>> labels_and_values, double threshold) {
  return partition(labels_and_values, threshold).gain_ratio();
}

// Gains at or below this are treated as zero; guards against rounding making
// an uninformative split look useful.
inline constexpr double kMinGain = 1e-10;

struct SplitCandidate {
  std::size_t feature = 0;
  double threshold = 0.0;
  double gain = 0.0;        // scaled by the known-value fraction
  double gain_ratio = -1.0;
  std::size_t known_left = 0;
  std::size_t known_right = 0;
  bool valid() const noexcept { return gain_ratio >= 0.0; }
};

// Threshold strictly between two adjacent distinct values, never the sentinel.
inline double midpoint_threshold(double lo, double hi) {
  double mid = lo + (hi - lo) / 2.0;
  if (!(mid < hi) || mid < lo || is_missing(mid)) mid = lo;
  return mid;
}

// Smallest partition C4.5 accepts: a tenth of the per-class share of the known
// rows, clamped to [min_leaf, 25].
inline double minimum_split_size(std::size_t known, std::size_t min_leaf) {
  const double tenth = 0.1 * static_cast<double>(known) / 2.0;
  return std::clamp(tenth, static_cast<double>(std::max<std::size_t>(min_leaf, 1)), 25.0);
}

// C4.5 split of one numeric feature from its known values sorted ascending
// (`sorted`) out of `total` rows at the node. The threshold maximizes
// information gain among partitions whose sides both reach the minimum split
// size (ties keep the lowest threshold); the gain is then scaled by the known
// fraction, and the split information counts the missing rows as a third
// branch.
inline SplitCandidate best_split_sorted(std::span<const std::pair<double, Label>> sorted, std::size_t total_rows,
                                        std::size_t feature, std::size_t min_leaf) {
  SplitCandidate best;
  best.feature = feature;
  const std::size_t n = sorted.size();
  const double min_split = minimum_split_size(n, min_leaf);
  if (static_cast<double>(n) < 2 * min_split) return best;

  std::size_t kg = 0;
  for (const auto& e : sorted) kg += e.second == Label::kGood;
  const std::size_t kb = n - kg;

  // Maximizing gain means minimizing the children's summed c*log2(c) terms;
  // counts are integral, so the terms come from a cached table.
  const auto& xlx = detail::xlog2x_table(n);
  std::size_t lg = 0, lb = 0;
  double best_cost = std::numeric_limits<double>::infinity();
  std::size_t best_index = 0;
  bool any = false;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    (sorted[i].second == Label::kGood ? lg : lb) += 1;
    if (sorted[i].first == sorted[i + 1].first) continue;
    const std::size_t nl = i + 1, nr = n - nl;
    if (static_cast<double>(nl) < min_split || static_cast<double>(nr) < min_split) continue;
    any = true;
    const double cost = xlx[nl] - xlx[lg] - xlx[lb] + xlx[nr] - xlx[kg - lg] - xlx[kb - lb];
    if (cost < best_cost) {
      best_cost = cost;
      best_index = i;
    }
  }
  if (!any) return best;
  const double dn = static_cast<double>(n);
  const double best_gain = entropy(static_cast<double>(kg), static_cast<double>(kb)) - best_cost / dn;

  const double total = static_cast<double>(total_rows);
  const double gain = dn / total * best_gain;
  if (gain <= kMinGain) return best;

  const double nl = static_cast<double>(best_index + 1);
  const double nr = dn - nl;
  const double nm = total - dn;
  double split_info = 0.0;
  for (double part : {nl, nr, nm}) {
    if (part > 0) split_info -= part / total * std::log2(part / total);
  }
  if (split_info <= 0) return best;

  best.threshold = midpoint_threshold(sorted[best_index].first, sorted[best_index + 1].first);
  best.gain = gain;
  best.gain_ratio = gain / split_info;
  best.known_left = best_index + 1;
  best.known_right = n - best_index - 1;
  return best;
}

// As best_split_sorted, gathering and sorting the known values of `feature`
// over `rows` first. `scratch` is reused between calls.
inline SplitCandidate best_split_on_feature(const Table& table, std::span<const std::size_t> rows,
                                            std::size_t feature, std::size_t min_leaf,
                                            std::vector<std::pair<double, Label>>& scratch) {
  scratch.clear();
  const auto col = table.column(feature);
  for (auto r : rows) {
    if (!is_missing(col[r])) scratch.emplace_back(col[r], table.label(r));
  }
  std::sort(scratch.begin(), scratch.end(),
            [](const auto& a, const auto& b) { return a.first < b.first || (a.first == b.first && a.second < b.second); });
  return best_split_sorted(scratch, rows.size(), feature, min_leaf);
}

// Among valid candidates whose gain reaches the average gain (less 1e-3),
// the highest gain ratio; ties go to the earliest candidate.
inline SplitCandidate choose_split(std::span<const SplitCandidate> candidates) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& c : candidates) {
    if (c.valid()) {
      sum += c.gain;
      ++count;
    }
  }
  SplitCandidate best;
  if (count == 0) return best;
  const double floor = sum / static_cast<double>(count) - 1e-3;
  for (const auto& c : candidates) {
    if (c.valid() && c.gain >= floor && c.gain_ratio > best.gain_ratio) best = c;
  }
  return best;
}

}  // namespace equity
