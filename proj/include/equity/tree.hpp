#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "equity/errors.hpp"
#include "equity/random.hpp"
#include "equity/split.hpp"
#include "equity/stats.hpp"

namespace equity {

enum class MissingPolicy : std::uint8_t { kLeft, kRight };

// Split nodes have feature >= 0 and two children; leaves have feature == -1.
// Class counts are kept on every node; only leaf counts drive predictions.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  MissingPolicy missing = MissingPolicy::kLeft;
  int left = -1;
  int right = -1;
  std::uint32_t good = 0;
  std::uint32_t bad = 0;

  bool is_leaf() const noexcept { return feature < 0; }
  double good_fraction() const noexcept {
    const double n = static_cast<double>(good) + bad;
    return n > 0 ? good / n : 0.5;
  }
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct TreeParams {
  std::size_t min_leaf = 2;
  std::size_t max_depth = 0;  // 0 = unlimited
  // Features examined per node; 0 = all (C4.5), otherwise random subset.
  std::size_t features_per_split = 0;
  bool prune = true;
  double confidence = 0.25;
};

// Nodes are stored in preorder; nodes[0] is the root.
struct TreeModel {
  std::vector<TreeNode> nodes;
  FeatureSet features;

  std::size_t leaf_for(std::span<const double> x) const {
    std::size_t i = 0;
    while (!nodes[i].is_leaf()) {
      const auto& n = nodes[i];
      const double v = x[static_cast<std::size_t>(n.feature)];
      bool go_left = is_missing(v) ? n.missing == MissingPolicy::kLeft : v <= n.threshold;
      i = static_cast<std::size_t>(go_left ? n.left : n.right);
    }
    return i;
  }

  double score(std::span<const double> x) const { return nodes[leaf_for(x)].good_fraction(); }

  std::size_t depth() const {
    std::size_t best = 0;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
    while (!stack.empty()) {
      auto [i, d] = stack.back();
      stack.pop_back();
      best = std::max(best, d);
      if (!nodes[i].is_leaf()) {
        stack.emplace_back(nodes[i].left, d + 1);
        stack.emplace_back(nodes[i].right, d + 1);
      }
    }
    return best;
  }

  std::size_t leaf_count() const {
    return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](auto& n) { return n.is_leaf(); }));
  }

  friend bool operator==(const TreeModel&, const TreeModel&) = default;
};

// Upper confidence bound on the extra errors at a leaf with N instances and e
// observed errors, at confidence level `cf` (C4.5's pessimistic estimate).
inline double pessimistic_extra_errors(double n, double e, double cf) {
  if (cf > 0.5) throw std::invalid_argument("confidence factor must be at most 0.5");
  if (n <= 0) return 0.0;
  if (e < 1.0) {
    const double base = n * (1.0 - std::pow(cf, 1.0 / n));
    if (e == 0.0) return base;
    return base + e * (pessimistic_extra_errors(n, 1.0, cf) - base);
  }
  if (e + 0.5 >= n) return std::max(n - e, 0.0);
  const double z = stats::normal_quantile(1.0 - cf);
  const double f = (e + 0.5) / n;
  const double r = (f + z * z / (2 * n) + z * std::sqrt(f / n - f * f / n + z * z / (4 * n * n))) / (1 + z * z / n);
  return r * n - e;
}

namespace detail {

// Each feature keeps its sample positions sorted by value (missing last). A
// node owns the same [begin, end) range in every list, and splitting a node
// stable-partitions each range so the children stay sorted.
class TreeBuilder {
 public:
  TreeBuilder(const Table& table, const TreeParams& params, Rng* rng)
      : table_(table), params_(params), rng_(rng) {
    feature_order_.resize(table.cols());
    std::iota(feature_order_.begin(), feature_order_.end(), std::size_t{0});
  }

  std::vector<TreeNode> build(std::vector<std::size_t> rows) {
    nodes_.clear();
    if (table_.cols() == 0) {
      TreeNode leaf;
      for (auto r : rows) (table_.label(r) == Label::kGood ? leaf.good : leaf.bad) += 1;
      return {leaf};
    }
    sample_ = std::move(rows);
    const std::size_t n = sample_.size();
    // Positions grouped by table row, so each feature's order follows from
    // the table's presorted rows.
    std::vector<std::uint32_t> start(table_.rows() + 1, 0), positions(n);
    for (auto r : sample_) ++start[r + 1];
    std::partial_sum(start.begin(), start.end(), start.begin());
    {
      std::vector<std::uint32_t> fill(start.begin(), start.end() - 1);
      for (std::size_t p = 0; p < n; ++p) positions[fill[sample_[p]]++] = static_cast<std::uint32_t>(p);
    }
    order_.assign(table_.cols(), {});
    for (std::size_t f = 0; f < table_.cols(); ++f) {
      auto& ord = order_[f];
      ord.reserve(n);
      for (auto r : table_.sorted_rows(f)) {
        for (auto i = start[r]; i < start[r + 1]; ++i) ord.push_back(positions[i]);
      }
    }
    go_left_.assign(n, 0);
    buffer_.resize(n);
    grow(0, n, 0);
    order_.clear();
    return std::move(nodes_);
  }

 private:
  int grow(std::size_t begin, std::size_t end, std::size_t depth) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    TreeNode node;
    const auto& any_order = order_[0];
    for (std::size_t i = begin; i < end; ++i) {
      (table_.label(sample_[any_order[i]]) == Label::kGood ? node.good : node.bad) += 1;
    }

    const std::size_t size = end - begin;
    const bool pure = node.good == 0 || node.bad == 0;
    const bool depth_capped = params_.max_depth > 0 && depth >= params_.max_depth;
    if (pure || depth_capped || size < 2 * std::max<std::size_t>(params_.min_leaf, 1)) {
      nodes_[id] = node;
      return id;
    }

    candidates_.clear();
    for (auto f : candidate_features()) {
      const auto col = table_.column(f);
      scratch_.clear();
      for (std::size_t i = begin; i < end; ++i) {
        const std::size_t r = sample_[order_[f][i]];
        if (is_missing(col[r])) break;
        scratch_.emplace_back(col[r], table_.label(r));
      }
      candidates_.push_back(best_split_sorted(scratch_, size, f, params_.min_leaf));
    }
    const SplitCandidate best = choose_split(candidates_);
    if (!best.valid()) {
      nodes_[id] = node;
      return id;
    }

    node.feature = static_cast<int>(best.feature);
    node.threshold = best.threshold;
    node.missing = best.known_left >= best.known_right ? MissingPolicy::kLeft : MissingPolicy::kRight;

    const auto col = table_.column(best.feature);
    std::size_t left_size = 0;
    for (std::size_t i = begin; i < end; ++i) {
      const std::uint32_t pos = order_[0][i];
      const double v = col[sample_[pos]];
      const bool left = is_missing(v) ? node.missing == MissingPolicy::kLeft : v <= node.threshold;
      go_left_[pos] = left;
      left_size += left;
    }
    for (auto& ord : order_) {
      auto l = ord.begin() + static_cast<std::ptrdiff_t>(begin);
      auto r = buffer_.begin();
      for (std::size_t i = begin; i < end; ++i) {
        if (go_left_[ord[i]]) *l++ = ord[i];
        else *r++ = ord[i];
      }
      std::copy(buffer_.begin(), r, l);
    }

    const std::size_t mid = begin + left_size;
    node.left = grow(begin, mid, depth + 1);
    node.right = grow(mid, end, depth + 1);
    nodes_[id] = node;
    return id;
  }

  // All features, or a seeded random subset in ascending index order so the
  // lowest-index tie-break applies within the subset.
  std::vector<std::size_t> candidate_features() {
    const std::size_t total = table_.cols();
    const std::size_t k = params_.features_per_split;
    if (k == 0 || rng_ == nullptr) return feature_order_;
    std::vector<std::size_t> pool = feature_order_;
    const std::size_t take = std::min(k, total);
    for (std::size_t i = 0; i < take; ++i) {
      std::size_t j = i + static_cast<std::size_t>(rng_->below(total - i));
      std::swap(pool[i], pool[j]);
    }
    pool.resize(take);
    std::sort(pool.begin(), pool.end());
    return pool;
  }

  const Table& table_;
  const TreeParams& params_;
  Rng* rng_;
  std::vector<std::size_t> feature_order_;
  std::vector<TreeNode> nodes_;
  std::vector<std::size_t> sample_;
  std::vector<std::vector<std::uint32_t>> order_;
  std::vector<std::uint8_t> go_left_;
  std::vector<std::uint32_t> buffer_;
  std::vector<std::pair<double, Label>> scratch_;
  std::vector<SplitCandidate> candidates_;
};

// Bottom-up subtree replacement. Returns the pessimistic error estimate of the
// (possibly collapsed) subtree rooted at `i`.
inline double prune_node(std::vector<TreeNode>& nodes, int i, double cf) {
  TreeNode& n = nodes[static_cast<std::size_t>(i)];
  const double total = static_cast<double>(n.good) + n.bad;
  const double leaf_errors = total - std::max<double>(n.good, n.bad);
  const double as_leaf = leaf_errors + pessimistic_extra_errors(total, leaf_errors, cf);
  if (n.is_leaf()) return as_leaf;
  const double as_tree = prune_node(nodes, n.left, cf) + prune_node(nodes, n.right, cf);
  if (as_leaf <= as_tree + 0.1) {
    n.feature = -1;
    n.left = n.right = -1;
    n.threshold = 0.0;
    n.missing = MissingPolicy::kLeft;
    return as_leaf;
  }
  return as_tree;
}

// Drops unreachable nodes and renumbers in preorder.
inline std::vector<TreeNode> compact(const std::vector<TreeNode>& nodes) {
  std::vector<TreeNode> out;
  auto copy = [&](auto&& self, int i) -> int {
    const int id = static_cast<int>(out.size());
    out.push_back(nodes[static_cast<std::size_t>(i)]);
    if (!out[id].is_leaf()) {
      int l = self(self, nodes[static_cast<std::size_t>(i)].left);
      int r = self(self, nodes[static_cast<std::size_t>(i)].right);
      out[id].left = l;
      out[id].right = r;
    }
    return id;
  };
  copy(copy, 0);
  return out;
}

}  // namespace detail

inline std::size_t default_features_per_split(std::size_t feature_count) {
  return static_cast<std::size_t>(std::floor(std::log2(static_cast<double>(feature_count)))) + 1;
}

// Greedy gain-ratio induction on `rows` of `table`, with optional pessimistic
// pruning. `rng` is required when params.features_per_split > 0.
inline TreeModel grow_tree(const Table& table, std::vector<std::size_t> rows, const FeatureSet& features,
                           const TreeParams& params, Rng* rng = nullptr) {
  if (rows.empty()) throw TrainingError("cannot train a tree on an empty dataset");
  if (params.features_per_split > 0 && rng == nullptr) {
    throw std::invalid_argument("random feature subsets need a random stream");
  }
  detail::TreeBuilder builder(table, params, rng);
  TreeModel model;
  model.features = features;
  model.nodes = builder.build(std::move(rows));
  if (params.prune) {
    detail::prune_node(model.nodes, 0, params.confidence);
    model.nodes = detail::compact(model.nodes);
  }
  return model;
}

inline TreeModel train_c45(const LabeledDataset& dataset, TreeParams params = {}) {
  params.features_per_split = 0;
  Table table(dataset);
  return grow_tree(table, detail::all_rows(table), dataset.features, params);
}

// k features drawn at random per node (k = 0 picks floor(log2 F) + 1); never pruned.
inline TreeModel train_random_tree(const LabeledDataset& dataset, TreeParams params, std::uint64_t seed) {
  params.prune = false;
  if (params.features_per_split == 0) params.features_per_split = default_features_per_split(dataset.features.size());
  Table table(dataset);
  Rng rng(derive_seed(seed, "random_tree"));
  return grow_tree(table, detail::all_rows(table), dataset.features, params, &rng);
}

}  // namespace equity
