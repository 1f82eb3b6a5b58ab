#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "equity/parallel.hpp"
#include "equity/random.hpp"
#include "equity/tree.hpp"

namespace equity {

struct ForestParams {
  std::size_t trees = 100;
  std::size_t features_per_split = 0;  // 0 = floor(log2 F) + 1
  std::size_t min_leaf = 2;
  std::size_t max_depth = 0;
  bool bootstrap = true;
};

struct ForestModel {
  std::vector<TreeModel> trees;
  std::uint64_t seed = 0;
  ForestParams params;

  // Mean of the per-tree Good-leaf proportions.
  double score(std::span<const double> x) const {
    double sum = 0.0;
    for (const auto& t : trees) sum += t.score(x);
    return sum / static_cast<double>(trees.size());
  }
};

// Each tree sees its own bootstrap resample and a random stream derived only
// from (seed, tree index), so the result does not depend on `threads`.
inline ForestModel grow_forest(const Table& table, std::span<const std::size_t> rows, const FeatureSet& features,
                               ForestParams params, std::uint64_t seed, unsigned threads = 1) {
  if (rows.empty()) throw TrainingError("cannot train a forest on an empty dataset");
  if (params.trees < 1) throw TrainingError("forest needs at least one tree");
  if (params.features_per_split == 0) params.features_per_split = default_features_per_split(table.cols());

  TreeParams tree_params;
  tree_params.min_leaf = params.min_leaf;
  tree_params.max_depth = params.max_depth;
  tree_params.features_per_split = params.features_per_split;
  tree_params.prune = false;

  ForestModel forest;
  forest.seed = seed;
  forest.params = params;
  forest.trees.resize(params.trees);
  parallel_for(params.trees, threads, [&](std::size_t t) {
    Rng rng(derive_seed(seed, t));
    std::vector<std::size_t> sample;
    if (params.bootstrap) {
      sample.resize(rows.size());
      for (auto& r : sample) r = rows[rng.below(rows.size())];
    } else {
      sample.assign(rows.begin(), rows.end());
    }
    forest.trees[t] = grow_tree(table, std::move(sample), features, tree_params, &rng);
  });
  return forest;
}

inline ForestModel train_random_forest(const LabeledDataset& dataset, const ForestParams& params, std::uint64_t seed,
                                       unsigned threads = 1) {
  Table table(dataset);
  return grow_forest(table, detail::all_rows(table), dataset.features, params, seed, threads);
}

}  // namespace equity
