#include <gtest/gtest.h>

#include "oracles.hpp"
#include "support.hpp"

using namespace equity;
using equity::testing::make_dataset;
using G = std::pair<double, Label>;

namespace {
constexpr Label kG = Label::kGood;
constexpr Label kB = Label::kBad;
}  // namespace

TEST(GainRatio, PerfectBalancedSplitIsOne) {
  std::vector<G> rows{{1, kG}, {1, kG}, {3, kB}, {3, kB}};
  EXPECT_DOUBLE_EQ(gain_ratio(rows, 2.0), 1.0);
}

TEST(GainRatio, IndependentLabelsGiveZero) {
  std::vector<G> rows{{1, kG}, {1, kB}, {3, kG}, {3, kB}};
  EXPECT_DOUBLE_EQ(gain_ratio(rows, 2.0), 0.0);
}

TEST(GainRatio, NoSplitInformationGivesZero) {
  std::vector<G> rows{{1, kG}, {2, kB}};
  EXPECT_EQ(gain_ratio(rows, 5.0), 0.0);
  EXPECT_EQ(gain_ratio(rows, 0.0), 0.0);
}

TEST(GainRatio, SixRowsMatchDirectSummation) {
  std::vector<G> rows{{0.5, kG}, {1.5, kG}, {2.0, kB}, {2.5, kG}, {4.0, kB}, {7.0, kB}};
  for (double t : {1.0, 1.75, 2.2, 3.0, 5.0}) {
    const auto o = oracle::split_values(rows, t);
    const auto s = partition(rows, t);
    EXPECT_NEAR(s.information_gain(), o.gain, 1e-12) << t;
    EXPECT_NEAR(s.split_information(), o.split_info, 1e-12) << t;
    EXPECT_NEAR(gain_ratio(rows, t), o.ratio, 1e-12) << t;
  }
  // threshold 2.2: left {G,G,B}, right {G,B,B}
  const double h3 = -(1.0 / 3) * std::log2(1.0 / 3) - (2.0 / 3) * std::log2(2.0 / 3);
  EXPECT_NEAR(gain_ratio(rows, 2.2), 1.0 - h3, 1e-12);
}

TEST(GainRatio, InvariantUnderMonotoneRelabelling) {
  Rng rng(21);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<G> rows, mapped;
    const std::size_t n = 2 + rng.below(20);
    for (std::size_t i = 0; i < n; ++i) {
      const double v = std::floor(10 * rng.uniform());
      const Label l = rng.uniform() < 0.5 ? kG : kB;
      rows.emplace_back(v, l);
      mapped.emplace_back(std::exp(v / 3) - 7, l);
    }
    const double t = std::floor(10 * rng.uniform()) + 0.5;
    EXPECT_NEAR(gain_ratio(rows, t), gain_ratio(mapped, std::exp(t / 3) - 7), 1e-12);
  }
}

TEST(Entropy, MatchesDirectSummation) {
  for (int g = 0; g <= 9; ++g) {
    for (int b = 0; b <= 9; ++b) {
      std::vector<Label> l(g, kG);
      l.insert(l.end(), b, kB);
      EXPECT_NEAR(entropy(g, b), oracle::entropy_bits(l), 1e-12);
    }
  }
}

TEST(Midpoint, NeverReturnsTheSentinel) {
  EXPECT_EQ(midpoint_threshold(1.0, 2.0), 1.5);
  EXPECT_NE(midpoint_threshold(-9999.5, -9998.5), kMissing);
  EXPECT_EQ(midpoint_threshold(1.0, std::nextafter(1.0, 2.0)), 1.0);
}

TEST(Pessimistic, MatchesKnownValues) {
  // Upper 75% confidence limit on 0 errors in 1 and 6 cases: 1 - 0.25^(1/n).
  EXPECT_NEAR(pessimistic_extra_errors(1, 0, 0.25), 0.75, 1e-12);
  EXPECT_NEAR(pessimistic_extra_errors(6, 0, 0.25), 6 * (1 - std::pow(0.25, 1.0 / 6)), 1e-12);
  EXPECT_GT(pessimistic_extra_errors(10, 2, 0.25), 0.0);
  EXPECT_GT(pessimistic_extra_errors(10, 2, 0.1), pessimistic_extra_errors(10, 2, 0.25));
}

TEST(C45, AllGoodIsSingleLeaf) {
  auto ds = make_dataset({"book_value"}, {{{1}, kG}, {{2}, kG}, {{3}, kG}});
  auto t = train_c45(ds);
  ASSERT_EQ(t.nodes.size(), 1u);
  EXPECT_EQ(t.nodes[0].good, 3u);
  EXPECT_EQ(t.score(std::vector<double>{10}), 1.0);
}

TEST(C45, SeparatingFeatureGivesDepthOne) {
  std::vector<equity::testing::Row> rows;
  for (int i = 0; i < 10; ++i) rows.push_back({{std::sin(i * 1.3), static_cast<double>(i)}, i < 5 ? kB : kG});
  auto ds = make_dataset({"book_value", "market_cap"}, rows);
  auto t = train_c45(ds);
  EXPECT_EQ(t.depth(), 1u);
  EXPECT_EQ(t.nodes[0].feature, 1);
  EXPECT_EQ(t.nodes[0].threshold, 4.5);
  EXPECT_EQ(t.score(std::vector<double>{0, 2}), 0.0);
  EXPECT_EQ(t.score(std::vector<double>{0, 7}), 1.0);
}

TEST(C45, TrainingAccuracyAtLeastMajorityRate) {
  Rng rng(2);
  std::vector<equity::testing::Row> rows;
  std::size_t good = 0;
  for (int i = 0; i < 20; ++i) {
    const double x = rng.normal(), y = rng.normal();
    const Label l = x + 0.5 * y + 0.3 * rng.normal() > 0.2 ? kG : kB;
    good += l == kG;
    rows.push_back({{x, y}, l});
  }
  auto ds = make_dataset({"book_value", "market_cap"}, rows);
  auto t = train_c45(ds);
  std::size_t correct = 0;
  for (const auto& e : ds.examples) correct += make_prediction(t.score(e.vector)).label == e.label;
  EXPECT_GE(correct, std::max(good, 20 - good));
}

TEST(C45, MissingValuesFollowTheLargerChild) {
  std::vector<equity::testing::Row> rows;
  for (int i = 0; i < 12; ++i) rows.push_back({{static_cast<double>(i)}, i < 8 ? kB : kG});
  rows.push_back({{kMissing}, kG});
  auto ds = make_dataset({"book_value"}, rows);
  TreeParams p;
  p.prune = false;
  auto t = train_c45(ds, p);
  ASSERT_FALSE(t.nodes[0].is_leaf());
  EXPECT_NE(t.nodes[0].threshold, kMissing);
  EXPECT_EQ(t.nodes[0].missing, MissingPolicy::kLeft);
  EXPECT_LT(t.score(std::vector<double>{kMissing}), 0.5);
}

TEST(C45, EmptyDatasetIsTrainingError) {
  LabeledDataset ds;
  ds.features = FeatureSet::make({"book_value"});
  EXPECT_THROW(train_c45(ds), TrainingError);
}

TEST(C45, PruningNeverGrowsTheTree) {
  auto ds = equity::testing::synthetic_dataset(150, 3);
  TreeParams raw;
  raw.prune = false;
  const auto full = train_c45(ds, raw);
  const auto pruned = train_c45(ds);
  EXPECT_LE(pruned.leaf_count(), full.leaf_count());
  EXPECT_GE(pruned.leaf_count(), 1u);
}

TEST(RandomTree, AllFeaturesReproducesUnprunedC45) {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    auto ds = equity::testing::synthetic_dataset(80, seed);
    TreeParams p;
    p.prune = false;
    const auto c45 = train_c45(ds, p);
    p.features_per_split = ds.features.size();
    EXPECT_EQ(train_random_tree(ds, p, seed * 7), c45);
  }
}

TEST(RandomTree, DeterministicPerSeedAndVariesAcrossSeeds) {
  auto ds = equity::testing::synthetic_dataset(80, 9);
  EXPECT_EQ(train_random_tree(ds, {}, 5), train_random_tree(ds, {}, 5));
  int differing = 0;
  const auto first = train_random_tree(ds, {}, 1);
  for (std::uint64_t s = 2; s <= 5; ++s) differing += !(train_random_tree(ds, {}, s) == first);
  EXPECT_GE(differing, 1);
}

TEST(RandomTree, DefaultFeatureCount) {
  EXPECT_EQ(default_features_per_split(29), 5u);
  EXPECT_EQ(default_features_per_split(11), 4u);
  EXPECT_EQ(default_features_per_split(1), 1u);
}

TEST(Trees, ThresholdsAreFiniteAndNeverTheSentinel) {
  auto ds = equity::testing::synthetic_dataset(200, 4, 0.3);
  for (std::uint64_t s = 1; s <= 3; ++s) {
    for (const auto& t : {train_c45(ds), train_random_tree(ds, {}, s)}) {
      for (const auto& n : t.nodes) {
        if (n.is_leaf()) {
          EXPECT_GT(n.good + n.bad, 0u);
        } else {
          EXPECT_TRUE(std::isfinite(n.threshold));
          EXPECT_NE(n.threshold, kMissing);
          EXPECT_LT(static_cast<std::size_t>(n.feature), ds.features.size());
        }
      }
    }
  }
}
