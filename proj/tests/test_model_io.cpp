#include <gtest/gtest.h>

#include <fstream>

#include "support.hpp"

using namespace equity;
using equity::testing::TempDir;

namespace {

Model trained(Algorithm a, const LabeledDataset& ds) {
  Hyperparameters hp;
  if (a == Algorithm::kRandomForest) hp["trees"] = 8;
  auto m = train(LearnerSpec::make(a, hp, std::uint64_t{4}), ds);
  m.metadata.dataset_digest = dataset_digest(ds);
  return m;
}

std::vector<FeatureVector> random_vectors(std::size_t width, std::size_t count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<FeatureVector> out(count);
  for (auto& v : out) {
    for (std::size_t i = 0; i < width; ++i) v.push_back(rng.uniform() < 0.1 ? kMissing : std::exp(3 * rng.normal()));
  }
  return out;
}

}  // namespace

TEST(ModelFile, SaveLoadPreservesPredictionsForEveryLearner) {
  TempDir dir;
  const auto ds = equity::testing::synthetic_dataset(80, 2, 0.1);
  const auto vectors = random_vectors(ds.features.size(), 100, 7);
  for (auto a : kAllAlgorithms) {
    const auto m = trained(a, ds);
    const auto path = dir.file(std::string(algorithm_id(a)) + ".json");
    save_model(m, path);
    const auto loaded = load_model(path);
    for (const auto& v : vectors) {
      const auto p = predict(m, v), q = predict(loaded, v);
      EXPECT_EQ(p.score, q.score) << algorithm_id(a);
      EXPECT_EQ(p.label, q.label);
    }
    EXPECT_EQ(loaded.spec, m.spec);
    EXPECT_EQ(loaded.features, m.features);
    EXPECT_EQ(loaded.metadata.dataset_digest, m.metadata.dataset_digest);
  }
}

TEST(ModelFile, CanonicalBytes) {
  TempDir dir;
  const auto ds = equity::testing::synthetic_dataset(60, 3);
  for (auto a : kAllAlgorithms) {
    const auto m = trained(a, ds);
    const auto d1 = save_model(m, dir.file("a.json"));
    const auto d2 = save_model(m, dir.file("b.json"));
    EXPECT_EQ(d1, d2);
    EXPECT_EQ(read_file(dir.file("a.json")), read_file(dir.file("b.json")));
    // load then save reproduces the file
    save_model(load_model(dir.file("a.json")), dir.file("c.json"));
    EXPECT_EQ(read_file(dir.file("a.json")), read_file(dir.file("c.json"))) << algorithm_id(a);
  }
}

TEST(ModelFile, VersionMismatchIsRejected) {
  const auto ds = equity::testing::synthetic_dataset(40, 1);
  auto j = model_to_json(trained(Algorithm::kNaiveBayes, ds));
  j["version"] = kModelFormatVersion + 1;
  try {
    parse_model(j.dump());
    FAIL();
  } catch (const ModelVersionError& e) {
    EXPECT_NE(std::string(e.what()).find("version"), std::string::npos);
  }
}

TEST(ModelFile, MalformedContentIsParseError) {
  EXPECT_THROW(parse_model("not json"), ParseError);
  EXPECT_THROW(parse_model("{}"), ParseError);
  const auto ds = equity::testing::synthetic_dataset(40, 1);
  auto j = model_to_json(trained(Algorithm::kC45Tree, ds));
  j["parameters"]["nodes"] = nlohmann::json::array({nlohmann::json::array({0, 1.0, 0, 5, 6})});
  EXPECT_THROW(parse_model(j.dump()), ParseError);
  j = model_to_json(trained(Algorithm::kLogistic, ds));
  j["parameters"]["weights"] = nlohmann::json::array({1.0});
  EXPECT_THROW(parse_model(j.dump()), ParseError);
}

TEST(ModelFile, MissingFileNamesThePath) {
  try {
    load_model("/nonexistent/dir/model.json");
    FAIL();
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/dir/model.json"), std::string::npos);
  }
}

TEST(ModelFile, NoSentinelThresholdsSerialized) {
  const auto ds = equity::testing::synthetic_dataset(150, 5, 0.4);
  const auto j = model_to_json(trained(Algorithm::kRandomForest, ds));
  for (const auto& tree : j["parameters"]["trees"]) {
    for (const auto& node : tree) {
      if (node.size() == 5) {
        EXPECT_NE(node[1].get<double>(), kMissing);
      }
    }
  }
}

TEST(Digest, KnownValues) {
  EXPECT_EQ(fnv1a_hex(""), "cbf29ce484222325");
  EXPECT_EQ(fnv1a_hex("a"), "af63dc4c8601ec8c");
}
