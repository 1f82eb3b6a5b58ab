#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

#include "equity/digest.hpp"
#include "equity/errors.hpp"
#include "equity/labeling.hpp"
#include "equity/model.hpp"

namespace equity {

inline constexpr int kModelFormatVersion = 1;
inline constexpr std::string_view kModelFormatName = "equity-model";

struct ModelVersionError : ParseError {
  explicit ModelVersionError(const std::string& what) : ParseError(what) {}
};

namespace detail {

using nlohmann::json;

// Split: [feature, threshold, missing_right, left, right]; leaf: [good, bad].
inline json tree_to_json(const TreeModel& t) {
  json nodes = json::array();
  for (const auto& n : t.nodes) {
    if (n.is_leaf()) {
      nodes.push_back(json::array({n.good, n.bad}));
    } else {
      nodes.push_back(json::array({n.feature, n.threshold, n.missing == MissingPolicy::kRight ? 1 : 0, n.left, n.right}));
    }
  }
  return nodes;
}

inline TreeModel tree_from_json(const json& j, const FeatureSet& features) {
  TreeModel t;
  t.features = features;
  for (const auto& n : j) {
    TreeNode node;
    if (n.size() == 2) {
      node.good = n[0].get<std::uint32_t>();
      node.bad = n[1].get<std::uint32_t>();
    } else if (n.size() == 5) {
      node.feature = n[0].get<int>();
      node.threshold = n[1].get<double>();
      node.missing = n[2].get<int>() ? MissingPolicy::kRight : MissingPolicy::kLeft;
      node.left = n[3].get<int>();
      node.right = n[4].get<int>();
      if (node.feature < 0 || static_cast<std::size_t>(node.feature) >= features.size()) {
        throw ParseError("model file: split feature index out of range");
      }
    } else {
      throw ParseError("model file: malformed tree node");
    }
    t.nodes.push_back(node);
  }
  const int count = static_cast<int>(t.nodes.size());
  if (count == 0) throw ParseError("model file: empty tree");
  for (const auto& n : t.nodes) {
    if (!n.is_leaf() && (n.left <= 0 || n.left >= count || n.right <= 0 || n.right >= count)) {
      throw ParseError("model file: child index out of range");
    }
  }
  return t;
}

inline json gaussians_to_json(const std::vector<Gaussian>& gs) {
  json out = json::array();
  for (const auto& g : gs) out.push_back(json::array({g.mean, g.variance, g.count}));
  return out;
}

inline std::vector<Gaussian> gaussians_from_json(const json& j) {
  std::vector<Gaussian> out;
  for (const auto& g : j) out.push_back(Gaussian{g.at(0).get<double>(), g.at(1).get<double>(), g.at(2).get<std::size_t>()});
  return out;
}

}  // namespace detail

inline nlohmann::json model_to_json(const Model& model) {
  using nlohmann::json;
  json j;
  j["format"] = kModelFormatName;
  j["version"] = kModelFormatVersion;
  j["algorithm"] = algorithm_id(model.spec.algorithm);
  j["hyperparameters"] = model.spec.hyperparameters;
  j["seed"] = model.spec.seed ? json(*model.spec.seed) : json(nullptr);
  j["features"] = model.features.members();
  j["metadata"] = {{"dataset_digest", model.metadata.dataset_digest}, {"timestamp", model.metadata.timestamp}};
  json p;
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, TreeModel>) {
          p["nodes"] = detail::tree_to_json(m);
        } else if constexpr (std::is_same_v<T, ForestModel>) {
          p["seed"] = m.seed;
          p["features_per_split"] = m.params.features_per_split;
          json trees = json::array();
          for (const auto& t : m.trees) trees.push_back(detail::tree_to_json(t));
          p["trees"] = std::move(trees);
        } else if constexpr (std::is_same_v<T, NaiveBayesModel>) {
          p["prior_good"] = m.prior_good;
          p["prior_bad"] = m.prior_bad;
          p["variance_floor"] = m.variance_floor;
          p["good"] = detail::gaussians_to_json(m.good);
          p["bad"] = detail::gaussians_to_json(m.bad);
        } else {
          p["intercept"] = m.intercept;
          p["weights"] = m.weights;
          p["center"] = m.center;
          p["scale"] = m.scale;
          p["impute"] = m.impute;
          p["iterations"] = m.iterations;
          p["gradient_norm"] = m.gradient_norm;
          p["converged"] = m.converged;
        }
      },
      model.parameters);
  j["parameters"] = std::move(p);
  return j;
}

// Canonical text: compact JSON with sorted keys and a trailing newline.
inline std::string serialize_model(const Model& model) { return model_to_json(model).dump() + "\n"; }

inline Model model_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != kModelFormatName) throw ParseError("not an equity model file");
    const int version = j.at("version").get<int>();
    if (version != kModelFormatVersion) {
      throw ModelVersionError("model file version " + std::to_string(version) + " is not supported (expected " +
                              std::to_string(kModelFormatVersion) + ")");
    }
    auto algorithm = parse_algorithm(j.at("algorithm").get<std::string>());
    if (!algorithm) throw ParseError("model file: unknown algorithm");
    std::optional<std::uint64_t> seed;
    if (!j.at("seed").is_null()) seed = j.at("seed").get<std::uint64_t>();
    Model m;
    try {
      m.spec = LearnerSpec::make(*algorithm, j.at("hyperparameters").get<Hyperparameters>(), seed);
    } catch (const UsageError& e) {
      throw ParseError(std::string("model file: ") + e.what());
    }
    m.features = FeatureSet::make(j.at("features").get<std::vector<std::string>>());
    if (!(m.features.members() == j.at("features").get<std::vector<std::string>>())) {
      throw ParseError("model file: features are not in canonical order");
    }
    m.metadata.dataset_digest = j.at("metadata").at("dataset_digest").get<std::string>();
    m.metadata.timestamp = j.at("metadata").at("timestamp").get<std::string>();
    const auto& p = j.at("parameters");
    const std::size_t nf = m.features.size();
    switch (*algorithm) {
      case Algorithm::kC45Tree:
      case Algorithm::kRandomTree:
        m.parameters = detail::tree_from_json(p.at("nodes"), m.features);
        break;
      case Algorithm::kRandomForest: {
        ForestModel f;
        f.seed = p.at("seed").get<std::uint64_t>();
        f.params.trees = m.spec.get_count("trees");
        f.params.features_per_split = p.at("features_per_split").get<std::size_t>();
        f.params.min_leaf = m.spec.get_count("min_leaf");
        f.params.max_depth = m.spec.get_count("max_depth");
        f.params.bootstrap = m.spec.get("bootstrap") != 0;
        for (const auto& t : p.at("trees")) f.trees.push_back(detail::tree_from_json(t, m.features));
        if (f.trees.empty()) throw ParseError("model file: forest has no trees");
        m.parameters = std::move(f);
        break;
      }
      case Algorithm::kNaiveBayes: {
        NaiveBayesModel nb;
        nb.features = m.features;
        nb.prior_good = p.at("prior_good").get<double>();
        nb.prior_bad = p.at("prior_bad").get<double>();
        nb.variance_floor = p.at("variance_floor").get<double>();
        nb.good = detail::gaussians_from_json(p.at("good"));
        nb.bad = detail::gaussians_from_json(p.at("bad"));
        if (nb.good.size() != nf || nb.bad.size() != nf) throw ParseError("model file: Gaussian count mismatch");
        m.parameters = std::move(nb);
        break;
      }
      case Algorithm::kLogistic: {
        LogisticModel lm;
        lm.features = m.features;
        lm.intercept = p.at("intercept").get<double>();
        lm.weights = p.at("weights").get<std::vector<double>>();
        lm.center = p.at("center").get<std::vector<double>>();
        lm.scale = p.at("scale").get<std::vector<double>>();
        lm.impute = p.at("impute").get<std::vector<double>>();
        lm.iterations = p.at("iterations").get<std::size_t>();
        lm.gradient_norm = p.at("gradient_norm").get<double>();
        lm.converged = p.at("converged").get<bool>();
        if (lm.weights.size() != nf || lm.center.size() != nf || lm.scale.size() != nf || lm.impute.size() != nf) {
          throw ParseError("model file: coefficient count mismatch");
        }
        m.parameters = std::move(lm);
        break;
      }
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("model file: ") + e.what());
  }
}

inline Model parse_model(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("model file is not valid JSON: ") + e.what());
  }
  return model_from_json(j);
}

inline std::string model_digest(const Model& model) { return fnv1a_hex(serialize_model(model)); }

inline std::string dataset_digest(const LabeledDataset& dataset) {
  std::ostringstream os;
  write_labeled(os, dataset);
  return fnv1a_hex(os.str());
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream os;
  os << in.rdbuf();
  if (in.bad()) throw IoError("failed reading '" + path + "'");
  return os.str();
}

inline void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("failed writing '" + path + "'");
}

// Writes the canonical model file and returns its digest.
inline std::string save_model(const Model& model, const std::string& path) {
  const auto text = serialize_model(model);
  write_file(path, text);
  return fnv1a_hex(text);
}

inline Model load_model(const std::string& path) { return parse_model(read_file(path)); }

}  // namespace equity
